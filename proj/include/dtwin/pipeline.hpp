#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtwin/backends.hpp"
#include "dtwin/core.hpp"
#include "dtwin/media_io.hpp"

namespace dtwin {

/// Everything that determines a pipeline run; identical configs hash to the
/// same digest, which keys the artifact cache.
struct PipelineConfig {
    std::string pose_detector = "synthetic";
    std::string contour_detector = "synthetic";
    std::string captioner = "synthetic";
    std::string inpainter = "synthetic";
    std::string reenactor = "synthetic";
    std::string face_cropper = "synthetic";
    std::string identity_embedder = "synthetic";
    std::string expression_embedder = "synthetic";
    GenerationParams params;
    int dilation_px = -1;  // negative = derive from the face bounding box
    std::string cache_dir;
    bool eval_cosine = true;
    bool eval_euclidean = true;

    std::string digest() const;

    /// Throws UnknownBackendError if any referenced backend is unregistered.
    void check_resolvable(const BackendRegistry& registry) const;
};

enum class StageStatus { ok, failed, skipped };

const char* to_string(StageStatus status);

struct StageRecord {
    std::string name;
    StageStatus status = StageStatus::skipped;
    std::string error;
    std::string artifact_path;
    double millis = 0.0;
};

struct RunRecord {
    std::string clip_id;
    std::string config_digest;
    std::vector<StageRecord> stages;
    std::vector<std::string> warnings;

    bool ok() const;
    const StageRecord* stage(const std::string& name) const;
    // Timings are wall-clock noise; the persisted record excludes them so two
    // identical runs serialize identically. They remain available in memory.
    nlohmann::json to_json(bool include_timings = false) const;
};

struct PipelineResult {
    std::optional<VideoClip> deid;
    RunRecord record;
};

/// Full single-clip run: frontal-frame selection through re-enactment, with
/// per-stage caching under the config digest. Stage errors land in the
/// record; only storage errors propagate.
PipelineResult run_deidentify(const VideoClip& clip, const PipelineConfig& config,
                              BackendRegistry& registry);

/// Order-preserving, failure-isolated batch over a manifest. De-identified
/// clips are written as image sequences under <output_dir>/deid/<clip_id>.
std::vector<RunRecord> run_batch(const DatasetManifest& manifest,
                                 const PipelineConfig& config,
                                 BackendRegistry& registry,
                                 const std::string& output_dir);

}  // namespace dtwin
