#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dtwin/backends.hpp"
#include "dtwin/core.hpp"

namespace dtwin {

struct LengthMismatchError : Error { using Error::Error; };
struct AllFramesSkippedError : Error { using Error::Error; };
struct NoEvaluableFramesError : Error { using Error::Error; };
struct EmptyInputError : Error { using Error::Error; };

enum class SkipReason { none, no_face_source, no_face_deid };

const char* to_string(SkipReason reason);

/// Embeddings for one temporally paired (source, de-identified) frame.
struct FramePairObservation {
    int frame_index = 0;
    std::optional<EmbeddingVector> source_identity;
    std::optional<EmbeddingVector> deid_identity;
    std::optional<EmbeddingVector> source_expression;
    std::optional<EmbeddingVector> deid_expression;
    SkipReason skip = SkipReason::none;
};

enum class MetricKind { deid_level, identity_consistency, expression_preservation };

const char* to_string(MetricKind kind);

struct MetricTimeline {
    MetricKind kind = MetricKind::deid_level;
    DistanceMetric distance = DistanceMetric::cosine;
    std::vector<std::optional<double>> values;  // absent = skipped frame
};

struct CellStats {
    double mean = 0.0;
    double variance = 0.0;  // population variance
};

using MetricCell = std::pair<MetricKind, DistanceMetric>;

struct VideoSummary {
    std::string clip_id;
    std::map<MetricCell, CellStats> cells;
    int frames_evaluated = 0;
    int frames_skipped = 0;
};

struct DatasetSummary {
    std::map<MetricCell, CellStats> cells;  // mean of per-video means/variances
    int num_videos = 0;
};

std::vector<FramePairObservation> extract_observations(const VideoClip& source,
                                                       const VideoClip& deid,
                                                       FaceCropper& cropper,
                                                       Embedder& identity_embedder,
                                                       Embedder& expression_embedder);

/// Distance between source and de-identified identity per frame; higher is
/// better de-identification.
MetricTimeline deid_level_series(const std::vector<FramePairObservation>& obs,
                                 DistanceMetric distance);

/// Distance to the first non-skipped de-identified frame; lower is better.
MetricTimeline identity_consistency_series(const std::vector<FramePairObservation>& obs,
                                           DistanceMetric distance);

/// Distance between source and de-identified expression per frame; lower is
/// better.
MetricTimeline expression_preservation_series(const std::vector<FramePairObservation>& obs,
                                              DistanceMetric distance);

/// All six (metric x distance) timelines for one observation list.
std::array<MetricTimeline, 6> all_series(const std::vector<FramePairObservation>& obs);

VideoSummary summarize_video(const std::array<MetricTimeline, 6>& timelines);

DatasetSummary summarize_dataset(const std::vector<VideoSummary>& summaries);

}  // namespace dtwin
