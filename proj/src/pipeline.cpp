#include "dtwin/pipeline.hpp"

#include <chrono>
#include <filesystem>

#include "dtwin/generation.hpp"
#include "dtwin/source_prep.hpp"

namespace fs = std::filesystem;

namespace dtwin {

namespace {

std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::uint8_t> encode_selection(const SourceSelection& sel) {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(sel.frame_index));
    w.u32(static_cast<std::uint32_t>(sel.num_undetected));
    w.u32(static_cast<std::uint32_t>(sel.pose_scores.size()));
    for (const auto& score : sel.pose_scores) {
        w.u32(score ? 1u : 0u);
        w.f64(score.value_or(0.0));
    }
    return w.take();
}

SourceSelection decode_selection(const std::vector<std::uint8_t>& payload) {
    ByteReader r(payload);
    SourceSelection sel;
    sel.frame_index = static_cast<int>(r.u32());
    sel.num_undetected = static_cast<int>(r.u32());
    const auto n = r.u32();
    sel.pose_scores.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        const bool present = r.u32() != 0;
        const double value = r.f64();
        sel.pose_scores.push_back(present ? std::optional<double>(value) : std::nullopt);
    }
    return sel;
}

class StageRunner {
public:
    StageRunner(RunRecord& record, const ArtifactCache* cache,
                const std::string& clip_id, const std::string& digest)
        : record_(record), cache_(cache), clip_id_(clip_id), digest_(digest) {}

    // Runs one stage with caching; encode/decode translate the stage value to
    // cache bytes. On a cached hit compute() is skipped entirely.
    template <class T, class Compute, class Encode, class Decode>
    std::optional<T> run(ArtifactStage stage, Compute compute, Encode encode,
                         Decode decode) {
        StageRecord sr;
        sr.name = to_string(stage);
        if (failed_) {
            record_.stages.push_back(std::move(sr));
            return std::nullopt;
        }
        const auto start = std::chrono::steady_clock::now();
        try {
            const ArtifactKey key{stage, clip_id_, digest_};
            if (cache_) {
                if (auto payload = cache_->fetch(key)) {
                    T value = decode(*payload);
                    sr.status = StageStatus::ok;
                    sr.artifact_path = cache_->path_for(key);
                    finish(sr, start);
                    return value;
                }
            }
            T value = compute();
            if (cache_) {
                cache_->store(key, encode(value));
                sr.artifact_path = cache_->path_for(key);
            }
            sr.status = StageStatus::ok;
            finish(sr, start);
            return value;
        } catch (const StorageFailureError&) {
            record_.stages.push_back(std::move(sr));
            throw;
        } catch (const std::exception& e) {
            sr.status = StageStatus::failed;
            sr.error = e.what();
            failed_ = true;
            finish(sr, start);
            return std::nullopt;
        }
    }

    bool failed() const { return failed_; }

private:
    void finish(StageRecord& sr, std::chrono::steady_clock::time_point start) {
        sr.millis = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
        record_.stages.push_back(std::move(sr));
    }

    RunRecord& record_;
    const ArtifactCache* cache_;
    std::string clip_id_;
    std::string digest_;
    bool failed_ = false;
};

}  // namespace

std::string PipelineConfig::digest() const {
    std::string canonical;
    canonical += "pose_detector=" + pose_detector + "\n";
    canonical += "contour_detector=" + contour_detector + "\n";
    canonical += "captioner=" + captioner + "\n";
    canonical += "inpainter=" + inpainter + "\n";
    canonical += "reenactor=" + reenactor + "\n";
    canonical += "face_cropper=" + face_cropper + "\n";
    canonical += "identity_embedder=" + identity_embedder + "\n";
    canonical += "expression_embedder=" + expression_embedder + "\n";
    canonical += "seed=" + std::to_string(params.seed) + "\n";
    canonical += "prompt_prefix=" + params.prompt_prefix + "\n";
    canonical += "max_retries=" + std::to_string(params.max_retries) + "\n";
    canonical += "dilation_px=" + std::to_string(dilation_px) + "\n";
    canonical += "cache_dir=" + cache_dir + "\n";
    canonical += "eval_cosine=" + std::to_string(eval_cosine) + "\n";
    canonical += "eval_euclidean=" + std::to_string(eval_euclidean) + "\n";

    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a(canonical)));
    return std::string(hex);
}

void PipelineConfig::check_resolvable(const BackendRegistry& registry) const {
    auto require = [](bool present, const std::string& category, const std::string& name) {
        if (!present) {
            throw UnknownBackendError("no " + category + " backend registered under '" +
                                      name + "'");
        }
    };
    require(registry.has_pose_detector(pose_detector), "pose-detector", pose_detector);
    require(registry.has_contour_detector(contour_detector), "contour-detector", contour_detector);
    require(registry.has_captioner(captioner), "captioner", captioner);
    require(registry.has_inpainter(inpainter), "inpainter", inpainter);
    require(registry.has_reenactor(reenactor), "reenactor", reenactor);
    require(registry.has_face_cropper(face_cropper), "face-cropper", face_cropper);
    require(registry.has_identity_embedder(identity_embedder), "identity-embedder", identity_embedder);
    require(registry.has_expression_embedder(expression_embedder), "expression-embedder", expression_embedder);
}

const char* to_string(StageStatus status) {
    switch (status) {
        case StageStatus::ok: return "ok";
        case StageStatus::failed: return "failed";
        case StageStatus::skipped: return "skipped";
    }
    return "skipped";
}

bool RunRecord::ok() const {
    for (const auto& s : stages) {
        if (s.status != StageStatus::ok) return false;
    }
    return !stages.empty();
}

const StageRecord* RunRecord::stage(const std::string& name) const {
    for (const auto& s : stages) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

nlohmann::json RunRecord::to_json(bool include_timings) const {
    nlohmann::json stages_json = nlohmann::json::array();
    for (const auto& s : stages) {
        nlohmann::json j{{"name", s.name},
                         {"status", to_string(s.status)},
                         {"error", s.error},
                         {"artifact", s.artifact_path}};
        if (include_timings) j["millis"] = s.millis;
        stages_json.push_back(std::move(j));
    }
    return nlohmann::json{{"clip_id", clip_id},
                          {"config_digest", config_digest},
                          {"warnings", warnings},
                          {"stages", stages_json}};
}

PipelineResult run_deidentify(const VideoClip& clip, const PipelineConfig& config,
                              BackendRegistry& registry) {
    config.check_resolvable(registry);

    PipelineResult result;
    result.record.clip_id = clip.clip_id;
    result.record.config_digest = config.digest();

    std::optional<ArtifactCache> cache;
    if (!config.cache_dir.empty()) cache.emplace(config.cache_dir);

    StageRunner runner(result.record, cache ? &*cache : nullptr, clip.clip_id,
                       result.record.config_digest);

    auto selection = runner.run<SourceSelection>(
        ArtifactStage::source_frame,
        [&] {
            const auto violations = validate_clip(clip);
            if (!violations.empty()) {
                throw Error("invalid clip: " + violations.front());
            }
            auto detector = registry.make_pose_detector(config.pose_detector);
            return select_source_frame(clip, *detector);
        },
        encode_selection, decode_selection);

    auto mask = runner.run<FaceMask>(
        ArtifactStage::mask,
        [&] {
            const FrameImage& source = clip.frames[selection->frame_index];
            auto detector = registry.make_contour_detector(config.contour_detector);
            auto contour_result = detect_face_contour(source, *detector);
            for (auto& w : contour_result.warnings) {
                result.record.warnings.push_back(std::move(w));
            }
            const int dilation = config.dilation_px >= 0
                                     ? config.dilation_px
                                     : default_dilation(contour_result.contour);
            return build_mask(contour_result.contour, source.width, source.height,
                              dilation);
        },
        encode_mask, decode_mask);

    auto caption = runner.run<Caption>(
        ArtifactStage::caption,
        [&] {
            auto captioner = registry.make_captioner(config.captioner);
            Caption c = caption_image(clip.frames[selection->frame_index], *captioner);
            if (!config.params.prompt_prefix.empty()) {
                c.text = config.params.prompt_prefix + " " + c.text;
            }
            return c;
        },
        encode_caption, decode_caption);

    auto dtwin = runner.run<DTwin>(
        ArtifactStage::dtwin,
        [&] {
            auto inpainter = registry.make_inpainter(config.inpainter);
            return inpaint_face(clip.frames[selection->frame_index], *mask, *caption,
                                config.params, *inpainter);
        },
        encode_dtwin, decode_dtwin);

    auto deid = runner.run<VideoClip>(
        ArtifactStage::deid_video,
        [&] {
            auto reenactor = registry.make_reenactor(config.reenactor);
            return reenact(*dtwin, clip, *reenactor);
        },
        encode_clip, decode_clip);

    if (deid) result.deid = std::move(*deid);
    return result;
}

std::vector<RunRecord> run_batch(const DatasetManifest& manifest,
                                 const PipelineConfig& config,
                                 BackendRegistry& registry,
                                 const std::string& output_dir) {
    std::vector<RunRecord> records;
    records.reserve(manifest.entries.size());
    const std::string digest = config.digest();

    for (const auto& entry : manifest.entries) {
        RunRecord record;
        record.clip_id = entry.clip_id;
        record.config_digest = digest;

        StageRecord load_stage;
        load_stage.name = "load";
        VideoClip clip;
        bool loaded = false;
        const auto load_start = std::chrono::steady_clock::now();
        try {
            clip = load_clip(entry.media_path);
            clip.clip_id = entry.clip_id;
            load_stage.status = StageStatus::ok;
            loaded = true;
        } catch (const std::exception& e) {
            load_stage.status = StageStatus::failed;
            load_stage.error = e.what();
        }
        load_stage.millis = std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - load_start)
                                .count();
        record.stages.push_back(std::move(load_stage));

        StageRecord save_stage;
        save_stage.name = "save";
        if (!loaded) {
            for (const auto stage :
                 {ArtifactStage::source_frame, ArtifactStage::mask, ArtifactStage::caption,
                  ArtifactStage::dtwin, ArtifactStage::deid_video}) {
                StageRecord skipped;
                skipped.name = to_string(stage);
                record.stages.push_back(std::move(skipped));
            }
        } else {
            auto result = run_deidentify(clip, config, registry);
            for (auto& s : result.record.stages) record.stages.push_back(std::move(s));
            for (auto& w : result.record.warnings) record.warnings.push_back(std::move(w));
            if (result.deid) {
                const auto save_start = std::chrono::steady_clock::now();
                try {
                    const std::string out =
                        (fs::path(output_dir) / "deid" / entry.clip_id).string();
                    save_clip(*result.deid, out);
                    save_stage.status = StageStatus::ok;
                    // relative to the output dir so the record does not depend
                    // on where the batch was written
                    save_stage.artifact_path =
                        (fs::path("deid") / entry.clip_id).string();
                } catch (const std::exception& e) {
                    save_stage.status = StageStatus::failed;
                    save_stage.error = e.what();
                }
                save_stage.millis = std::chrono::duration<double, std::milli>(
                                        std::chrono::steady_clock::now() - save_start)
                                        .count();
            }
        }
        record.stages.push_back(std::move(save_stage));
        records.push_back(std::move(record));
    }
    return records;
}

}  // namespace dtwin
