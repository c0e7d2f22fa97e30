#include "dtwin/evaluation.hpp"

namespace dtwin {

const char* to_string(SkipReason reason) {
    switch (reason) {
        case SkipReason::none: return "none";
        case SkipReason::no_face_source: return "no_face_source";
        case SkipReason::no_face_deid: return "no_face_deid";
    }
    return "";
}

const char* to_string(MetricKind kind) {
    switch (kind) {
        case MetricKind::deid_level: return "deid_level";
        case MetricKind::identity_consistency: return "identity_consistency";
        case MetricKind::expression_preservation: return "expression_preservation";
    }
    return "";
}

std::vector<FramePairObservation> extract_observations(const VideoClip& source,
                                                       const VideoClip& deid,
                                                       FaceCropper& cropper,
                                                       Embedder& identity_embedder,
                                                       Embedder& expression_embedder) {
    if (source.frames.size() != deid.frames.size()) {
        throw LengthMismatchError("source has " + std::to_string(source.frames.size()) +
                                  " frames but de-identified clip has " +
                                  std::to_string(deid.frames.size()));
    }
    std::vector<FramePairObservation> observations;
    observations.reserve(source.frames.size());
    for (size_t t = 0; t < source.frames.size(); ++t) {
        FramePairObservation obs;
        obs.frame_index = static_cast<int>(t);
        const auto source_face = cropper.crop(source.frames[t]);
        if (!source_face) {
            obs.skip = SkipReason::no_face_source;
            observations.push_back(std::move(obs));
            continue;
        }
        const auto deid_face = cropper.crop(deid.frames[t]);
        if (!deid_face) {
            obs.skip = SkipReason::no_face_deid;
            observations.push_back(std::move(obs));
            continue;
        }
        obs.source_identity = identity_embedder.embed(*source_face);
        obs.deid_identity = identity_embedder.embed(*deid_face);
        obs.source_expression = expression_embedder.embed(*source_face);
        obs.deid_expression = expression_embedder.embed(*deid_face);
        check_embedding(*obs.source_identity);
        check_embedding(*obs.deid_identity);
        check_embedding(*obs.source_expression);
        check_embedding(*obs.deid_expression);
        observations.push_back(std::move(obs));
    }
    return observations;
}

MetricTimeline deid_level_series(const std::vector<FramePairObservation>& obs,
                                 DistanceMetric distance) {
    MetricTimeline timeline{MetricKind::deid_level, distance, {}};
    timeline.values.reserve(obs.size());
    for (const auto& o : obs) {
        if (o.skip != SkipReason::none) {
            timeline.values.emplace_back(std::nullopt);
        } else {
            timeline.values.emplace_back(
                embedding_distance(*o.source_identity, *o.deid_identity, distance));
        }
    }
    return timeline;
}

MetricTimeline identity_consistency_series(const std::vector<FramePairObservation>& obs,
                                           DistanceMetric distance) {
    const EmbeddingVector* reference = nullptr;
    for (const auto& o : obs) {
        if (o.skip == SkipReason::none) {
            reference = &*o.deid_identity;
            break;
        }
    }
    if (reference == nullptr) {
        throw AllFramesSkippedError("no frame with faces in both clips");
    }
    MetricTimeline timeline{MetricKind::identity_consistency, distance, {}};
    timeline.values.reserve(obs.size());
    for (const auto& o : obs) {
        if (o.skip != SkipReason::none) {
            timeline.values.emplace_back(std::nullopt);
        } else {
            timeline.values.emplace_back(
                embedding_distance(*o.deid_identity, *reference, distance));
        }
    }
    return timeline;
}

MetricTimeline expression_preservation_series(const std::vector<FramePairObservation>& obs,
                                              DistanceMetric distance) {
    MetricTimeline timeline{MetricKind::expression_preservation, distance, {}};
    timeline.values.reserve(obs.size());
    for (const auto& o : obs) {
        if (o.skip != SkipReason::none) {
            timeline.values.emplace_back(std::nullopt);
        } else {
            timeline.values.emplace_back(
                embedding_distance(*o.source_expression, *o.deid_expression, distance));
        }
    }
    return timeline;
}

std::array<MetricTimeline, 6> all_series(const std::vector<FramePairObservation>& obs) {
    return {deid_level_series(obs, DistanceMetric::cosine),
            deid_level_series(obs, DistanceMetric::euclidean),
            identity_consistency_series(obs, DistanceMetric::cosine),
            identity_consistency_series(obs, DistanceMetric::euclidean),
            expression_preservation_series(obs, DistanceMetric::cosine),
            expression_preservation_series(obs, DistanceMetric::euclidean)};
}

VideoSummary summarize_video(const std::array<MetricTimeline, 6>& timelines) {
    const size_t length = timelines.front().values.size();
    for (const auto& t : timelines) {
        if (t.values.size() != length) {
            throw Error("timelines disagree on length");
        }
        for (size_t i = 0; i < length; ++i) {
            if (t.values[i].has_value() != timelines.front().values[i].has_value()) {
                throw Error("timelines disagree on skip pattern");
            }
        }
    }

    VideoSummary summary;
    for (size_t i = 0; i < length; ++i) {
        if (timelines.front().values[i]) {
            ++summary.frames_evaluated;
        } else {
            ++summary.frames_skipped;
        }
    }
    if (summary.frames_evaluated == 0) {
        throw NoEvaluableFramesError("every frame of the pair was skipped");
    }

    for (const auto& t : timelines) {
        double sum = 0.0;
        for (const auto& v : t.values) {
            if (v) sum += *v;
        }
        const double mean = sum / summary.frames_evaluated;
        double sq = 0.0;
        for (const auto& v : t.values) {
            if (v) sq += (*v - mean) * (*v - mean);
        }
        summary.cells[{t.kind, t.distance}] =
            CellStats{mean, sq / summary.frames_evaluated};
    }
    return summary;
}

DatasetSummary summarize_dataset(const std::vector<VideoSummary>& summaries) {
    if (summaries.empty()) {
        throw EmptyInputError("cannot aggregate an empty set of video summaries");
    }
    DatasetSummary dataset;
    dataset.num_videos = static_cast<int>(summaries.size());
    for (const auto& summary : summaries) {
        for (const auto& [cell, stats] : summary.cells) {
            auto& agg = dataset.cells[cell];
            agg.mean += stats.mean;
            agg.variance += stats.variance;
        }
    }
    for (auto& [cell, stats] : dataset.cells) {
        stats.mean /= dataset.num_videos;
        stats.variance /= dataset.num_videos;
    }
    return dataset;
}

}  // namespace dtwin
