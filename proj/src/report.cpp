#include "dtwin/report.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "dtwin/synthworld.hpp"

namespace fs = std::filesystem;

namespace dtwin {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string cell(const std::optional<double>& v) {
    return v ? fmt(*v) : std::string();
}

const MetricTimeline& find_timeline(const std::array<MetricTimeline, 6>& timelines,
                                    MetricKind kind, DistanceMetric distance) {
    for (const auto& t : timelines) {
        if (t.kind == kind && t.distance == distance) return t;
    }
    throw Error("timeline set is missing a metric/distance combination");
}

}  // namespace

void write_video_csv(const std::array<MetricTimeline, 6>& timelines,
                     const std::vector<FramePairObservation>& observations,
                     const std::string& path) {
    const auto& deid_cos = find_timeline(timelines, MetricKind::deid_level, DistanceMetric::cosine);
    const auto& deid_euc = find_timeline(timelines, MetricKind::deid_level, DistanceMetric::euclidean);
    const auto& con_cos = find_timeline(timelines, MetricKind::identity_consistency, DistanceMetric::cosine);
    const auto& con_euc = find_timeline(timelines, MetricKind::identity_consistency, DistanceMetric::euclidean);
    const auto& exp_cos = find_timeline(timelines, MetricKind::expression_preservation, DistanceMetric::cosine);
    const auto& exp_euc = find_timeline(timelines, MetricKind::expression_preservation, DistanceMetric::euclidean);

    const size_t length = deid_cos.values.size();
    if (observations.size() != length) {
        throw Error("observation list and timelines disagree on length");
    }

    std::ofstream out(path);
    if (!out) throw WriteFailureError("cannot write " + path);
    out << "frame_index,deid_cosine,deid_euclid,consist_cosine,consist_euclid,"
           "expr_cosine,expr_euclid,skip_reason\n";
    for (size_t t = 0; t < length; ++t) {
        out << t << ',' << cell(deid_cos.values[t]) << ',' << cell(deid_euc.values[t])
            << ',' << cell(con_cos.values[t]) << ',' << cell(con_euc.values[t]) << ','
            << cell(exp_cos.values[t]) << ',' << cell(exp_euc.values[t]) << ','
            << to_string(observations[t].skip) << "\n";
    }
    if (!out) throw WriteFailureError("short write to " + path);
}

void write_summary_csv(const DatasetSummary& summary, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw WriteFailureError("cannot write " + path);
    out << "distance,criterion,mean,variance,num_videos\n";
    for (const auto distance : {DistanceMetric::cosine, DistanceMetric::euclidean}) {
        for (const auto kind :
             {MetricKind::deid_level, MetricKind::identity_consistency,
              MetricKind::expression_preservation}) {
            const auto it = summary.cells.find({kind, distance});
            if (it == summary.cells.end()) {
                throw Error("dataset summary is missing a metric/distance cell");
            }
            out << to_string(distance) << ',' << to_string(kind) << ','
                << fmt(it->second.mean) << ',' << fmt(it->second.variance) << ','
                << summary.num_videos << "\n";
        }
    }
    if (!out) throw WriteFailureError("short write to " + path);
}

void plot_timeline(const std::vector<MetricTimeline>& timelines,
                   const std::string& out_path) {
    if (timelines.empty()) throw Error("no timelines to plot");
    const size_t length = timelines.front().values.size();
    if (length == 0) throw Error("timelines are empty");
    for (const auto& t : timelines) {
        if (t.values.size() != length) throw Error("timelines differ in length");
    }

    constexpr int kWidth = 720, kHeight = 400, kMargin = 50;
    cv::Mat canvas(kHeight, kWidth, CV_8UC3, cv::Scalar(255, 255, 255));

    double y_max = 1e-6;
    for (const auto& t : timelines) {
        for (const auto& v : t.values) {
            if (v) y_max = std::max(y_max, *v);
        }
    }
    y_max *= 1.05;

    const auto x_of = [&](size_t t) {
        if (length == 1) return kWidth / 2;
        return kMargin + static_cast<int>((kWidth - 2.0 * kMargin) * t / (length - 1));
    };
    const auto y_of = [&](double v) {
        return kHeight - kMargin -
               static_cast<int>((kHeight - 2.0 * kMargin) * v / y_max);
    };

    cv::line(canvas, {kMargin, kHeight - kMargin}, {kWidth - kMargin, kHeight - kMargin},
             cv::Scalar(0, 0, 0));
    cv::line(canvas, {kMargin, kMargin}, {kMargin, kHeight - kMargin},
             cv::Scalar(0, 0, 0));
    cv::putText(canvas, "frame", {kWidth / 2 - 20, kHeight - 12},
                cv::FONT_HERSHEY_SIMPLEX, 0.45, cv::Scalar(0, 0, 0));
    cv::putText(canvas, fmt(y_max).substr(0, 6), {4, kMargin + 4},
                cv::FONT_HERSHEY_SIMPLEX, 0.4, cv::Scalar(0, 0, 0));

    const auto color_of = [](MetricKind kind) {
        switch (kind) {
            case MetricKind::deid_level: return cv::Scalar(180, 90, 30);
            case MetricKind::identity_consistency: return cv::Scalar(60, 150, 60);
            case MetricKind::expression_preservation: return cv::Scalar(40, 40, 200);
        }
        return cv::Scalar(0, 0, 0);
    };

    int legend_y = 18;
    for (const auto& t : timelines) {
        const auto color = color_of(t.kind);
        std::string label = std::string(to_string(t.kind)) + " (" +
                            to_string(t.distance) + ")";
        cv::putText(canvas, label, {kMargin + 4, legend_y}, cv::FONT_HERSHEY_SIMPLEX,
                    0.4, color);
        legend_y += 16;

        for (size_t i = 1; i < length; ++i) {
            if (!t.values[i - 1] || !t.values[i]) continue;  // gap at skips
            cv::line(canvas, {x_of(i - 1), y_of(*t.values[i - 1])},
                     {x_of(i), y_of(*t.values[i])}, color, 1, cv::LINE_8);
        }
        for (size_t i = 0; i < length; ++i) {
            if (!t.values[i]) continue;
            cv::circle(canvas, {x_of(i), y_of(*t.values[i])}, 1, color, cv::FILLED);
        }
    }

    const fs::path p(out_path);
    std::error_code ec;
    if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
    if (!cv::imwrite(out_path, canvas)) {
        throw WriteFailureError("failed to write plot " + out_path);
    }
}

int cmd_run(const PipelineConfig& config, const std::string& manifest_path,
            const std::string& output_dir) {
    DatasetManifest manifest;
    try {
        config.check_resolvable(default_registry());
        manifest = load_manifest(manifest_path);
    } catch (const std::exception& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    }

    auto records = run_batch(manifest, config, default_registry(), output_dir);

    std::error_code ec;
    fs::create_directories(output_dir, ec);
    nlohmann::json records_json = nlohmann::json::array();
    nlohmann::json timings_json = nlohmann::json::array();
    bool all_ok = true;
    for (const auto& record : records) {
        records_json.push_back(record.to_json(false));
        timings_json.push_back(record.to_json(true));
        if (!record.ok()) all_ok = false;
    }
    {
        std::ofstream out(fs::path(output_dir) / "run_records.json");
        out << records_json.dump(2) << "\n";
    }
    {
        std::ofstream out(fs::path(output_dir) / "run_timings.json");
        out << timings_json.dump(2) << "\n";
    }
    return all_ok ? 0 : 1;
}

ReportBundle cmd_evaluate(const PipelineConfig& config,
                          const std::string& manifest_path,
                          const std::string& deid_dir,
                          const std::string& report_dir,
                          PlotDistance plot_distance) {
    config.check_resolvable(default_registry());
    const DatasetManifest manifest = load_manifest(manifest_path);

    std::error_code ec;
    fs::create_directories(report_dir, ec);

    auto cropper = default_registry().make_face_cropper(config.face_cropper);
    auto id_embedder = default_registry().make_identity_embedder(config.identity_embedder);
    auto expr_embedder =
        default_registry().make_expression_embedder(config.expression_embedder);

    ReportBundle bundle;
    std::vector<VideoSummary> summaries;
    for (const auto& entry : manifest.entries) {
        const fs::path deid_path = fs::path(deid_dir) / "deid" / entry.clip_id;
        if (!fs::exists(deid_path)) {
            bundle.missing_outputs.push_back(entry.clip_id);
            continue;
        }
        try {
            const VideoClip source = load_clip(entry.media_path);
            const VideoClip deid = load_clip(deid_path.string());
            const auto observations =
                extract_observations(source, deid, *cropper, *id_embedder, *expr_embedder);
            const auto timelines = all_series(observations);

            auto summary = summarize_video(timelines);
            summary.clip_id = entry.clip_id;

            const std::string csv =
                (fs::path(report_dir) / (entry.clip_id + "_metrics.csv")).string();
            write_video_csv(timelines, observations, csv);
            bundle.per_video_csvs.push_back(csv);

            for (const auto distance : {DistanceMetric::cosine, DistanceMetric::euclidean}) {
                if (plot_distance != PlotDistance::both &&
                    (distance == DistanceMetric::cosine) !=
                        (plot_distance == PlotDistance::cosine)) {
                    continue;
                }
                std::vector<MetricTimeline> family;
                for (const auto& t : timelines) {
                    if (t.distance == distance) family.push_back(t);
                }
                const std::string plot =
                    (fs::path(report_dir) /
                     (entry.clip_id + "_timeline_" + to_string(distance) + ".png"))
                        .string();
                plot_timeline(family, plot);
                bundle.plot_paths.push_back(plot);
            }
            summaries.push_back(std::move(summary));
        } catch (const std::exception& e) {
            std::cerr << "evaluation failed for clip '" << entry.clip_id
                      << "': " << e.what() << "\n";
            bundle.missing_outputs.push_back(entry.clip_id);
        }
    }

    if (!summaries.empty()) {
        const auto dataset = summarize_dataset(summaries);
        bundle.summary_csv = (fs::path(report_dir) / "summary.csv").string();
        write_summary_csv(dataset, bundle.summary_csv);
    }

    // persisted paths are relative to the report dir so the file does not
    // depend on where the report was written
    const auto relativize = [&](const std::vector<std::string>& paths) {
        std::vector<std::string> out;
        for (const auto& p : paths) {
            out.push_back(fs::relative(p, report_dir).string());
        }
        return out;
    };
    nlohmann::json report{
        {"per_video_csvs", relativize(bundle.per_video_csvs)},
        {"summary_csv",
         bundle.summary_csv.empty()
             ? std::string()
             : fs::relative(bundle.summary_csv, report_dir).string()},
        {"plots", relativize(bundle.plot_paths)},
        {"missing_outputs", bundle.missing_outputs}};
    std::ofstream out(fs::path(report_dir) / "report.json");
    out << report.dump(2) << "\n";
    return bundle;
}

std::string cmd_synth_dataset(const std::vector<BehaviorTag>& behaviors,
                              int identities, int num_frames, std::uint64_t seed,
                              const std::string& out_dir, int width, int height,
                              double fps) {
    if (identities < 1) throw Error("identities must be at least 1");
    if (num_frames < 1) throw Error("num_frames must be at least 1");
    if (behaviors.empty()) throw Error("at least one behavior is required");

    DatasetManifest manifest;
    manifest.dataset_name = "synthetic";
    for (int i = 0; i < identities; ++i) {
        for (const auto behavior : behaviors) {
            const auto trajectory =
                synth::make_trajectory(behavior, num_frames, seed + static_cast<std::uint64_t>(i));
            char id_buf[64];
            std::snprintf(id_buf, sizeof(id_buf), "id%03d_%s", i, to_string(behavior));
            const std::string clip_id = id_buf;
            const std::string media =
                (fs::path(out_dir) / "media" / clip_id).string();
            save_clip(synth::render_clip(trajectory, width, height, fps, clip_id), media);

            char subject[32];
            std::snprintf(subject, sizeof(subject), "subject%03d", i);
            manifest.entries.push_back({clip_id, media, subject, behavior});
        }
    }
    const std::string manifest_path = (fs::path(out_dir) / "manifest.tsv").string();
    save_manifest(manifest, manifest_path);
    return manifest_path;
}

}  // namespace dtwin
