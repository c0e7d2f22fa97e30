// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line; the
// process exits nonzero if any gating criterion fails. Criterion 9 needs real
// model adapters and is informational only.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "dtwin/evaluation.hpp"
#include "dtwin/generation.hpp"
#include "dtwin/pipeline.hpp"
#include "dtwin/report.hpp"
#include "dtwin/source_prep.hpp"
#include "dtwin/synthworld.hpp"
#include "test_util.hpp"

using namespace dtwin;
using testutil::TempDir;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, const char* title, bool pass, const std::string& detail = "") {
    std::printf("criterion %d (%s): %s%s%s\n", criterion, title,
                pass ? "PASS" : "FAIL", detail.empty() ? "" : " - ",
                detail.c_str());
    if (!pass) ++g_failures;
}

double elapsed_s(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Criterion 1: frame selection vs brute-force first-minimum scan.
void criterion_frame_selection() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1001);
    std::uniform_int_distribution<int> length_dist(1, 200);
    std::uniform_real_distribution<double> yaw_dist(-45.0, 45.0);
    std::uniform_real_distribution<double> pitch_dist(-30.0, 30.0);
    std::uniform_real_distribution<double> absent(0.0, 1.0);
    std::uniform_int_distribution<int> duplicate(0, 4);

    class FromPoses final : public PoseDetector {
    public:
        explicit FromPoses(const std::vector<std::optional<HeadPose>>& poses)
            : poses_(poses) {}
        HeadPose estimate(const FrameImage& frame) override {
            const auto& p = poses_.at(frame.frame_index);
            return p ? *p : HeadPose{};
        }

    private:
        const std::vector<std::optional<HeadPose>>& poses_;
    };

    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int length = length_dist(rng);
        std::vector<std::optional<HeadPose>> poses(length);
        for (int i = 0; i < length; ++i) {
            if (absent(rng) < 0.15) continue;
            HeadPose p{yaw_dist(rng), pitch_dist(rng), true};
            // force exact duplicates so tie-breaking is actually exercised
            if (i > 0 && duplicate(rng) == 0 && poses[i - 1]) p = *poses[i - 1];
            poses[i] = p;
        }

        int expected = -1;
        int expected_undetected = 0;
        double best = 0.0;
        for (int i = 0; i < length; ++i) {
            if (!poses[i]) {
                ++expected_undetected;
                continue;
            }
            const double s = poses[i]->yaw * poses[i]->yaw + poses[i]->pitch * poses[i]->pitch;
            if (expected < 0 || s < best) {
                expected = i;
                best = s;
            }
        }

        const auto clip = testutil::trivial_clip(length, 32, 32);
        FromPoses detector(poses);
        if (expected < 0) {
            try {
                select_source_frame(clip, detector);
                report(1, "frame selection oracle", false, "missing NoDetectableFaceError");
                return;
            } catch (const NoDetectableFaceError&) {
            }
        } else {
            const auto got = select_source_frame(clip, detector);
            if (got.frame_index != expected || got.num_undetected != expected_undetected) {
                report(1, "frame selection oracle", false,
                       "mismatch at trial " + std::to_string(trial));
                return;
            }
        }
        ++checked;
    }
    const double secs = elapsed_s(start);
    report(1, "frame selection oracle", checked == 1000 && secs < 5.0,
           std::to_string(checked) + " sequences in " + std::to_string(secs) + "s");
}

// Criterion 2: distance math properties on random vectors.
void criterion_distance_math() {
    std::mt19937_64 rng(1002);
    constexpr double kTol = 1e-9;
    for (int i = 0; i < 10000; ++i) {
        const auto a = testutil::random_embedding(EmbeddingKind::expression, rng);
        const auto b = testutil::random_embedding(EmbeddingKind::expression, rng);
        const auto c = testutil::random_embedding(EmbeddingKind::expression, rng);
        for (const auto metric : {DistanceMetric::cosine, DistanceMetric::euclidean}) {
            const double ab = embedding_distance(a, b, metric);
            if (std::abs(ab - embedding_distance(b, a, metric)) > kTol ||
                embedding_distance(a, a, metric) > kTol || ab < 0.0) {
                report(2, "distance math", false, "symmetry/self-distance violated");
                return;
            }
        }
        const double cos_ab = embedding_distance(a, b, DistanceMetric::cosine);
        if (cos_ab > 2.0 + kTol) {
            report(2, "distance math", false, "cosine out of range");
            return;
        }
        auto scaled = a;
        std::uniform_real_distribution<double> scale(1e-3, 1e3);
        const double alpha = scale(rng);
        for (auto& x : scaled.values) x *= alpha;
        if (std::abs(embedding_distance(scaled, b, DistanceMetric::cosine) - cos_ab) > kTol) {
            report(2, "distance math", false, "cosine scale invariance violated");
            return;
        }
        const double ab_e = embedding_distance(a, b, DistanceMetric::euclidean);
        const double bc_e = embedding_distance(b, c, DistanceMetric::euclidean);
        const double ac_e = embedding_distance(a, c, DistanceMetric::euclidean);
        if (ac_e > ab_e + bc_e + kTol) {
            report(2, "distance math", false, "triangle inequality violated");
            return;
        }
    }
    report(2, "distance math", true, "10000 pairs/triples");
}

bool oracle_inside(const FaceContour& contour, double x, double y) {
    const auto& pts = contour.points;
    for (size_t i = 0; i < pts.size(); ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % pts.size()];
        const double cross = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
        if (cross == 0.0 && x >= std::min(a[0], b[0]) && x <= std::max(a[0], b[0]) &&
            y >= std::min(a[1], b[1]) && y <= std::max(a[1], b[1])) {
            return true;
        }
    }
    bool inside = false;
    for (size_t i = 0; i < pts.size(); ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % pts.size()];
        if ((a[0] > x) != (b[0] > x)) {
            const double y_cross = a[1] + (x - a[0]) * (b[1] - a[1]) / (b[0] - a[0]);
            if (y < y_cross) inside = !inside;
        }
    }
    return inside;
}

// Criterion 3: mask rasterization vs the point-in-polygon oracle.
void criterion_masks() {
    std::mt19937_64 rng(1003);
    std::uniform_int_distribution<int> dims(16, 128);
    std::uniform_int_distribution<int> vertex_count(3, 12);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int w = dims(rng);
        const int h = dims(rng);
        const int n = vertex_count(rng);
        std::vector<std::pair<double, std::array<double, 2>>> with_angle;
        std::uniform_real_distribution<double> radius(2.0, std::min(w, h) / 2.0 - 1.0);
        std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
        for (int i = 0; i < n; ++i) {
            const double a = angle(rng);
            const double r = radius(rng);
            const double x = std::round((w / 2.0 + r * std::cos(a)) * 4.0) / 4.0;
            const double y = std::round((h / 2.0 + r * std::sin(a)) * 4.0) / 4.0;
            with_angle.push_back(
                {a, {std::clamp(x, 0.0, double(w)), std::clamp(y, 0.0, double(h))}});
        }
        std::sort(with_angle.begin(), with_angle.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        FaceContour contour;
        for (const auto& [a, p] : with_angle) contour.points.push_back(p);

        FaceMask mask;
        try {
            mask = build_mask(contour, w, h, 0);
        } catch (const DegenerateContourError&) {
            continue;
        }
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (static_cast<bool>(mask.at(x, y)) !=
                    oracle_inside(contour, x + 0.5, y + 0.5)) {
                    report(3, "mask rasterization", false,
                           "pixel mismatch at trial " + std::to_string(trial));
                    return;
                }
            }
        }

        size_t previous = 0;
        const FaceMask* last = nullptr;
        FaceMask m_prev;
        for (const int d : {0, 1, 2, 5}) {
            const auto dilated = build_mask(contour, w, h, d);
            if (dilated.area() < previous) {
                report(3, "mask rasterization", false, "dilation not monotone");
                return;
            }
            if (last) {
                for (size_t i = 0; i < m_prev.bits.size(); ++i) {
                    if (m_prev.bits[i] && !dilated.bits[i]) {
                        report(3, "mask rasterization", false, "dilation lost a pixel");
                        return;
                    }
                }
            }
            previous = dilated.area();
            m_prev = dilated;
            last = &m_prev;
        }
        ++checked;
    }
    report(3, "mask rasterization", checked > 50,
           std::to_string(checked) + " polygons checked");
}

// Criterion 4: identity/motion decoupling over the full synthetic pipeline.
void criterion_decoupling() {
    const auto start = std::chrono::steady_clock::now();
    TempDir tmp("accept_decouple");
    const std::vector<BehaviorTag> behaviors = {
        BehaviorTag::gaze_variation, BehaviorTag::expression_variation,
        BehaviorTag::speech_head_motion, BehaviorTag::rapid_pose_change};
    constexpr int kIdentities = 10;
    constexpr int kFrames = 50;
    constexpr double kTol = synth::kQuantStep + 1e-12;

    PipelineConfig config;
    config.cache_dir = (tmp.path() / "cache").string();
    config.params.seed = 2024;

    for (int i = 0; i < kIdentities; ++i) {
        for (const auto behavior : behaviors) {
            const auto traj = synth::make_trajectory(behavior, kFrames, 5000 + i);
            const auto clip = synth::render_clip(traj, 64, 64, 25.0,
                                                 "acc" + std::to_string(i) + "_" +
                                                     to_string(behavior));
            auto result = run_deidentify(clip, config, default_registry());
            if (!result.deid || !result.record.ok()) {
                report(4, "identity/motion decoupling", false,
                       "pipeline failed on " + clip.clip_id);
                return;
            }
            std::optional<synth::IdentityLatent> twin_identity;
            for (int t = 0; t < kFrames; ++t) {
                const auto decoded = synth::decode_latents(result.deid->frames[t]);
                if (!decoded) {
                    report(4, "identity/motion decoupling", false, "undecodable frame");
                    return;
                }
                if (!twin_identity) twin_identity = decoded->first;
                const auto want_motion = synth::quantize(traj.motion[t]);
                bool ok = true;
                for (int k = 0; k < synth::kIdentityLatentDim; ++k) {
                    ok &= std::abs(decoded->first.z[k] - twin_identity->z[k]) <= kTol;
                }
                ok &= std::abs(decoded->second.yaw - want_motion.yaw) <=
                      kTol * 2.0 * synth::kMaxYawDeg;
                ok &= std::abs(decoded->second.pitch - want_motion.pitch) <=
                      kTol * 2.0 * synth::kMaxPitchDeg;
                for (int k = 0; k < synth::kExpressionLatentDim; ++k) {
                    ok &= std::abs(decoded->second.expression[k] -
                                   want_motion.expression[k]) <= kTol;
                }
                if (!ok) {
                    report(4, "identity/motion decoupling", false,
                           "latent drift in " + clip.clip_id + " frame " +
                               std::to_string(t));
                    return;
                }
            }
        }
    }
    const double secs = elapsed_s(start);
    report(4, "identity/motion decoupling", secs < 120.0,
           "40 clips x 50 frames in " + std::to_string(secs) + "s");
}

// Criteria 5 and 6 share one evaluated dataset.
void criterion_metric_exactness_and_direction() {
    TempDir tmp("accept_metrics");
    PipelineConfig config;
    config.cache_dir = (tmp.path() / "cache").string();
    config.params.seed = 77;

    auto& registry = default_registry();
    auto cropper = registry.make_face_cropper("synthetic");
    auto id_embedder = registry.make_identity_embedder("synthetic");
    auto expr_embedder = registry.make_expression_embedder("synthetic");

    constexpr double kExprBound = 4.0 * synth::kQuantStep;  // sqrt(16)/255

    bool pass5 = true;
    std::string detail5;
    double deid_cos_sum = 0.0, consist_cos_sum = 0.0, expr_cos_sum = 0.0;
    int videos = 0;

    for (int i = 0; i < 6 && pass5; ++i) {
        const auto behavior = static_cast<BehaviorTag>(i % 4);
        const auto traj = synth::make_trajectory(behavior, 30, 9000 + i);
        const auto source = synth::render_clip(traj, 64, 64, 25.0, "m" + std::to_string(i));
        auto result = run_deidentify(source, config, default_registry());
        if (!result.deid) {
            pass5 = false;
            detail5 = "pipeline failed";
            break;
        }
        const auto obs = extract_observations(source, *result.deid, *cropper,
                                              *id_embedder, *expr_embedder);
        const auto timelines = all_series(obs);

        // independent oracle: distances recomputed from the decoded latents
        const auto twin = synth::decode_latents(result.deid->frames[0]);
        if (!twin) {
            pass5 = false;
            detail5 = "undecodable twin";
            break;
        }
        for (size_t t = 0; t < obs.size() && pass5; ++t) {
            const auto src = synth::decode_latents(source.frames[t]);
            const auto out = synth::decode_latents(result.deid->frames[t]);
            if (!src || !out) {
                pass5 = false;
                detail5 = "undecodable frame";
                break;
            }
            const auto src_id = synth::identity_embedding(src->first);
            const auto out_id = synth::identity_embedding(out->first);
            const auto ref_id = synth::identity_embedding(twin->first);
            const auto src_ex = synth::expression_embedding(src->second);
            const auto out_ex = synth::expression_embedding(out->second);

            struct Check {
                MetricKind kind;
                DistanceMetric distance;
                double oracle;
            };
            const std::vector<Check> checks = {
                {MetricKind::deid_level, DistanceMetric::cosine,
                 embedding_distance(src_id, out_id, DistanceMetric::cosine)},
                {MetricKind::deid_level, DistanceMetric::euclidean,
                 embedding_distance(src_id, out_id, DistanceMetric::euclidean)},
                {MetricKind::identity_consistency, DistanceMetric::cosine,
                 embedding_distance(out_id, ref_id, DistanceMetric::cosine)},
                {MetricKind::identity_consistency, DistanceMetric::euclidean,
                 embedding_distance(out_id, ref_id, DistanceMetric::euclidean)},
                {MetricKind::expression_preservation, DistanceMetric::cosine,
                 embedding_distance(src_ex, out_ex, DistanceMetric::cosine)},
                {MetricKind::expression_preservation, DistanceMetric::euclidean,
                 embedding_distance(src_ex, out_ex, DistanceMetric::euclidean)},
            };
            for (const auto& check : checks) {
                double got = -1.0;
                for (const auto& timeline : timelines) {
                    if (timeline.kind == check.kind && timeline.distance == check.distance) {
                        if (!timeline.values[t]) {
                            pass5 = false;
                            detail5 = "unexpected skip";
                            break;
                        }
                        got = *timeline.values[t];
                    }
                }
                if (!pass5) break;
                if (std::abs(got - check.oracle) > 1e-9) {
                    pass5 = false;
                    detail5 = "series deviates from latent oracle";
                    break;
                }
            }
        }

        const auto summary = summarize_video(timelines);
        const auto& consist_e =
            summary.cells.at({MetricKind::identity_consistency, DistanceMetric::euclidean});
        const auto& expr_e =
            summary.cells.at({MetricKind::expression_preservation, DistanceMetric::euclidean});
        const auto& deid_e =
            summary.cells.at({MetricKind::deid_level, DistanceMetric::euclidean});
        if (consist_e.mean != 0.0 || consist_e.variance != 0.0) {
            pass5 = false;
            detail5 = "identity consistency not identically 0";
        }
        if (expr_e.mean > kExprBound) {
            pass5 = false;
            detail5 = "expression error above the quantization bound";
        }
        if (deid_e.mean < synth::kMinIdentityDistance) {
            pass5 = false;
            detail5 = "de-identification below the enforced floor";
        }

        deid_cos_sum += summary.cells.at({MetricKind::deid_level, DistanceMetric::cosine}).mean;
        consist_cos_sum +=
            summary.cells.at({MetricKind::identity_consistency, DistanceMetric::cosine}).mean;
        expr_cos_sum +=
            summary.cells.at({MetricKind::expression_preservation, DistanceMetric::cosine}).mean;
        ++videos;
    }
    report(5, "metric exactness on synthetic runs", pass5, detail5);

    const double deid_mean = deid_cos_sum / videos;
    const double consist_mean = consist_cos_sum / videos;
    const double expr_mean = expr_cos_sum / videos;
    const bool pass6 = videos > 0 && deid_mean >= 10.0 * consist_mean &&
                       deid_mean >= 10.0 * expr_mean && deid_mean > 0.0;
    std::ostringstream detail6;
    detail6 << "deid=" << deid_mean << " consist=" << consist_mean
            << " expr=" << expr_mean;
    report(6, "direction of merit", pass6, detail6.str());
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool trees_identical(const fs::path& a, const fs::path& b, std::string& diff) {
    // run_timings.json is the wall-clock sidecar and is the one output that is
    // allowed to differ between identical runs
    const auto keep = [](const fs::directory_entry& e) {
        return e.is_regular_file() && e.path().filename() != "run_timings.json";
    };
    std::vector<std::string> rel_a, rel_b;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (keep(e)) rel_a.push_back(fs::relative(e.path(), a).string());
    }
    for (const auto& e : fs::recursive_directory_iterator(b)) {
        if (keep(e)) rel_b.push_back(fs::relative(e.path(), b).string());
    }
    std::sort(rel_a.begin(), rel_a.end());
    std::sort(rel_b.begin(), rel_b.end());
    if (rel_a != rel_b) {
        diff = "file lists differ";
        return false;
    }
    for (const auto& rel : rel_a) {
        if (slurp(a / rel) != slurp(b / rel)) {
            diff = "content differs: " + rel;
            return false;
        }
    }
    return true;
}

// Criterion 7: byte-level determinism of two full run+evaluate passes.
void criterion_determinism() {
    TempDir tmp("accept_determinism");
    const auto manifest = cmd_synth_dataset(
        {BehaviorTag::gaze_variation, BehaviorTag::rapid_pose_change}, 2, 12, 31,
        (tmp.path() / "data").string());

    // identical config includes an identical cache dir; the second pass is
    // served from cache and must still emit byte-identical outputs
    auto pass_once = [&](const std::string& tag) {
        PipelineConfig config;
        config.cache_dir = (tmp.path() / "cache").string();
        config.params.seed = 55;
        const auto out = (tmp.path() / ("out_" + tag)).string();
        if (cmd_run(config, manifest, out) != 0) return std::string();
        cmd_evaluate(config, manifest, out, (tmp.path() / ("report_" + tag)).string());
        return out;
    };

    const auto out_a = pass_once("a");
    const auto out_b = pass_once("b");
    if (out_a.empty() || out_b.empty()) {
        report(7, "determinism", false, "run failed");
        return;
    }
    std::string diff;
    bool pass = trees_identical(out_a, out_b, diff) &&
                trees_identical(tmp.path() / "report_a", tmp.path() / "report_b", diff);
    report(7, "determinism", pass, diff);
}

// Criterion 8: dataset summary equals recomputation from the per-video CSVs.
void criterion_aggregation_audit() {
    TempDir tmp("accept_audit");
    const auto manifest = cmd_synth_dataset(
        {BehaviorTag::gaze_variation, BehaviorTag::expression_variation,
         BehaviorTag::speech_head_motion},
        3, 15, 71, (tmp.path() / "data").string());
    PipelineConfig config;
    config.cache_dir = (tmp.path() / "cache").string();
    config.params.seed = 99;
    const auto out = (tmp.path() / "out").string();
    if (cmd_run(config, manifest, out) != 0) {
        report(8, "aggregation audit", false, "run failed");
        return;
    }
    const auto bundle =
        cmd_evaluate(config, manifest, out, (tmp.path() / "report").string());
    if (bundle.per_video_csvs.size() != 9 || bundle.summary_csv.empty()) {
        report(8, "aggregation audit", false, "missing evaluation outputs");
        return;
    }

    // recompute all 12 cells (3 criteria x 2 distances x mean/variance)
    constexpr int kCols[6] = {1, 2, 3, 4, 5, 6};  // metric columns in the video CSV
    double mean_of_means[6] = {}, mean_of_vars[6] = {};
    for (const auto& csv : bundle.per_video_csvs) {
        std::ifstream in(csv);
        std::string line;
        std::getline(in, line);  // header
        std::vector<std::vector<double>> cols(6);
        while (std::getline(in, line)) {
            std::stringstream ss(line);
            std::string field;
            std::vector<std::string> fields;
            while (std::getline(ss, field, ',')) fields.push_back(field);
            for (int c = 0; c < 6; ++c) {
                if (!fields[kCols[c]].empty()) {
                    cols[c].push_back(std::stod(fields[kCols[c]]));
                }
            }
        }
        for (int c = 0; c < 6; ++c) {
            double sum = 0.0;
            for (double v : cols[c]) sum += v;
            const double mean = sum / cols[c].size();
            double var = 0.0;
            for (double v : cols[c]) var += (v - mean) * (v - mean);
            var /= cols[c].size();
            mean_of_means[c] += mean / bundle.per_video_csvs.size();
            mean_of_vars[c] += var / bundle.per_video_csvs.size();
        }
    }

    // summary rows: cosine then euclidean, deid/consist/expr order;
    // video CSV columns interleave distance within each metric
    const std::map<std::pair<std::string, std::string>, int> column_of = {
        {{"cosine", "deid_level"}, 0},      {{"euclidean", "deid_level"}, 1},
        {{"cosine", "identity_consistency"}, 2},
        {{"euclidean", "identity_consistency"}, 3},
        {{"cosine", "expression_preservation"}, 4},
        {{"euclidean", "expression_preservation"}, 5},
    };

    std::ifstream in(bundle.summary_csv);
    std::string line;
    std::getline(in, line);  // header
    int rows = 0;
    bool pass = true;
    std::string detail;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::vector<std::string> fields;
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        const auto it = column_of.find({fields[0], fields[1]});
        if (it == column_of.end()) {
            pass = false;
            detail = "unexpected summary row";
            break;
        }
        const int c = it->second;
        if (std::abs(std::stod(fields[2]) - mean_of_means[c]) > 1e-12 ||
            std::abs(std::stod(fields[3]) - mean_of_vars[c]) > 1e-12) {
            pass = false;
            detail = "summary cell deviates from recomputation";
            break;
        }
        ++rows;
    }
    if (pass && rows != 6) {
        pass = false;
        detail = "expected 6 summary rows, got " + std::to_string(rows);
    }
    report(8, "aggregation audit", pass, detail);
}

// Criterion 9: needs real model adapters and reference data; informational.
void criterion_real_adapters() {
    auto& registry = default_registry();
    const bool have_real = registry.has_inpainter("diffusion") &&
                           registry.has_identity_embedder("facenet");
    if (!have_real) {
        std::printf("criterion 9 (real-adapter integration): SKIP - "
                    "no real adapters registered; not gating\n");
        return;
    }
    std::printf("criterion 9 (real-adapter integration): SKIP - "
                "reference corpus not available; not gating\n");
}

}  // namespace

int main() {
    criterion_frame_selection();
    criterion_distance_math();
    criterion_masks();
    criterion_decoupling();
    criterion_metric_exactness_and_direction();
    criterion_determinism();
    criterion_aggregation_audit();
    criterion_real_adapters();

    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all gating criteria passed\n");
    return 0;
}
