#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dtwin/evaluation.hpp"
#include "dtwin/generation.hpp"
#include "dtwin/pipeline.hpp"
#include "dtwin/report.hpp"
#include "dtwin/source_prep.hpp"
#include "dtwin/synthworld.hpp"

namespace py = pybind11;
using namespace dtwin;

namespace {

FrameImage frame_from_array(const py::array_t<float, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 3 || arr.shape(2) != 3) {
        throw std::invalid_argument("expected an HxWx3 float array");
    }
    FrameImage frame(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
    std::copy(arr.data(), arr.data() + arr.size(), frame.pixels.begin());
    return frame;
}

py::array_t<float> frame_to_array(const FrameImage& frame) {
    py::array_t<float> arr({frame.height, frame.width, 3});
    std::copy(frame.pixels.begin(), frame.pixels.end(), arr.mutable_data());
    return arr;
}

EmbeddingVector embedding_from_array(const py::array_t<double>& arr, EmbeddingKind kind) {
    EmbeddingVector v;
    v.kind = kind;
    v.values.assign(arr.data(), arr.data() + arr.size());
    return v;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Video face de-identification: twin generation, re-enactment, metrics";

    py::register_exception<Error>(m, "DtwinError");

    m.def(
        "embedding_distance",
        [](const py::array_t<double>& a, const py::array_t<double>& b,
           const std::string& metric, const std::string& kind) {
            const auto k = kind == "expression" ? EmbeddingKind::expression
                                                : EmbeddingKind::identity;
            const auto d = metric == "euclidean" ? DistanceMetric::euclidean
                                                 : DistanceMetric::cosine;
            return embedding_distance(embedding_from_array(a, k),
                                      embedding_from_array(b, k), d);
        },
        py::arg("a"), py::arg("b"), py::arg("metric") = "cosine",
        py::arg("kind") = "identity");

    m.def("l2_normalize", [](const py::array_t<double>& a) {
        auto v = embedding_from_array(a, EmbeddingKind::identity);
        const auto out = l2_normalize(v);
        return py::array_t<double>(py::cast(out.values));
    });

    m.def(
        "build_mask",
        [](const std::vector<std::array<double, 2>>& points, int width, int height,
           int dilation_px) {
            FaceContour contour{points};
            const auto mask = build_mask(contour, width, height, dilation_px);
            py::array_t<std::uint8_t> arr({mask.height, mask.width});
            std::copy(mask.bits.begin(), mask.bits.end(), arr.mutable_data());
            return arr;
        },
        py::arg("points"), py::arg("width"), py::arg("height"), py::arg("dilation_px") = 0);

    m.def(
        "render_frame",
        [](const std::vector<double>& identity, double yaw, double pitch,
           const std::vector<double>& expression, int width, int height) {
            if (identity.size() != synth::kIdentityLatentDim ||
                expression.size() != synth::kExpressionLatentDim) {
                throw std::invalid_argument("identity needs 8 entries, expression 4");
            }
            synth::IdentityLatent id;
            std::copy(identity.begin(), identity.end(), id.z.begin());
            synth::MotionLatent motion;
            motion.yaw = yaw;
            motion.pitch = pitch;
            std::copy(expression.begin(), expression.end(), motion.expression.begin());
            return frame_to_array(synth::render_frame(id, motion, width, height));
        },
        py::arg("identity"), py::arg("yaw"), py::arg("pitch"), py::arg("expression"),
        py::arg("width") = 64, py::arg("height") = 64);

    m.def("decode_latents", [](const py::array_t<float, py::array::c_style | py::array::forcecast>& arr)
              -> py::object {
        const auto decoded = synth::decode_latents(frame_from_array(arr));
        if (!decoded) return py::none();
        py::dict out;
        out["identity"] = std::vector<double>(decoded->first.z.begin(), decoded->first.z.end());
        out["yaw"] = decoded->second.yaw;
        out["pitch"] = decoded->second.pitch;
        out["expression"] = std::vector<double>(decoded->second.expression.begin(),
                                                decoded->second.expression.end());
        return out;
    });

    m.def(
        "synth_dataset",
        [](const std::string& out_dir, int identities, int frames, std::uint64_t seed,
           int width, int height) {
            const std::vector<BehaviorTag> behaviors{
                BehaviorTag::gaze_variation, BehaviorTag::expression_variation,
                BehaviorTag::speech_head_motion, BehaviorTag::rapid_pose_change};
            return cmd_synth_dataset(behaviors, identities, frames, seed, out_dir,
                                     width, height);
        },
        py::arg("out_dir"), py::arg("identities") = 2, py::arg("frames") = 25,
        py::arg("seed") = 1, py::arg("width") = 64, py::arg("height") = 64);

    m.def(
        "run",
        [](const std::string& manifest, const std::string& out_dir,
           std::uint64_t seed, const std::string& cache_dir) {
            PipelineConfig config;
            config.params.seed = seed;
            config.cache_dir = cache_dir;
            return cmd_run(config, manifest, out_dir);
        },
        py::arg("manifest"), py::arg("out_dir"), py::arg("seed") = 0,
        py::arg("cache_dir") = "");

    m.def(
        "evaluate",
        [](const std::string& manifest, const std::string& deid_dir,
           const std::string& report_dir) {
            PipelineConfig config;
            const auto bundle = cmd_evaluate(config, manifest, deid_dir, report_dir);
            py::dict out;
            out["per_video_csvs"] = bundle.per_video_csvs;
            out["summary_csv"] = bundle.summary_csv;
            out["plots"] = bundle.plot_paths;
            out["missing_outputs"] = bundle.missing_outputs;
            return out;
        },
        py::arg("manifest"), py::arg("deid_dir"), py::arg("report_dir"));
}
