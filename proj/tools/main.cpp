#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dtwin/report.hpp"

namespace {

using dtwin::PipelineConfig;

// Flat key=value config file; '#' starts a comment line.
void apply_config_file(PipelineConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw dtwin::Error("cannot read config file " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw dtwin::Error("config line " + std::to_string(line_no) +
                               ": expected key=value");
        }
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "pose_detector") config.pose_detector = value;
        else if (key == "contour_detector") config.contour_detector = value;
        else if (key == "captioner") config.captioner = value;
        else if (key == "inpainter") config.inpainter = value;
        else if (key == "reenactor") config.reenactor = value;
        else if (key == "face_cropper") config.face_cropper = value;
        else if (key == "identity_embedder") config.identity_embedder = value;
        else if (key == "expression_embedder") config.expression_embedder = value;
        else if (key == "seed") config.params.seed = std::stoull(value);
        else if (key == "prompt_prefix") config.params.prompt_prefix = value;
        else if (key == "max_retries") config.params.max_retries = std::stoi(value);
        else if (key == "dilation_px") config.dilation_px = std::stoi(value);
        else if (key == "cache_dir") config.cache_dir = value;
        else if (key == "eval_cosine") config.eval_cosine = value == "1" || value == "true";
        else if (key == "eval_euclidean") config.eval_euclidean = value == "1" || value == "true";
        else {
            throw dtwin::Error("config line " + std::to_string(line_no) +
                               ": unknown key '" + key + "'");
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Video face de-identification by re-enacting an inpainted twin"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand name

    std::string config_path;
    PipelineConfig config;
    std::string cache_dir_flag;
    bool seed_set = false;
    std::uint64_t seed_flag = 0;

    app.add_option("--config", config_path, "Flat key=value config file");
    app.add_option("--cache-dir", cache_dir_flag,
                   "Artifact cache root (or DTWIN_CACHE_DIR)");
    app.add_option("--seed", seed_flag, "Generation seed")
        ->each([&](const std::string&) { seed_set = true; });

    std::string captioner_flag, inpainter_flag, reenactor_flag, pose_flag, contour_flag,
        cropper_flag, id_embedder_flag, expr_embedder_flag;
    app.add_option("--captioner", captioner_flag, "Captioning backend name");
    app.add_option("--inpainter", inpainter_flag, "Inpainting backend name");
    app.add_option("--reenactor", reenactor_flag, "Re-enactment backend name");
    app.add_option("--pose-detector", pose_flag, "Pose detection backend name");
    app.add_option("--contour-detector", contour_flag, "Contour detection backend name");
    app.add_option("--face-cropper", cropper_flag, "Face cropping backend name");
    app.add_option("--identity-embedder", id_embedder_flag, "Identity embedding backend");
    app.add_option("--expression-embedder", expr_embedder_flag,
                   "Expression embedding backend");

    int dilation_flag = -2;
    app.add_option("--dilation-px", dilation_flag,
                   "Mask dilation in pixels (default: 3% of face bbox diagonal)");
    std::string prefix_flag;
    bool prefix_set = false;
    app.add_option("--prompt-prefix", prefix_flag, "Prefix for the inpainting prompt")
        ->each([&](const std::string&) { prefix_set = true; });
    int retries_flag = -1;
    app.add_option("--max-retries", retries_flag, "Seed-incremented inpainting retries");

    auto* run = app.add_subcommand("run", "De-identify every clip in a manifest");
    std::string run_manifest, run_out;
    run->add_option("--manifest", run_manifest, "Dataset manifest (TSV)")->required();
    run->add_option("--out", run_out, "Output directory")->required();

    auto* evaluate = app.add_subcommand("evaluate", "Metrics and reports for outputs");
    std::string eval_manifest, eval_deid, eval_report;
    std::string distance_flag = "both";
    evaluate->add_option("--manifest", eval_manifest, "Source dataset manifest")->required();
    evaluate->add_option("--deid-dir", eval_deid, "Directory produced by `run`")->required();
    evaluate->add_option("--report-dir", eval_report, "Where to write reports")->required();
    evaluate->add_option("--distance", distance_flag, "cosine, euclidean, or both")
        ->check(CLI::IsMember({"cosine", "euclidean", "both"}));

    auto* synth = app.add_subcommand("synth-dataset", "Render a synthetic avatar dataset");
    std::string synth_out;
    int synth_identities = 2, synth_frames = 50, synth_width = 64, synth_height = 64;
    double synth_fps = 25.0;
    std::uint64_t synth_seed = 1;
    std::vector<std::string> synth_behaviors = {
        "gaze_variation", "expression_variation", "speech_head_motion",
        "rapid_pose_change"};
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--identities", synth_identities, "Number of avatar identities");
    synth->add_option("--frames", synth_frames, "Frames per clip");
    synth->add_option("--seed", synth_seed, "Dataset seed");
    synth->add_option("--width", synth_width, "Frame width");
    synth->add_option("--height", synth_height, "Frame height");
    synth->add_option("--fps", synth_fps, "Frame rate");
    synth->add_option("--behaviors", synth_behaviors, "Behavior tags to render");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) apply_config_file(config, config_path);

        if (!cache_dir_flag.empty()) {
            config.cache_dir = cache_dir_flag;
        } else if (config.cache_dir.empty()) {
            if (const char* env = std::getenv("DTWIN_CACHE_DIR")) config.cache_dir = env;
        }
        if (seed_set) config.params.seed = seed_flag;
        if (prefix_set) config.params.prompt_prefix = prefix_flag;
        if (retries_flag >= 0) config.params.max_retries = retries_flag;
        if (dilation_flag >= -1) config.dilation_px = dilation_flag;
        if (!captioner_flag.empty()) config.captioner = captioner_flag;
        if (!inpainter_flag.empty()) config.inpainter = inpainter_flag;
        if (!reenactor_flag.empty()) config.reenactor = reenactor_flag;
        if (!pose_flag.empty()) config.pose_detector = pose_flag;
        if (!contour_flag.empty()) config.contour_detector = contour_flag;
        if (!cropper_flag.empty()) config.face_cropper = cropper_flag;
        if (!id_embedder_flag.empty()) config.identity_embedder = id_embedder_flag;
        if (!expr_embedder_flag.empty()) config.expression_embedder = expr_embedder_flag;

        if (run->parsed()) {
            return dtwin::cmd_run(config, run_manifest, run_out);
        }
        if (evaluate->parsed()) {
            const auto plot_distance = distance_flag == "cosine"
                                           ? dtwin::PlotDistance::cosine
                                           : distance_flag == "euclidean"
                                                 ? dtwin::PlotDistance::euclidean
                                                 : dtwin::PlotDistance::both;
            const auto bundle = dtwin::cmd_evaluate(config, eval_manifest, eval_deid,
                                                    eval_report, plot_distance);
            for (const auto& missing : bundle.missing_outputs) {
                std::cerr << "missing de-identified output for clip '" << missing << "'\n";
            }
            std::cout << bundle.summary_csv << "\n";
            return bundle.missing_outputs.empty() ? 0 : 1;
        }
        if (synth->parsed()) {
            std::vector<dtwin::BehaviorTag> behaviors;
            for (const auto& name : synth_behaviors) {
                const auto tag = dtwin::behavior_tag_from_string(name);
                if (!tag) throw dtwin::Error("unknown behavior tag '" + name + "'");
                behaviors.push_back(*tag);
            }
            const auto manifest = dtwin::cmd_synth_dataset(
                behaviors, synth_identities, synth_frames, synth_seed, synth_out,
                synth_width, synth_height, synth_fps);
            std::cout << manifest << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
