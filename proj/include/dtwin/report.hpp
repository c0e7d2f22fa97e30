#pragma once

#include <string>
#include <vector>

#include "dtwin/evaluation.hpp"
#include "dtwin/media_io.hpp"
#include "dtwin/pipeline.hpp"

namespace dtwin {

enum class PlotDistance { cosine, euclidean, both };

/// Paths of everything one evaluation run emitted.
struct ReportBundle {
    std::vector<std::string> per_video_csvs;
    std::string summary_csv;
    std::vector<std::string> plot_paths;
    std::vector<std::string> missing_outputs;  // clip_ids without a de-identified video
};

/// Per-frame metrics CSV, one row per frame, empty cells for skipped frames.
void write_video_csv(const std::array<MetricTimeline, 6>& timelines,
                     const std::vector<FramePairObservation>& observations,
                     const std::string& path);

/// Dataset summary CSV: three criteria x two distance families, mean and
/// variance columns.
void write_summary_csv(const DatasetSummary& summary, const std::string& path);

/// One chart per distance family: frame index on x, one labeled curve per
/// metric, gaps at skipped frames.
void plot_timeline(const std::vector<MetricTimeline>& timelines,
                   const std::string& out_path);

/// `run` subcommand: batch the pipeline over a manifest.
/// Exit status: 0 all clips ok, 1 some clip failed, 2 configuration error.
int cmd_run(const PipelineConfig& config, const std::string& manifest_path,
            const std::string& output_dir);

/// `evaluate` subcommand: metrics, summary, and plots for every manifest
/// entry with a de-identified video under <deid_dir>/deid/<clip_id>.
ReportBundle cmd_evaluate(const PipelineConfig& config,
                          const std::string& manifest_path,
                          const std::string& deid_dir,
                          const std::string& report_dir,
                          PlotDistance plot_distance = PlotDistance::both);

/// `synth-dataset` subcommand: renders identities x behaviors clips plus a
/// manifest; returns the manifest path.
std::string cmd_synth_dataset(const std::vector<BehaviorTag>& behaviors,
                              int identities, int num_frames, std::uint64_t seed,
                              const std::string& out_dir, int width = 64,
                              int height = 64, double fps = 25.0);

}  // namespace dtwin
