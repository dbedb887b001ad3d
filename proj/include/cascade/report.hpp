#pragma once

#include "cascade/pipeline.hpp"

#include <array>
#include <string>
#include <vector>

namespace cascade {

// Everything the table renderer needs; built either from a fresh RunResult
// or re-read from a stored run directory, so re-rendering never recomputes.
struct ReportView {
    std::string dataset;
    std::vector<std::string> class_names;
    MetricReport final_metrics;
    std::array<MetricReport, 4> per_stage;
    std::vector<ClassMetrics> classes;
    std::array<double, 4> stage_seconds{};
    double total_seconds = 0.0;
};

struct RunMeta {
    std::string dataset;
    std::vector<std::string> classes;
    std::string normal_name;
    std::uint64_t seed = 0;
    std::string mode = "single";
    bool normalized = true;
    std::int64_t n_records = 0;
    int n_features = 0;
    std::string prng;
};

ReportView make_view(const std::string& dataset, const LabelSpace& space, const RunResult& result);

// Paper-layout text tables: final results, per-stage results with layer
// annotations, per-class TPR/FAR/instances, per-stage timing.
std::string render_tables(const ReportView& view);

// Machine-readable `name=value` lines; absent metrics omitted. Timing is a
// separate file so metric files stay byte-identical across repeat runs.
std::string machine_metrics_text(const ReportView& view, const StageTallies& tallies,
                                 const TotalTallies& totals);
std::string machine_timing_text(const ReportView& view);
std::string run_meta_text(const RunMeta& meta);

// Writes metrics.txt, timing.txt, run_meta.txt and tables.txt.
void write_run_outputs(const std::string& out_dir, const ReportView& view,
                       const RunResult& result, const RunMeta& meta);

// Rebuilds the view from a stored run directory; throws ConfigError when the
// directory lacks a completed run.
ReportView read_view(const std::string& run_dir);

}  // namespace cascade
