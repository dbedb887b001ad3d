#include "cascade/report.hpp"

#include "cascade/errors.hpp"
#include "cascade/kv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cascade {

namespace {

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string seconds_cell(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

void metric_row(std::ostringstream& out, const std::string& head, std::size_t head_width,
                const MetricReport& r) {
    out << pad(head, head_width) << pad(format_percent_cell(r.acc), 8)
        << pad(format_percent_cell(r.prec), 8) << pad(format_percent_cell(r.tpr), 8)
        << pad(format_percent_cell(r.far), 8) << format_percent_cell(r.f1) << "\n";
}

bool rising_profile(const std::array<MetricReport, 4>& per_stage,
                    MetricValue MetricReport::* member) {
    double prev = -1.0;
    for (int s = 0; s < 3; ++s) {  // stages 1..3; stage 4 typically dips
        const MetricValue& v = per_stage[static_cast<std::size_t>(s)].*member;
        if (!v.defined()) return false;
        if (v.value() < prev) return false;
        prev = v.value();
    }
    return true;
}

}  // namespace

ReportView make_view(const std::string& dataset, const LabelSpace& space, const RunResult& result) {
    ReportView view;
    view.dataset = dataset;
    view.class_names = space.names();
    view.final_metrics = result.final_metrics;
    view.per_stage = result.per_stage_metrics;
    view.classes = result.per_class;
    view.stage_seconds = result.stage_seconds;
    view.total_seconds = result.total_seconds;
    return view;
}

std::string render_tables(const ReportView& view) {
    std::ostringstream out;
    const std::string rule(68, '=');

    out << "=== Final results " << rule.substr(18) << "\n";
    out << pad("Dataset", 17) << pad("ACC%", 8) << pad("Prec%", 8) << pad("TPR%", 8)
        << pad("FAR%", 8) << "F1%" << "\n";
    metric_row(out, view.dataset, 17, view.final_metrics);
    out << "\n";

    out << "=== Results by stage " << rule.substr(21) << "\n";
    out << pad("Stage", 7) << pad("Layer", 7) << pad("ACC%", 8) << pad("Prec%", 8)
        << pad("TPR%", 8) << pad("FAR%", 8) << "F1%" << "\n";
    for (int s = 1; s <= 4; ++s) {
        const std::string head = std::to_string(s);
        out << pad(head, 7) << pad(layer_name(layer_of_stage(s)), 7);
        const MetricReport& r = view.per_stage[static_cast<std::size_t>(s - 1)];
        out << pad(format_percent_cell(r.acc), 8) << pad(format_percent_cell(r.prec), 8)
            << pad(format_percent_cell(r.tpr), 8) << pad(format_percent_cell(r.far), 8)
            << format_percent_cell(r.f1) << "\n";
    }
    const bool rising = rising_profile(view.per_stage, &MetricReport::acc) &&
                        rising_profile(view.per_stage, &MetricReport::prec) &&
                        rising_profile(view.per_stage, &MetricReport::tpr);
    out << "note: ACC/Prec/TPR rising from stage 1 through stage 3: " << (rising ? "yes" : "no")
        << "\n\n";

    out << "=== Results by traffic class " << rule.substr(29) << "\n";
    out << pad("Class", 17) << pad("TPR%", 8) << pad("FAR%", 8) << "Instances" << "\n";
    for (const auto& row : view.classes) {
        out << pad(row.class_name, 17) << pad(format_percent_cell(row.tpr), 8)
            << pad(format_percent_cell(row.far), 8) << row.instances << "\n";
    }
    out << "\n";

    out << "=== Time taken to process data " << rule.substr(31) << "\n";
    out << pad("Stages", 13) << "Seconds" << "\n";
    out << pad("Total Time", 13) << seconds_cell(view.total_seconds) << "\n";
    for (int s = 1; s <= 4; ++s) {
        out << pad("Stage " + std::to_string(s), 13)
            << seconds_cell(view.stage_seconds[static_cast<std::size_t>(s - 1)]) << "\n";
    }
    return out.str();
}

std::string machine_metrics_text(const ReportView& view, const StageTallies& tallies,
                                 const TotalTallies& totals) {
    std::ostringstream out;
    out << metric_kv_lines("final", view.final_metrics);
    for (int s = 1; s <= 4; ++s) {
        out << metric_kv_lines("stage" + std::to_string(s),
                               view.per_stage[static_cast<std::size_t>(s - 1)]);
    }
    out << class_kv_lines(view.classes);
    out << "totals.tp=" << totals.tp_t << "\n";
    out << "totals.fp=" << totals.fp_t << "\n";
    out << "totals.tn=" << totals.tn_t << "\n";
    out << "totals.fn=" << totals.fn_t << "\n";
    out << "tallies.tp_prime=" << tallies.tp_prime << "\n";
    out << "tallies.fp_prime=" << tallies.fp_prime << "\n";
    out << "tallies.tn_prime=" << tallies.tn_prime << "\n";
    out << "tallies.fn_prime=" << tallies.fn_prime << "\n";
    out << "tallies.tp_dprime=" << tallies.tp_dprime << "\n";
    out << "tallies.fp_dprime=" << tallies.fp_dprime << "\n";
    out << "tallies.fn_dprime=" << tallies.fn_dprime << "\n";
    return out.str();
}

std::string machine_timing_text(const ReportView& view) {
    char buf[64];
    std::ostringstream out;
    std::snprintf(buf, sizeof(buf), "total.seconds=%.6f\n", view.total_seconds);
    out << buf;
    for (int s = 1; s <= 4; ++s) {
        std::snprintf(buf, sizeof(buf), "stage%d.seconds=%.6f\n", s,
                      view.stage_seconds[static_cast<std::size_t>(s - 1)]);
        out << buf;
    }
    return out.str();
}

std::string run_meta_text(const RunMeta& meta) {
    std::ostringstream out;
    out << "dataset=" << meta.dataset << "\n";
    out << "classes=";
    for (std::size_t i = 0; i < meta.classes.size(); ++i) {
        if (i) out << ",";
        out << meta.classes[i];
    }
    out << "\n";
    out << "normal=" << meta.normal_name << "\n";
    out << "seed=" << meta.seed << "\n";
    out << "mode=" << meta.mode << "\n";
    out << "normalize=" << (meta.normalized ? "on" : "off") << "\n";
    out << "records=" << meta.n_records << "\n";
    out << "features=" << meta.n_features << "\n";
    out << "prng=" << meta.prng << "\n";
    return out.str();
}

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("missing run file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

MetricValue parse_metric(const KvFile& kv, const std::string& key) {
    if (!kv.has(key)) return absent_metric("not recorded");
    return defined_metric(kv.get_double(key, 0.0));
}

MetricReport parse_report(const KvFile& kv, const std::string& prefix) {
    MetricReport r;
    r.acc = parse_metric(kv, prefix + ".acc");
    r.prec = parse_metric(kv, prefix + ".prec");
    r.tpr = parse_metric(kv, prefix + ".tpr");
    r.far = parse_metric(kv, prefix + ".far");
    r.f1 = parse_metric(kv, prefix + ".f1");
    return r;
}

}  // namespace

void write_run_outputs(const std::string& out_dir, const ReportView& view,
                       const RunResult& result, const RunMeta& meta) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    write_file((dir / "metrics.txt").string(),
               machine_metrics_text(view, result.stage_tallies, result.totals));
    write_file((dir / "timing.txt").string(), machine_timing_text(view));
    write_file((dir / "run_meta.txt").string(), run_meta_text(meta));
    write_file((dir / "tables.txt").string(), render_tables(view));
}

ReportView read_view(const std::string& run_dir) {
    const std::filesystem::path dir(run_dir);
    const KvFile meta = parse_kv_text(read_file((dir / "run_meta.txt").string()), "run_meta.txt");
    const KvFile metrics = parse_kv_text(read_file((dir / "metrics.txt").string()), "metrics.txt");
    const KvFile timing = parse_kv_text(read_file((dir / "timing.txt").string()), "timing.txt");

    ReportView view;
    view.dataset = meta.get("dataset", "run");
    for (const auto& name : split(meta.get("classes"), ',')) {
        if (!trim(name).empty()) view.class_names.push_back(trim(name));
    }
    if (view.class_names.empty()) {
        throw ConfigError(run_dir + ": run_meta.txt has no classes");
    }
    view.final_metrics = parse_report(metrics, "final");
    for (int s = 1; s <= 4; ++s) {
        view.per_stage[static_cast<std::size_t>(s - 1)] =
            parse_report(metrics, "stage" + std::to_string(s));
    }
    int class_id = 0;
    for (const auto& name : view.class_names) {
        ClassMetrics row;
        row.class_id = class_id++;
        row.class_name = name;
        row.tpr = parse_metric(metrics, "class." + name + ".tpr");
        row.far = parse_metric(metrics, "class." + name + ".far");
        row.instances = metrics.get_int("class." + name + ".instances", 0);
        view.classes.push_back(std::move(row));
    }
    view.total_seconds = timing.get_double("total.seconds", 0.0);
    for (int s = 1; s <= 4; ++s) {
        view.stage_seconds[static_cast<std::size_t>(s - 1)] =
            timing.get_double("stage" + std::to_string(s) + ".seconds", 0.0);
    }
    return view;
}

}  // namespace cascade
