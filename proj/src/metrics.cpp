#include "cascade/metrics.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace cascade {

TotalTallies aggregate_totals(const StageTallies& t) {
    TotalTallies out;
    out.tp_t = t.tp_prime + t.tp_dprime;
    out.fp_t = t.fp_prime + t.fp_dprime;
    out.tn_t = t.tn_prime;
    out.fn_t = t.fn_prime + t.fn_dprime;
    return out;
}

namespace {

MetricValue ratio_pct(std::int64_t num, std::int64_t den, const char* reason) {
    if (den == 0) return absent_metric(reason);
    return defined_metric(100.0 * static_cast<double>(num) / static_cast<double>(den));
}

}  // namespace

MetricReport compute_metrics(const TotalTallies& t) {
    MetricReport r;
    r.acc = ratio_pct(t.tp_t + t.tn_t, t.total(), "no instances");
    r.prec = ratio_pct(t.tp_t, t.tp_t + t.fp_t, "no positive predictions");
    r.tpr = ratio_pct(t.tp_t, t.tp_t + t.fn_t, "no positive instances");
    r.far = ratio_pct(t.fp_t, t.tp_t + t.fp_t, "no positive predictions");
    if (!r.prec.defined() || !r.tpr.defined()) {
        r.f1 = absent_metric("precision or TPR undefined");
    } else if (r.prec.value() + r.tpr.value() == 0.0) {
        r.f1 = absent_metric("precision and TPR both zero");
    } else {
        r.f1 = defined_metric(2.0 * r.prec.value() * r.tpr.value() / (r.prec.value() + r.tpr.value()));
    }
    return r;
}

std::vector<ClassMetrics> per_class_report(const CountMatrix& confusion, const LabelSpace& space) {
    const int k = space.size();
    if (confusion.rows() != k || confusion.cols() != k) {
        throw std::invalid_argument("per_class_report: confusion matrix does not cover the label space");
    }
    std::vector<ClassMetrics> rows;
    rows.reserve(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        ClassMetrics m;
        m.class_id = c;
        m.class_name = space.name(c);
        const std::int64_t tp = confusion(c, c);
        const std::int64_t fn = confusion.row(c).sum() - tp;
        const std::int64_t fp = confusion.col(c).sum() - tp;
        m.instances = tp + fn;
        m.tpr = ratio_pct(tp, tp + fn, "no instances of this class");
        m.far = ratio_pct(fp, tp + fp, "class never predicted");
        rows.push_back(std::move(m));
    }
    return rows;
}

namespace {

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

void emit(std::ostringstream& out, const std::string& key, const MetricValue& v) {
    if (v.defined()) out << key << "=" << format_value(v.value()) << "\n";
}

}  // namespace

std::string metric_kv_lines(const std::string& prefix, const MetricReport& report) {
    std::ostringstream out;
    emit(out, prefix + ".acc", report.acc);
    emit(out, prefix + ".prec", report.prec);
    emit(out, prefix + ".tpr", report.tpr);
    emit(out, prefix + ".far", report.far);
    emit(out, prefix + ".f1", report.f1);
    return out.str();
}

std::string class_kv_lines(const std::vector<ClassMetrics>& rows) {
    std::ostringstream out;
    for (const auto& row : rows) {
        const std::string prefix = "class." + row.class_name;
        emit(out, prefix + ".tpr", row.tpr);
        emit(out, prefix + ".far", row.far);
        out << prefix << ".instances=" << row.instances << "\n";
    }
    return out.str();
}

std::string format_percent_cell(const MetricValue& v) {
    if (!v.defined()) return "--";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%05.2f", v.value());
    return buf;
}

}  // namespace cascade
