#pragma once

#include "cascade/types.hpp"

namespace cascade {

// Combines the stage counters into run totals:
//   TP_t = TP' + TP''   FP_t = FP' + FP''   TN_t = TN'   FN_t = FN' + FN''
TotalTallies aggregate_totals(const StageTallies& tallies);

// ACC/Prec/TPR/FAR/F1 from binary totals, as percentages.
//   FAR = 100 * fp / (tp + fp), the complement of precision.
// Metrics with a zero denominator come back absent with a reason.
MetricReport compute_metrics(const TotalTallies& totals);

// Per-class TPR/FAR/instance counts from a KxK confusion matrix
// (rows = true class, cols = predicted class).
std::vector<ClassMetrics> per_class_report(const CountMatrix& confusion, const LabelSpace& space);

// Machine-readable serialization: `prefix.name=value` lines, absent metrics
// omitted. Values use enough digits to round-trip.
std::string metric_kv_lines(const std::string& prefix, const MetricReport& report);
std::string class_kv_lines(const std::vector<ClassMetrics>& rows);

// Paper-style table cell: two decimals, integer part zero-padded to two
// digits ("03.24"); "--" when absent.
std::string format_percent_cell(const MetricValue& v);

}  // namespace cascade
