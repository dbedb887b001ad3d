#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cascade {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// One network flow: feature vector, ground truth, position in the stream.
struct FlowRecord {
    Eigen::VectorXd features;
    int true_class = 0;
    std::int64_t arrival_index = 0;
};

// Ordered class catalogue. Exactly one class is "normal"; the rest are attacks.
class LabelSpace {
public:
    LabelSpace() = default;
    LabelSpace(std::vector<std::string> class_names, int normal_id);

    int size() const { return static_cast<int>(names_.size()); }
    int normal_id() const { return normal_id_; }
    const std::string& name(int id) const { return names_.at(static_cast<std::size_t>(id)); }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<int>& attack_ids() const { return attack_ids_; }

    bool is_attack(int id) const { return id != normal_id_; }
    bool valid_id(int id) const { return id >= 0 && id < size(); }

    // Returns the id for a class name, or -1 when unknown.
    int id_of(const std::string& name) const;

private:
    std::vector<std::string> names_;
    int normal_id_ = 0;
    std::vector<int> attack_ids_;
};

// Stage identifiers with the logical layer each stage runs on.
enum class Layer { Edge, Fog, Cloud };

constexpr Layer layer_of_stage(int stage) {
    return stage == 1 ? Layer::Edge : stage == 2 ? Layer::Fog : Layer::Cloud;
}

const char* layer_name(Layer layer);

// Final prediction for one record plus the stages it traversed.
struct Verdict {
    std::int64_t record_ref = 0;
    int predicted_class = 0;
    std::vector<int> path;  // starts at 1; one of [1,3], [1,2,3], [1,2,4], [1,2,4,3]
    int terminal_stage = 0;

    // True when the record was demoted at stage 4 and re-entered stage 3.
    bool demoted() const {
        return path.size() == 4;  // the only demotion path is [1,2,4,3]
    }
};

bool is_admissible_path(const std::vector<int>& path);

// Primed (stage 3) and double-primed (stage 4) confusion counters plus
// per-stage confusion matrices.
struct StageTallies {
    std::int64_t tp_prime = 0, fp_prime = 0, tn_prime = 0, fn_prime = 0;
    std::int64_t tp_dprime = 0, fp_dprime = 0, fn_dprime = 0;

    // stage1: 2x2 over {normal=0, attack=1}; stage2/stage3: KxK over the full
    // label space; stage4: one 2x2 per attack class, rows = is-target truth,
    // cols = {demoted=0, confirmed=1}. All are [true][predicted].
    CountMatrix stage1{CountMatrix::Zero(2, 2)};
    CountMatrix stage2;
    CountMatrix stage3;
    std::map<int, CountMatrix> stage4;
};

// Run totals combined from the stage counters.
struct TotalTallies {
    std::int64_t tp_t = 0, fp_t = 0, tn_t = 0, fn_t = 0;

    std::int64_t total() const { return tp_t + fp_t + tn_t + fn_t; }
};

// A single percentage that may be undefined (zero denominator). Undefined
// values are reported as absent with a reason, never coerced to 0 or 100.
struct MetricValue {
    std::optional<double> percent;
    std::string note;  // reason when absent, empty otherwise

    bool defined() const { return percent.has_value(); }
    double value() const { return *percent; }
};

MetricValue defined_metric(double percent);
MetricValue absent_metric(std::string reason);

struct MetricReport {
    MetricValue acc, prec, tpr, far, f1;
};

struct ClassMetrics {
    int class_id = 0;
    std::string class_name;
    MetricValue tpr;
    MetricValue far;
    std::int64_t instances = 0;  // records truly of this class
};

}  // namespace cascade
