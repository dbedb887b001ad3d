#pragma once

#include "cascade/adwin.hpp"
#include "cascade/feature_select.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace cascade {

struct HatConfig {
    double delta = 1e-7;         // split confidence
    int grace_period = 200;      // records between split attempts at a leaf
    double tie_threshold = 0.05; // split anyway when the bound drops below this
    double drift_delta = 0.002;  // per-node drift window confidence
    int n_bins = 10;             // equal-width histogram bins over [0, 1]
};

// Confidence radius for the split test: eps = sqrt(R^2 ln(1/delta) / (2n)).
double hoeffding_bound(double range, double delta, std::int64_t n);

struct DriftEvent {
    std::int64_t arrival_index = 0;
    std::string node_path;  // root = "", else 'L'/'R' steps from the root
    enum class Kind { warning, drift } kind = Kind::drift;
};

// Incremental Hoeffding tree with per-node adaptive drift windows. A node
// whose window reaches warning grows a background subtree in parallel; drift
// replaces the node with that subtree (or a fresh leaf). Binary detection is
// this same machinery with a two-class label space.
//
// The tree consumes full-arity feature vectors; each subtree carries the
// feature mask it was grown under, so replacement subtrees can adopt a newer
// mask while older structure keeps its original one.
class HoeffdingAdaptiveTree {
public:
    HoeffdingAdaptiveTree(int n_features, int n_classes, HatConfig cfg);
    HoeffdingAdaptiveTree(int n_features, int n_classes, HatConfig cfg, FeatureMask initial_mask);
    ~HoeffdingAdaptiveTree();
    HoeffdingAdaptiveTree(HoeffdingAdaptiveTree&&) noexcept;
    HoeffdingAdaptiveTree& operator=(HoeffdingAdaptiveTree&&) noexcept;

    int predict(const Eigen::VectorXd& features) const;
    Eigen::VectorXd predict_distribution(const Eigen::VectorXd& features) const;

    std::vector<DriftEvent> learn_one(const Eigen::VectorXd& features, int true_class,
                                      std::int64_t arrival_index);

    // Mask adopted by subtrees created from now on (background trees and
    // drift replacements). Existing nodes keep the mask they were grown with.
    void set_current_mask(FeatureMask mask);
    const FeatureMask& current_mask() const;

    int n_classes() const { return n_classes_; }
    int n_features() const { return n_features_; }
    std::int64_t records_learned() const { return records_learned_; }
    std::int64_t node_count() const;
    std::int64_t split_count() const;

    // Sum of class counts over main-tree leaves (excludes background trees).
    double leaf_count_total() const;

    // Canonical text form of the structure; equal fingerprints mean
    // node-for-node identical trees.
    std::string structure_fingerprint() const;

private:
    struct Node;

    std::unique_ptr<Node> make_leaf() const;
    int leaf_majority(const Node& node) const;
    int subtree_predict(const Node& node, const Eigen::VectorXd& features) const;
    void learn_subtree(Node& node, const Eigen::VectorXd& features, int true_class,
                       std::int64_t arrival_index, bool allow_adaptation,
                       const std::string& path, std::vector<DriftEvent>& events);
    void update_leaf_stats(Node& node, const Eigen::VectorXd& features, int true_class);
    void try_split(Node& node);

    int n_features_ = 0;
    int n_classes_ = 0;
    HatConfig cfg_;
    std::vector<FeatureMask> masks_;
    int current_mask_id_ = 0;
    std::unique_ptr<Node> root_;
    Eigen::VectorXd global_class_counts_;
    std::int64_t records_learned_ = 0;
};

}  // namespace cascade
