#include "cascade/stream_tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace cascade {

double hoeffding_bound(double range, double delta, std::int64_t n) {
    if (n < 1) throw std::invalid_argument("hoeffding_bound: n must be >= 1");
    if (delta <= 0.0 || delta >= 1.0) throw std::invalid_argument("hoeffding_bound: delta must be in (0, 1)");
    if (range <= 0.0) throw std::invalid_argument("hoeffding_bound: range must be positive");
    return std::sqrt(range * range * std::log(1.0 / delta) / (2.0 * static_cast<double>(n)));
}

struct HoeffdingAdaptiveTree::Node {
    bool leaf = true;
    int split_feature = -1;  // original feature index
    double threshold = 0.0;
    std::unique_ptr<Node> left, right;

    Eigen::VectorXd class_counts;
    Eigen::MatrixXd bin_counts;  // (mask_arity * n_bins) x K, leaves only
    std::int64_t n_at_last_eval = 0;

    AdaptiveErrorWindow window;
    std::unique_ptr<Node> background;
    int mask_id = 0;

    explicit Node(double drift_delta) : window(drift_delta) {}
};

HoeffdingAdaptiveTree::HoeffdingAdaptiveTree(int n_features, int n_classes, HatConfig cfg)
    : HoeffdingAdaptiveTree(n_features, n_classes, cfg, identity_mask(n_features)) {}

HoeffdingAdaptiveTree::HoeffdingAdaptiveTree(int n_features, int n_classes, HatConfig cfg,
                                             FeatureMask initial_mask)
    : n_features_(n_features), n_classes_(n_classes), cfg_(cfg) {
    if (n_features < 1) throw std::invalid_argument("HoeffdingAdaptiveTree: n_features must be >= 1");
    if (n_classes < 2) throw std::invalid_argument("HoeffdingAdaptiveTree: n_classes must be >= 2");
    if (cfg_.n_bins < 2) throw std::invalid_argument("HoeffdingAdaptiveTree: n_bins must be >= 2");
    if (initial_mask.selected.empty()) throw std::invalid_argument("HoeffdingAdaptiveTree: empty mask");
    masks_.push_back(std::move(initial_mask));
    current_mask_id_ = 0;
    global_class_counts_ = Eigen::VectorXd::Zero(n_classes_);
    root_ = make_leaf();
}

HoeffdingAdaptiveTree::~HoeffdingAdaptiveTree() = default;
HoeffdingAdaptiveTree::HoeffdingAdaptiveTree(HoeffdingAdaptiveTree&&) noexcept = default;
HoeffdingAdaptiveTree& HoeffdingAdaptiveTree::operator=(HoeffdingAdaptiveTree&&) noexcept = default;

void HoeffdingAdaptiveTree::set_current_mask(FeatureMask mask) {
    if (mask.selected.empty()) throw std::invalid_argument("set_current_mask: empty mask");
    for (const int idx : mask.selected) {
        if (idx < 0 || idx >= n_features_) {
            throw std::invalid_argument("set_current_mask: index out of range");
        }
    }
    masks_.push_back(std::move(mask));
    current_mask_id_ = static_cast<int>(masks_.size()) - 1;
}

const FeatureMask& HoeffdingAdaptiveTree::current_mask() const {
    return masks_[static_cast<std::size_t>(current_mask_id_)];
}

std::unique_ptr<HoeffdingAdaptiveTree::Node> HoeffdingAdaptiveTree::make_leaf() const {
    auto node = std::make_unique<Node>(cfg_.drift_delta);
    node->mask_id = current_mask_id_;
    node->class_counts = Eigen::VectorXd::Zero(n_classes_);
    const auto arity = static_cast<Eigen::Index>(masks_[static_cast<std::size_t>(current_mask_id_)].selected.size());
    node->bin_counts = Eigen::MatrixXd::Zero(arity * cfg_.n_bins, n_classes_);
    return node;
}

int HoeffdingAdaptiveTree::leaf_majority(const Node& node) const {
    if (node.class_counts.sum() > 0.0) {
        Eigen::Index best = 0;
        node.class_counts.maxCoeff(&best);
        return static_cast<int>(best);
    }
    if (records_learned_ > 0) {
        Eigen::Index best = 0;
        global_class_counts_.maxCoeff(&best);
        return static_cast<int>(best);
    }
    return 0;
}

int HoeffdingAdaptiveTree::subtree_predict(const Node& node, const Eigen::VectorXd& features) const {
    const Node* cur = &node;
    while (!cur->leaf) {
        cur = features[cur->split_feature] <= cur->threshold ? cur->left.get() : cur->right.get();
    }
    return leaf_majority(*cur);
}

int HoeffdingAdaptiveTree::predict(const Eigen::VectorXd& features) const {
    if (features.size() != n_features_) {
        throw std::invalid_argument("predict: feature arity mismatch");
    }
    return subtree_predict(*root_, features);
}

Eigen::VectorXd HoeffdingAdaptiveTree::predict_distribution(const Eigen::VectorXd& features) const {
    if (features.size() != n_features_) {
        throw std::invalid_argument("predict_distribution: feature arity mismatch");
    }
    const Node* cur = root_.get();
    while (!cur->leaf) {
        cur = features[cur->split_feature] <= cur->threshold ? cur->left.get() : cur->right.get();
    }
    const double total = cur->class_counts.sum();
    return (cur->class_counts.array() + 1.0) / (total + static_cast<double>(n_classes_));
}

void HoeffdingAdaptiveTree::update_leaf_stats(Node& node, const Eigen::VectorXd& features,
                                              int true_class) {
    node.class_counts[true_class] += 1.0;
    const auto& selected = masks_[static_cast<std::size_t>(node.mask_id)].selected;
    for (std::size_t j = 0; j < selected.size(); ++j) {
        const double v = features[selected[j]];
        const int bin = std::clamp(static_cast<int>(v * cfg_.n_bins), 0, cfg_.n_bins - 1);
        node.bin_counts(static_cast<Eigen::Index>(j) * cfg_.n_bins + bin, true_class) += 1.0;
    }
}

namespace {

double entropy_bits(const Eigen::VectorXd& counts, double total) {
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (Eigen::Index c = 0; c < counts.size(); ++c) {
        if (counts[c] > 0.0) {
            const double p = counts[c] / total;
            h -= p * std::log2(p);
        }
    }
    return h;
}

}  // namespace

void HoeffdingAdaptiveTree::try_split(Node& node) {
    const double n = node.class_counts.sum();
    if (n - static_cast<double>(node.n_at_last_eval) < static_cast<double>(cfg_.grace_period)) {
        return;
    }
    node.n_at_last_eval = static_cast<std::int64_t>(n);

    const double h0 = entropy_bits(node.class_counts, n);
    const auto& selected = masks_[static_cast<std::size_t>(node.mask_id)].selected;

    // Per feature: merit = best information gain over its bin-edge
    // thresholds. The split test compares the two best features.
    double best_gain = 0.0, second_gain = 0.0;
    int best_local = -1, best_bin = -1;
    Eigen::VectorXd best_left_counts;

    Eigen::VectorXd running(n_classes_);
    for (std::size_t j = 0; j < selected.size(); ++j) {
        double feature_gain = 0.0;
        int feature_bin = -1;
        Eigen::VectorXd feature_left;
        running.setZero();
        for (int b = 0; b < cfg_.n_bins - 1; ++b) {
            running += node.bin_counts.row(static_cast<Eigen::Index>(j) * cfg_.n_bins + b).transpose();
            const double nl = running.sum();
            const double nr = n - nl;
            if (nl <= 0.0 || nr <= 0.0) continue;
            const Eigen::VectorXd right = node.class_counts - running;
            const double gain =
                h0 - (nl / n) * entropy_bits(running, nl) - (nr / n) * entropy_bits(right, nr);
            if (gain > feature_gain) {  // ties keep the lower threshold
                feature_gain = gain;
                feature_bin = b;
                feature_left = running;
            }
        }
        if (feature_bin < 0) continue;
        if (feature_gain > best_gain) {
            second_gain = best_gain;
            best_gain = feature_gain;
            best_local = static_cast<int>(j);
            best_bin = feature_bin;
            best_left_counts = feature_left;
        } else if (feature_gain > second_gain) {
            second_gain = feature_gain;
        }
    }

    if (best_local < 0 || best_gain <= 0.0) return;

    const double range = std::log2(static_cast<double>(n_classes_));
    const double eps = hoeffding_bound(range, cfg_.delta, static_cast<std::int64_t>(n));
    if (!(best_gain - second_gain > eps || eps < cfg_.tie_threshold)) return;

    node.leaf = false;
    node.split_feature = selected[static_cast<std::size_t>(best_local)];
    node.threshold = static_cast<double>(best_bin + 1) / static_cast<double>(cfg_.n_bins);

    auto left = std::make_unique<Node>(cfg_.drift_delta);
    auto right = std::make_unique<Node>(cfg_.drift_delta);
    for (Node* child : {left.get(), right.get()}) {
        child->mask_id = node.mask_id;  // children continue the same subtree
        const auto arity = static_cast<Eigen::Index>(selected.size());
        child->bin_counts = Eigen::MatrixXd::Zero(arity * cfg_.n_bins, n_classes_);
    }
    left->class_counts = best_left_counts;
    right->class_counts = node.class_counts - best_left_counts;
    node.left = std::move(left);
    node.right = std::move(right);
    node.bin_counts.resize(0, 0);
    node.class_counts.setZero();
}

std::vector<DriftEvent> HoeffdingAdaptiveTree::learn_one(const Eigen::VectorXd& features,
                                                         int true_class,
                                                         std::int64_t arrival_index) {
    if (features.size() != n_features_) {
        throw std::invalid_argument("learn_one: feature arity mismatch");
    }
    if (true_class < 0 || true_class >= n_classes_) {
        throw std::invalid_argument("learn_one: class id out of range");
    }

    // Route along the main tree, remembering the owning slots so a drifting
    // node can be replaced in place.
    std::vector<std::pair<std::unique_ptr<Node>*, std::string>> path;
    std::unique_ptr<Node>* slot = &root_;
    std::string path_str;
    while (true) {
        path.emplace_back(slot, path_str);
        Node& node = **slot;
        if (node.leaf) break;
        const bool go_left = features[node.split_feature] <= node.threshold;
        path_str += go_left ? 'L' : 'R';
        slot = go_left ? &node.left : &node.right;
    }

    const int predicted = leaf_majority(**slot);
    const int error_bit = predicted == true_class ? 0 : 1;

    records_learned_ += 1;
    global_class_counts_[true_class] += 1.0;

    Node& main_leaf = **slot;
    update_leaf_stats(main_leaf, features, true_class);
    try_split(main_leaf);

    std::vector<DriftEvent> events;
    for (auto& [node_slot, node_path] : path) {
        Node& node = **node_slot;

        if (node.background) {
            // The background subtree shadows this node: it learns every
            // record the node sees and tracks its own error stream.
            Node& bg = *node.background;
            const int bg_pred = subtree_predict(bg, features);
            const int bg_err = bg_pred == true_class ? 0 : 1;
            Node* cur = &bg;
            while (!cur->leaf) {
                cur->window.update(bg_err);
                cur = features[cur->split_feature] <= cur->threshold ? cur->left.get()
                                                                     : cur->right.get();
            }
            cur->window.update(bg_err);
            update_leaf_stats(*cur, features, true_class);
            try_split(*cur);
        }

        const DriftSignal signal = node.window.update(error_bit);
        if (signal == DriftSignal::drift) {
            std::unique_ptr<Node> replacement =
                node.background ? std::move(node.background) : make_leaf();
            *node_slot = std::move(replacement);
            events.push_back(DriftEvent{arrival_index, node_path, DriftEvent::Kind::drift});
            break;  // everything below this node is gone
        }
        if (signal == DriftSignal::warning && !node.background) {
            node.background = make_leaf();
            events.push_back(DriftEvent{arrival_index, node_path, DriftEvent::Kind::warning});
        }
    }
    return events;
}

std::int64_t HoeffdingAdaptiveTree::node_count() const {
    auto rec = [](auto&& self, const Node* node) -> std::int64_t {
        if (!node) return 0;
        if (node->leaf) return 1;
        return 1 + self(self, node->left.get()) + self(self, node->right.get());
    };
    return rec(rec, root_.get());
}

std::int64_t HoeffdingAdaptiveTree::split_count() const {
    auto rec = [](auto&& self, const Node* node) -> std::int64_t {
        if (!node || node->leaf) return 0;
        return 1 + self(self, node->left.get()) + self(self, node->right.get());
    };
    return rec(rec, root_.get());
}

double HoeffdingAdaptiveTree::leaf_count_total() const {
    auto rec = [](auto&& self, const Node* node) -> double {
        if (!node) return 0.0;
        if (node->leaf) return node->class_counts.sum();
        return self(self, node->left.get()) + self(self, node->right.get());
    };
    return rec(rec, root_.get());
}

std::string HoeffdingAdaptiveTree::structure_fingerprint() const {
    auto rec = [](auto&& self, const Node* node, std::string& out) -> void {
        char buf[64];
        if (node->leaf) {
            out += "[m";
            out += std::to_string(node->mask_id);
            out += ";";
            for (Eigen::Index c = 0; c < node->class_counts.size(); ++c) {
                if (c) out += ",";
                std::snprintf(buf, sizeof(buf), "%.0f", node->class_counts[c]);
                out += buf;
            }
            out += "]";
            return;
        }
        std::snprintf(buf, sizeof(buf), "(f%d<=%.12g;m%d ", node->split_feature, node->threshold,
                      node->mask_id);
        out += buf;
        self(self, node->left.get(), out);
        out += " ";
        self(self, node->right.get(), out);
        out += ")";
    };
    std::string out;
    rec(rec, root_.get(), out);
    return out;
}

}  // namespace cascade
