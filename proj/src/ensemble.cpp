#include "cascade/ensemble.hpp"

#include "cascade/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace cascade {

int majority_vote(const std::vector<int>& votes) {
    if (votes.empty()) {
        throw std::invalid_argument("majority_vote: no votes");
    }
    std::map<int, int> counts;
    for (const int v : votes) counts[v] += 1;
    int best_class = votes[0];
    int best_count = -1;
    for (const auto& [cls, count] : counts) {  // ascending class id
        if (count >= best_count) {             // ties -> highest id
            best_count = count;
            best_class = cls;
        }
    }
    return best_class;
}

namespace {

double gini(const std::array<double, 2>& counts, double total) {
    if (total <= 0.0) return 0.0;
    const double p0 = counts[0] / total;
    const double p1 = counts[1] / total;
    return 1.0 - p0 * p0 - p1 * p1;
}

}  // namespace

void CartTree::grow(Node& node, const std::vector<LabeledExample>& data, std::vector<int>& indices,
                    int depth, int max_depth, int mtry, Rng& rng) {
    std::array<double, 2> counts{0.0, 0.0};
    for (const int i : indices) counts[static_cast<std::size_t>(data[static_cast<std::size_t>(i)].label)] += 1.0;
    const double n = counts[0] + counts[1];
    node.label = counts[1] >= counts[0] ? 1 : 0;

    if (depth >= max_depth || counts[0] == 0.0 || counts[1] == 0.0 || indices.size() < 2) {
        return;  // leaf
    }

    const int arity = static_cast<int>(data[static_cast<std::size_t>(indices[0])].features.size());
    std::vector<int> candidates(static_cast<std::size_t>(arity));
    std::iota(candidates.begin(), candidates.end(), 0);
    if (mtry < arity) {
        rng.shuffle(candidates);
        candidates.resize(static_cast<std::size_t>(mtry));
        std::sort(candidates.begin(), candidates.end());  // ties by lower index
    }

    const double parent_gini = gini(counts, n);
    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::pair<double, int>> values;  // (feature value, label)
    values.reserve(indices.size());
    for (const int f : candidates) {
        values.clear();
        for (const int i : indices) {
            const auto& ex = data[static_cast<std::size_t>(i)];
            values.emplace_back(ex.features[f], ex.label);
        }
        std::sort(values.begin(), values.end());

        std::array<double, 2> left{0.0, 0.0};
        for (std::size_t k = 0; k + 1 < values.size(); ++k) {
            left[static_cast<std::size_t>(values[k].second)] += 1.0;
            if (values[k].first == values[k + 1].first) continue;
            const double nl = static_cast<double>(k + 1);
            const double nr = n - nl;
            const std::array<double, 2> right{counts[0] - left[0], counts[1] - left[1]};
            const double gain =
                parent_gini - (nl / n) * gini(left, nl) - (nr / n) * gini(right, nr);
            if (gain > best_gain) {
                best_gain = gain;
                best_feature = f;
                best_threshold = 0.5 * (values[k].first + values[k + 1].first);
            }
        }
    }

    if (best_feature < 0) return;  // nothing separates; stay a leaf

    node.leaf = false;
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = std::make_unique<Node>();
    node.right = std::make_unique<Node>();

    std::vector<int> left_idx, right_idx;
    for (const int i : indices) {
        if (data[static_cast<std::size_t>(i)].features[best_feature] <= best_threshold) {
            left_idx.push_back(i);
        } else {
            right_idx.push_back(i);
        }
    }
    grow(*node.left, data, left_idx, depth + 1, max_depth, mtry, rng);
    grow(*node.right, data, right_idx, depth + 1, max_depth, mtry, rng);
}

void CartTree::train(const std::vector<LabeledExample>& data, const std::vector<int>& indices,
                     int max_depth, int mtry, Rng& rng) {
    if (indices.empty()) {
        throw std::invalid_argument("CartTree::train: empty index set");
    }
    root_ = std::make_unique<Node>();
    std::vector<int> idx = indices;
    grow(*root_, data, idx, 0, max_depth, mtry, rng);
}

int CartTree::predict(const Eigen::VectorXd& features) const {
    const Node* cur = root_.get();
    if (!cur) throw std::logic_error("CartTree::predict: untrained tree");
    while (!cur->leaf) {
        cur = features[cur->feature] <= cur->threshold ? cur->left.get() : cur->right.get();
    }
    return cur->label;
}

void RandomForest::train(const std::vector<LabeledExample>& data, const CommitteeConfig& cfg) {
    if (data.empty()) throw std::invalid_argument("RandomForest::train: empty buffer");
    const int arity = static_cast<int>(data[0].features.size());
    const int mtry = cfg.rf_feature_subsample > 0
                         ? cfg.rf_feature_subsample
                         : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(arity))));
    trees_.clear();
    trees_.resize(static_cast<std::size_t>(cfg.rf_trees));
    for (int t = 0; t < cfg.rf_trees; ++t) {
        Rng rng(cfg.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(t + 1));
        std::vector<int> indices(data.size());
        if (cfg.rf_bootstrap) {
            for (auto& i : indices) i = static_cast<int>(rng.index(data.size()));
        } else {
            std::iota(indices.begin(), indices.end(), 0);
        }
        trees_[static_cast<std::size_t>(t)].train(data, indices, cfg.rf_max_depth, mtry, rng);
    }
}

int RandomForest::predict(const Eigen::VectorXd& features) const {
    std::vector<int> votes;
    votes.reserve(trees_.size());
    for (const auto& tree : trees_) votes.push_back(tree.predict(features));
    return majority_vote(votes);
}

void KnnStore::train(const std::vector<LabeledExample>& data, int k) {
    if (k < 1 || k % 2 == 0) {
        throw std::invalid_argument("KnnStore::train: k must be odd and >= 1");
    }
    store_ = data;
    k_ = k;
}

int KnnStore::predict(const Eigen::VectorXd& features) const {
    if (store_.empty()) throw std::logic_error("KnnStore::predict: empty store");
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_), store_.size());

    std::vector<std::pair<double, std::int64_t>> order(store_.size());  // (dist^2, arrival)
    for (std::size_t i = 0; i < store_.size(); ++i) {
        order[i] = {(store_[i].features - features).squaredNorm(), store_[i].arrival_index};
    }
    std::vector<std::size_t> idx(store_.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k - 1), idx.end(),
                     [&](std::size_t a, std::size_t b) { return order[a] < order[b]; });

    std::vector<int> votes;
    votes.reserve(k);
    for (std::size_t i = 0; i < k; ++i) votes.push_back(store_[idx[i]].label);
    return majority_vote(votes);
}

void LinearSvm::train(const std::vector<LabeledExample>& data, int epochs, double lambda,
                      Rng& rng) {
    if (data.empty()) throw std::invalid_argument("LinearSvm::train: empty buffer");
    if (lambda <= 0.0) throw std::invalid_argument("LinearSvm::train: lambda must be positive");
    weights_ = Eigen::VectorXd::Zero(data[0].features.size());
    bias_ = 0.0;

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    // The bias rides along as an always-one feature, so it sees the same
    // step and decay as the weights; an undamped bias would be dominated by
    // the huge first steps of the 1/(lambda*t) schedule.
    std::int64_t t = 0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(order);
        for (const std::size_t i : order) {
            ++t;
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            const auto& ex = data[i];
            const double y = ex.label == 1 ? 1.0 : -1.0;
            const double margin = y * (weights_.dot(ex.features) + bias_);
            const double decay = 1.0 - eta * lambda;
            weights_ *= decay;
            bias_ *= decay;
            if (margin < 1.0) {
                weights_ += eta * y * ex.features;
                bias_ += eta * y;
            }
        }
    }
}

double LinearSvm::decision_value(const Eigen::VectorXd& features) const {
    return weights_.dot(features) + bias_;
}

int LinearSvm::predict(const Eigen::VectorXd& features) const {
    return decision_value(features) >= 0.0 ? 1 : 0;
}

ClassCommittee ClassCommittee::train(int target_class, const std::vector<LabeledExample>& buffer,
                                     const CommitteeConfig& cfg) {
    std::size_t positives = 0;
    for (const auto& ex : buffer) positives += ex.label == 1 ? 1 : 0;
    if (positives == 0 || positives == buffer.size()) {
        throw TrainingError("committee for class " + std::to_string(target_class) +
                            ": training buffer has a single class");
    }
    ClassCommittee committee;
    committee.target_class_ = target_class;
    committee.forest_.train(buffer, cfg);
    committee.knn_.train(buffer, cfg.knn_k);
    Rng svm_rng(cfg.seed ^ 0xa5a5a5a5a5a5a5a5ULL);
    committee.svm_.train(buffer, cfg.svm_epochs, cfg.svm_lambda, svm_rng);
    return committee;
}

VerifyOutcome ClassCommittee::verify(const Eigen::VectorXd& features) const {
    const std::vector<int> votes = {forest_.predict(features), knn_.predict(features),
                                    svm_.predict(features)};
    return majority_vote(votes) == 1 ? VerifyOutcome::confirmed_attack
                                     : VerifyOutcome::demoted_to_normal;
}

ClassCommittee::MemberAccuracy ClassCommittee::training_accuracy(
    const std::vector<LabeledExample>& buffer) const {
    MemberAccuracy acc;
    if (buffer.empty()) return acc;
    double rf_ok = 0.0, knn_ok = 0.0, svm_ok = 0.0;
    for (const auto& ex : buffer) {
        rf_ok += forest_.predict(ex.features) == ex.label ? 1.0 : 0.0;
        knn_ok += knn_.predict(ex.features) == ex.label ? 1.0 : 0.0;
        svm_ok += svm_.predict(ex.features) == ex.label ? 1.0 : 0.0;
    }
    const double n = static_cast<double>(buffer.size());
    acc.rf = rf_ok / n;
    acc.knn = knn_ok / n;
    acc.svm = svm_ok / n;
    return acc;
}

}  // namespace cascade
