#pragma once

#include "cascade/rng.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <vector>

namespace cascade {

// Plurality vote. Ties break toward the highest class id, so in the binary
// {0 = not-target, 1 = target} convention a tie confirms the attack.
int majority_vote(const std::vector<int>& votes);

struct CommitteeConfig {
    int rf_trees = 10;
    int rf_max_depth = 8;
    int rf_feature_subsample = 0;  // 0 = ceil(sqrt(arity))
    bool rf_bootstrap = true;
    int knn_k = 5;                 // odd
    int svm_epochs = 3;
    double svm_lambda = 1e-4;
    int train_buffer_size = 2000;  // per class
    std::uint64_t seed = 0;
};

struct LabeledExample {
    Eigen::VectorXd features;
    int label = 0;  // 0/1 for committee members
    std::int64_t arrival_index = 0;
};

// CART with Gini splits over continuous features; thresholds are midpoints
// of consecutive distinct values. Ties go to the lower feature index, then
// the lower threshold.
class CartTree {
public:
    // mtry = number of features sampled per node; mtry >= arity considers all
    // features in index order.
    void train(const std::vector<LabeledExample>& data, const std::vector<int>& indices,
               int max_depth, int mtry, Rng& rng);
    int predict(const Eigen::VectorXd& features) const;

private:
    struct Node {
        bool leaf = true;
        int feature = -1;
        double threshold = 0.0;
        int label = 0;
        std::unique_ptr<Node> left, right;
    };
    void grow(Node& node, const std::vector<LabeledExample>& data, std::vector<int>& indices,
              int depth, int max_depth, int mtry, Rng& rng);
    std::unique_ptr<Node> root_;
};

class RandomForest {
public:
    void train(const std::vector<LabeledExample>& data, const CommitteeConfig& cfg);
    int predict(const Eigen::VectorXd& features) const;
    std::size_t tree_count() const { return trees_.size(); }

private:
    std::vector<CartTree> trees_;
};

// Stores the buffer verbatim; Euclidean distance over the stored vectors.
// Boundary ties resolve by smaller arrival index, so predictions do not
// depend on storage order.
class KnnStore {
public:
    void train(const std::vector<LabeledExample>& data, int k);
    int predict(const Eigen::VectorXd& features) const;

private:
    std::vector<LabeledExample> store_;
    int k_ = 5;
};

// Linear SVM trained by hinge-loss SGD with step 1/(lambda * t).
class LinearSvm {
public:
    void train(const std::vector<LabeledExample>& data, int epochs, double lambda, Rng& rng);
    int predict(const Eigen::VectorXd& features) const;  // 0/1
    double decision_value(const Eigen::VectorXd& features) const;

private:
    Eigen::VectorXd weights_;
    double bias_ = 0.0;
};

enum class VerifyOutcome { confirmed_attack, demoted_to_normal };

// One-vs-rest committee for a single attack class: RF + kNN + linear SVM,
// combined by majority vote over their binary votes.
class ClassCommittee {
public:
    // Buffer labels are is-target (0/1). Throws TrainingError when the buffer
    // lacks a positive or a negative example.
    static ClassCommittee train(int target_class, const std::vector<LabeledExample>& buffer,
                                const CommitteeConfig& cfg);

    VerifyOutcome verify(const Eigen::VectorXd& features) const;

    int target_class() const { return target_class_; }

    // Training-buffer accuracies of the three members, for the run journal.
    struct MemberAccuracy {
        double rf = 0.0, knn = 0.0, svm = 0.0;
    };
    MemberAccuracy training_accuracy(const std::vector<LabeledExample>& buffer) const;

private:
    int target_class_ = -1;
    RandomForest forest_;
    KnnStore knn_;
    LinearSvm svm_;
};

}  // namespace cascade
