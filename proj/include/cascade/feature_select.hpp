#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace cascade {

// Indices of the representative features, sorted ascending.
struct FeatureMask {
    std::vector<int> selected;

    bool is_identity(int n_features) const;
    std::string to_string() const;  // space-separated indices
};

FeatureMask identity_mask(int n_features);

struct SelectionConfig {
    int buffer_size = 1000;              // recent records used per recomputation
    double correlation_threshold = 0.9;  // tau in (0, 1]
};

// Label-free clustering selection over a buffer of raw feature rows
// (rows = records, cols = features):
//   1. pairwise |Pearson correlation|, zero-variance features correlate 0
//      with everything;
//   2. single-linkage clusters at distance 1 - |rho| cut at 1 - tau, i.e.
//      connected components of the |rho| >= tau graph;
//   3. per cluster keep the highest-variance feature, ties to the lowest
//      index; zero-variance representatives are dropped unless nothing else
//      is left.
// Throws SelectionError when the buffer has fewer than two rows; callers
// keep their previous mask.
FeatureMask select_features(const Eigen::MatrixXd& buffer, const SelectionConfig& cfg);

// Projects a full feature vector onto the mask, preserving index order.
Eigen::VectorXd apply_mask(const Eigen::VectorXd& features, const FeatureMask& mask);

}  // namespace cascade
