#include "cascade/feature_select.hpp"

#include "cascade/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace cascade {

bool FeatureMask::is_identity(int n_features) const {
    if (static_cast<int>(selected.size()) != n_features) return false;
    for (int i = 0; i < n_features; ++i) {
        if (selected[static_cast<std::size_t>(i)] != i) return false;
    }
    return true;
}

std::string FeatureMask::to_string() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < selected.size(); ++i) {
        if (i) out << ' ';
        out << selected[i];
    }
    return out.str();
}

FeatureMask identity_mask(int n_features) {
    FeatureMask mask;
    mask.selected.resize(static_cast<std::size_t>(n_features));
    std::iota(mask.selected.begin(), mask.selected.end(), 0);
    return mask;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void merge(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

}  // namespace

FeatureMask select_features(const Eigen::MatrixXd& buffer, const SelectionConfig& cfg) {
    const Eigen::Index n = buffer.rows();
    const Eigen::Index f = buffer.cols();
    if (n < 2) {
        throw SelectionError("feature selection needs at least 2 records, got " +
                             std::to_string(n));
    }
    if (f < 1) {
        throw SelectionError("feature selection needs at least 1 feature");
    }
    if (cfg.correlation_threshold <= 0.0 || cfg.correlation_threshold > 1.0) {
        throw std::invalid_argument("correlation_threshold must be in (0, 1]");
    }

    const Eigen::MatrixXd centered = buffer.rowwise() - buffer.colwise().mean();
    const Eigen::MatrixXd cov =
        (centered.transpose() * centered) / static_cast<double>(n - 1);
    const Eigen::VectorXd variance = cov.diagonal();
    const Eigen::VectorXd sigma = variance.cwiseMax(0.0).cwiseSqrt();
    // Constant columns are detected by exact spread; the centered variance of
    // a constant column can come out as rounding dust.
    const Eigen::VectorXd spread =
        (buffer.colwise().maxCoeff() - buffer.colwise().minCoeff()).transpose();

    UnionFind clusters(static_cast<int>(f));
    for (Eigen::Index i = 0; i < f; ++i) {
        if (spread[i] == 0.0) continue;  // zero-variance: correlation 0 with everything
        for (Eigen::Index j = i + 1; j < f; ++j) {
            if (spread[j] == 0.0) continue;
            const double rho = std::abs(cov(i, j)) / (sigma[i] * sigma[j]);
            if (rho >= cfg.correlation_threshold) {
                clusters.merge(static_cast<int>(i), static_cast<int>(j));
            }
        }
    }

    // Representative per cluster: max variance, ties to the lowest index.
    std::vector<int> representative(static_cast<std::size_t>(f), -1);
    for (int i = 0; i < static_cast<int>(f); ++i) {
        const int root = clusters.find(i);
        int& rep = representative[static_cast<std::size_t>(root)];
        if (rep < 0 || variance[i] > variance[rep]) rep = i;
    }

    std::vector<int> kept;
    std::vector<int> zero_variance_reps;
    for (Eigen::Index root = 0; root < f; ++root) {
        const int rep = representative[static_cast<std::size_t>(root)];
        if (rep < 0) continue;
        if (spread[rep] > 0.0) {
            kept.push_back(rep);
        } else {
            zero_variance_reps.push_back(rep);
        }
    }
    if (kept.empty()) {
        // Everything is constant; keep the lowest-index representative so the
        // mask stays non-empty.
        kept.push_back(*std::min_element(zero_variance_reps.begin(), zero_variance_reps.end()));
    }
    std::sort(kept.begin(), kept.end());

    FeatureMask mask;
    mask.selected = std::move(kept);
    return mask;
}

Eigen::VectorXd apply_mask(const Eigen::VectorXd& features, const FeatureMask& mask) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(mask.selected.size()));
    for (std::size_t i = 0; i < mask.selected.size(); ++i) {
        const int idx = mask.selected[i];
        if (idx < 0 || idx >= features.size()) {
            throw std::invalid_argument("apply_mask: index " + std::to_string(idx) +
                                        " out of range for arity " + std::to_string(features.size()));
        }
        out[static_cast<Eigen::Index>(i)] = features[idx];
    }
    return out;
}

}  // namespace cascade
