#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "fatml/matrix.hpp"
#include "fatml/rng.hpp"

namespace fatml {

struct TreeNode {
    int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // x[feature] <= threshold goes left
    int32_t left = -1;
    int32_t right = -1;
    double value = 0.0;  // leaf prediction (mean of its rows)
    uint32_t n_samples = 0;
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root; empty tree predicts 0

    double predict_row(const double* x) const {
        if (nodes.empty()) return 0.0;
        int32_t i = 0;
        while (nodes[static_cast<size_t>(i)].feature >= 0) {
            const TreeNode& n = nodes[static_cast<size_t>(i)];
            i = x[n.feature] <= n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<size_t>(i)].value;
    }

    size_t n_leaves() const {
        size_t k = 0;
        for (const auto& n : nodes) {
            if (n.feature < 0) ++k;
        }
        return k;
    }
};

struct TreeParams {
    size_t max_depth = 0;  // 0 = unlimited
    size_t min_samples_split = 2;
    size_t min_samples_leaf = 1;
    double max_features = 1.0;  // fraction of features considered per split
    bool random_thresholds = false;  // uniform-random threshold per candidate feature
};

/// Exact greedy variance-reduction tree over the given rows (duplicates act
/// as bootstrap weights). Splits use midpoint thresholds; equal-gain ties go
/// to the lowest feature index, then the lowest threshold.
Tree build_tree(const Matrix& X, const std::vector<double>& y,
                const std::vector<size_t>& rows, const TreeParams& params, Rng rng);

struct Forest {
    std::vector<Tree> trees;

    double predict_row(const double* x) const {
        double s = 0;
        for (const auto& t : trees) s += t.predict_row(x);
        return trees.empty() ? 0.0 : s / static_cast<double>(trees.size());
    }
};

struct ForestParams {
    size_t n_estimators = 100;
    bool bootstrap = true;  // false = every tree sees the full sample
    TreeParams tree;
};

/// Averaged trees with per-tree derived RNG streams, so the result does not
/// depend on the number of workers used to build them.
Forest build_forest(const Matrix& X, const std::vector<double>& y, const ForestParams& params,
                    uint64_t seed, size_t jobs = 1);

}  // namespace fatml
