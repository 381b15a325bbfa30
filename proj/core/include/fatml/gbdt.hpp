#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fatml/matrix.hpp"
#include "fatml/tree.hpp"

namespace fatml {

struct TrainLogRow {
    size_t iteration = 0;  // 1-based stage / epoch number
    double train_metric = 0;
    double valid_metric = 0;  // NaN when no validation set was supplied
};

struct GbdtParams {
    size_t n_estimators = 100;
    double learning_rate = 0.1;
    size_t max_depth = 3;   // 0 = unlimited; used when num_leaves == 0
    size_t num_leaves = 0;  // > 0 switches to best-first leaf-wise growth
    size_t min_data_in_leaf = 1;
    double subsample = 1.0;         // row fraction drawn per stage, no replacement
    double feature_fraction = 1.0;  // feature fraction considered per split
    double reg_lambda = 0.0;        // leaf value = sum / (count + reg_lambda)
    size_t early_stopping_rounds = 0;  // 0 = off; needs a validation set
    size_t n_bins = 255;
};

/// Staged shrinkage model over histogram-grown regression trees. When early
/// stopping fires, the kept stages are truncated at the best validation
/// round; the training log always covers every stage that was built.
struct GbdtModel {
    double init = 0.0;  // mean of the training target
    double learning_rate = 0.1;
    std::vector<Tree> stages;
    size_t best_iteration = 0;  // 1-based; equals stages.size() without early stop

    double predict_row(const double* x) const {
        double s = init;
        for (const auto& t : stages) s += learning_rate * t.predict_row(x);
        return s;
    }
};

struct ValidationRef {
    const Matrix* X = nullptr;
    const std::vector<double>* y = nullptr;
};

GbdtModel train_gbdt(const Matrix& X, const std::vector<double>& y, const GbdtParams& params,
                     uint64_t seed, std::optional<ValidationRef> validation,
                     std::vector<TrainLogRow>* log_out);

}  // namespace fatml
