#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fatml/gbdt.hpp"  // TrainLogRow, ValidationRef
#include "fatml/matrix.hpp"

namespace fatml {

struct NnParams {
    size_t dense1 = 32;
    size_t dense2 = 16;
    double dropout = 0.0;
    double learning_rate = 0.05;
    double momentum = 0.9;
    double decay = 0.001;  // lr_t = lr / (1 + decay * step)
    size_t batch_size = 32;
    size_t max_epochs = 200;
};

/// Two hidden ReLU layers into a single linear output. Weights are stored
/// row-major (w1 is d1 x d_in). Dropout exists only during training.
struct NnModel {
    size_t d_in = 0, d1 = 0, d2 = 0;
    std::vector<double> w1, b1, w2, b2, w3, b3;

    double predict_row(const double* x) const;

    // Flat parameter view plus full-batch loss/gradient, for numeric checks
    // of the backward pass (loss is 0.5 * mean squared error, no dropout).
    std::vector<double> flat_params() const;
    void set_flat_params(const std::vector<double>& p);
    double loss(const Matrix& X, const std::vector<double>& y) const;
    std::vector<double> loss_gradient(const Matrix& X, const std::vector<double>& y) const;
};

/// Mini-batch SGD with momentum, inverse-time learning-rate decay, inverted
/// dropout, and best-validation-epoch weight restoration. When no validation
/// set is supplied, a seeded 10% slice of the training rows is held out.
NnModel train_nn(const Matrix& X, const std::vector<double>& y, const NnParams& params,
                 uint64_t seed, std::optional<ValidationRef> validation,
                 std::vector<TrainLogRow>* log_out);

}  // namespace fatml
