#pragma once

#include <cstddef>
#include <vector>

#include "fatml/errors.hpp"

namespace fatml {

struct Metrics {
    size_t n = 0;
    double mae = 0;
    double mse = 0;
    double rmse = 0;  // always sqrt(mse)
    double r2 = 0;
    double err_std = 0;  // sample standard deviation of residuals, n-1
};

/// MAE, MSE, RMSE, R^2 and residual spread over paired vectors. R^2 of a
/// constant actual vector is 1 for a perfect fit and 0 otherwise.
Metrics regression_metrics(const std::vector<double>& y, const std::vector<double>& yhat);

struct Band {
    double low;
    double high;
};

/// Metrics restricted to rows whose *actual* value lies in the closed band.
/// The default reporting band is the low-strength region 0..150 MPa.
Metrics banded_metrics(const std::vector<double>& y, const std::vector<double>& yhat,
                       Band band);

struct ParityRow {
    double actual;
    double predicted;
    double residual;  // actual - predicted
};

struct ParityTable {
    std::vector<ParityRow> rows;
    double err_std = 0;
    double band_15 = 0;  // 1.5 * err_std
    double band_20 = 0;  // 2.0 * err_std
    size_t inside_15 = 0;  // |residual| <= band (closed at the boundary)
    size_t inside_20 = 0;
};

ParityTable parity_table(const std::vector<double>& y, const std::vector<double>& yhat);

}  // namespace fatml
