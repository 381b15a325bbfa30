#pragma once

#include <cstddef>
#include <vector>

namespace fatml {

/// Dense row-major matrix of doubles; the lingua franca between the
/// preprocessing, feature-analysis, learner, and explanation layers.
struct Matrix {
    size_t n_rows = 0;
    size_t n_cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(size_t rows, size_t cols, double fill = 0.0)
        : n_rows(rows), n_cols(cols), data(rows * cols, fill) {}

    double& at(size_t r, size_t c) { return data[r * n_cols + c]; }
    double at(size_t r, size_t c) const { return data[r * n_cols + c]; }
    const double* row(size_t r) const { return data.data() + r * n_cols; }
    double* row(size_t r) { return data.data() + r * n_cols; }

    std::vector<double> column(size_t c) const {
        std::vector<double> out(n_rows);
        for (size_t r = 0; r < n_rows; ++r) out[r] = at(r, c);
        return out;
    }

    std::vector<double> row_vec(size_t r) const {
        return std::vector<double>(row(r), row(r) + n_cols);
    }

    Matrix select_rows(const std::vector<size_t>& rows) const {
        Matrix out(rows.size(), n_cols);
        for (size_t i = 0; i < rows.size(); ++i) {
            for (size_t c = 0; c < n_cols; ++c) out.at(i, c) = at(rows[i], c);
        }
        return out;
    }

    Matrix select_cols(const std::vector<size_t>& cols) const {
        Matrix out(n_rows, cols.size());
        for (size_t r = 0; r < n_rows; ++r) {
            for (size_t j = 0; j < cols.size(); ++j) out.at(r, j) = at(r, cols[j]);
        }
        return out;
    }
};

}  // namespace fatml
