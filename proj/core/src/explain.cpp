#include "fatml/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fatml/errors.hpp"
#include "fatml/parallel.hpp"
#include "fatml/rng.hpp"

namespace fatml {

namespace {

// Pascal's triangle; coalition weights are 1/(a*C(a+b,a)) so exact binomials
// keep the attribution exact.
std::vector<std::vector<double>> binomial_table(size_t n) {
    std::vector<std::vector<double>> c(n + 1);
    for (size_t i = 0; i <= n; ++i) {
        c[i].assign(i + 1, 1.0);
        for (size_t j = 1; j < i; ++j) c[i][j] = c[i - 1][j - 1] + c[i - 1][j];
    }
    return c;
}

struct PairWalker {
    const Tree* tree = nullptr;
    const double* x = nullptr;
    const double* z = nullptr;
    double scale = 1;
    double* phi = nullptr;
    const std::vector<std::vector<double>>* binom = nullptr;

    std::vector<int8_t> state;      // 0 free, 1 forced to x, 2 forced to z
    std::vector<size_t> x_forced;
    std::vector<size_t> z_forced;

    void run(size_t d) {
        state.assign(d, 0);
        x_forced.clear();
        z_forced.clear();
        walk(0);
    }

    void walk(int i) {
        const TreeNode& node = tree->nodes[static_cast<size_t>(i)];
        if (node.feature < 0) {
            size_t a = x_forced.size();
            size_t b = z_forced.size();
            if (a + b == 0) return;  // reached by both points; cancels out
            double v = node.value * scale;
            if (a > 0) {
                double w = v / (static_cast<double>(a) * (*binom)[a + b][a]);
                for (size_t f : x_forced) phi[f] += w;
            }
            if (b > 0) {
                double w = v / (static_cast<double>(b) * (*binom)[a + b][b]);
                for (size_t f : z_forced) phi[f] -= w;
            }
            return;
        }
        size_t f = static_cast<size_t>(node.feature);
        bool x_left = x[f] <= node.threshold;
        bool z_left = z[f] <= node.threshold;
        if (state[f] == 1) {
            walk(x_left ? node.left : node.right);
        } else if (state[f] == 2) {
            walk(z_left ? node.left : node.right);
        } else if (x_left == z_left) {
            walk(x_left ? node.left : node.right);
        } else {
            state[f] = 1;
            x_forced.push_back(f);
            walk(x_left ? node.left : node.right);
            x_forced.pop_back();
            state[f] = 2;
            z_forced.push_back(f);
            walk(z_left ? node.left : node.right);
            z_forced.pop_back();
            state[f] = 0;
        }
    }
};

// Trees in prediction order with the factor each leaf value carries.
std::vector<std::pair<const Tree*, double>> scaled_trees(const FittedModel& model) {
    std::vector<std::pair<const Tree*, double>> out;
    if (const auto* t = std::get_if<Tree>(&model.model)) {
        out.emplace_back(t, 1.0);
    } else if (const auto* f = std::get_if<Forest>(&model.model)) {
        double w = 1.0 / static_cast<double>(f->trees.size());
        for (const auto& tree : f->trees) out.emplace_back(&tree, w);
    } else if (const auto* g = std::get_if<GbdtModel>(&model.model)) {
        for (const auto& tree : g->stages) out.emplace_back(&tree, g->learning_rate);
    }
    return out;
}

void shap_tree_row(const FittedModel& model, const double* x, const Matrix& background,
                   const std::vector<std::vector<double>>& binom, double* phi) {
    auto trees = scaled_trees(model);
    const double inv_bg = 1.0 / static_cast<double>(background.n_rows);
    std::vector<double> acc(model.n_features, 0.0);
    PairWalker walker;
    walker.x = x;
    walker.binom = &binom;
    walker.phi = acc.data();
    for (size_t zr = 0; zr < background.n_rows; ++zr) {
        walker.z = background.row(zr);
        for (const auto& [tree, scale] : trees) {
            walker.tree = tree;
            walker.scale = scale;
            walker.run(model.n_features);
        }
    }
    for (size_t j = 0; j < model.n_features; ++j) phi[j] = acc[j] * inv_bg;
}

void shap_sampling_row(const FittedModel& model, const double* x, const Matrix& background,
                       size_t row, const ShapOptions& options, double* phi) {
    const size_t d = model.n_features;
    const size_t n_bg = background.n_rows;
    // full background cycles and antithetic pairs make the row sum telescope
    // to prediction minus base exactly
    size_t cycle = 2 * n_bg;
    size_t samples = std::max<size_t>(1, (options.n_samples + cycle - 1) / cycle) * cycle;

    Rng rng = Rng(options.seed).stream("shap_sampling").stream(row);
    std::vector<size_t> perm(d);
    std::iota(perm.begin(), perm.end(), size_t(0));
    std::vector<double> point(d);
    std::fill(phi, phi + d, 0.0);

    const double inv = 1.0 / static_cast<double>(samples);
    for (size_t s = 0; s < samples; ++s) {
        if (s % 2 == 0) {
            rng.shuffle(perm);
        } else {
            std::reverse(perm.begin(), perm.end());
        }
        const double* z = background.row(s % n_bg);
        std::copy(z, z + d, point.begin());
        double prev = model.predict_row(point.data());
        for (size_t j : perm) {
            point[j] = x[j];
            double next = model.predict_row(point.data());
            phi[j] += (next - prev) * inv;
            prev = next;
        }
    }
}

}  // namespace

ShapMatrix shap_values(const FittedModel& model, const Matrix& X_explain,
                       const Matrix& background, const ShapOptions& options) {
    if (X_explain.n_cols != model.n_features) {
        throw WidthMismatchError(model.n_features, X_explain.n_cols);
    }
    if (background.n_cols != model.n_features) {
        throw WidthMismatchError(model.n_features, background.n_cols);
    }
    if (background.n_rows == 0) throw DegenerateInputError("empty attribution background");

    ShapMatrix shap;
    shap.feature_names = options.feature_names;
    shap.background_size = background.n_rows;
    shap.values = Matrix(X_explain.n_rows, model.n_features);

    double base = 0;
    for (size_t r = 0; r < background.n_rows; ++r) base += model.predict_row(background.row(r));
    shap.base_value = base / static_cast<double>(background.n_rows);

    switch (model.spec.family) {
        case Family::baseline:
            break;  // constant model attributes nothing
        case Family::linear: {
            const auto& m = std::get<LinearModel>(model.model);
            std::vector<double> mean(model.n_features, 0.0);
            for (size_t r = 0; r < background.n_rows; ++r) {
                const double* z = background.row(r);
                for (size_t j = 0; j < model.n_features; ++j) mean[j] += z[j];
            }
            for (double& v : mean) v /= static_cast<double>(background.n_rows);
            for (size_t r = 0; r < X_explain.n_rows; ++r) {
                const double* x = X_explain.row(r);
                double* phi = shap.values.row(r);
                for (size_t j = 0; j < model.n_features; ++j) {
                    phi[j] = m.coef[j] * (x[j] - mean[j]);
                }
            }
            break;
        }
        case Family::tree:
        case Family::random_forest:
        case Family::extra_trees:
        case Family::gbdt:
        case Family::gbdt_leafwise: {
            auto binom = binomial_table(model.n_features + 1);
            parallel_for(X_explain.n_rows, options.jobs, [&](size_t r) {
                shap_tree_row(model, X_explain.row(r), background, binom,
                              shap.values.row(r));
            });
            break;
        }
        case Family::nn: {
            parallel_for(X_explain.n_rows, options.jobs, [&](size_t r) {
                shap_sampling_row(model, X_explain.row(r), background, r, options,
                                  shap.values.row(r));
            });
            break;
        }
    }
    return shap;
}

ShapMatrix shap_weighted_sum(const std::vector<ShapMatrix>& parts,
                             const std::vector<double>& weights) {
    if (parts.empty()) throw DegenerateInputError("no attribution parts to combine");
    if (parts.size() != weights.size()) {
        throw LengthMismatchError(parts.size(), weights.size());
    }
    ShapMatrix out;
    out.feature_names = parts.front().feature_names;
    out.background_size = parts.front().background_size;
    out.background_source = parts.front().background_source;
    out.values = Matrix(parts.front().values.n_rows, parts.front().values.n_cols);
    for (size_t p = 0; p < parts.size(); ++p) {
        const ShapMatrix& part = parts[p];
        if (part.values.n_rows != out.values.n_rows ||
            part.values.n_cols != out.values.n_cols) {
            throw WidthMismatchError(out.values.n_cols, part.values.n_cols);
        }
        out.base_value += weights[p] * part.base_value;
        for (size_t i = 0; i < out.values.data.size(); ++i) {
            out.values.data[i] += weights[p] * part.values.data[i];
        }
    }
    return out;
}

ImportanceTable permutation_importance(const FittedModel& model, const Matrix& X,
                                       const std::vector<double>& y,
                                       const std::vector<std::string>& names, size_t repeats,
                                       uint64_t seed, int jobs) {
    return permutation_importance(
        [&model](const Matrix& m) { return model.predict(m); }, X, y, names, repeats, seed,
        jobs);
}

ImportanceTable permutation_importance(const BatchPredictor& predict, const Matrix& X,
                                       const std::vector<double>& y,
                                       const std::vector<std::string>& names, size_t repeats,
                                       uint64_t seed, int jobs) {
    if (X.n_rows != y.size()) throw LengthMismatchError(X.n_rows, y.size());
    if (X.n_cols != names.size()) throw WidthMismatchError(names.size(), X.n_cols);
    if (repeats < 1) throw ConfigError("permutation importance needs at least 1 repeat");

    auto rmse_of = [&](const std::vector<double>& pred) {
        double ss = 0;
        for (size_t r = 0; r < y.size(); ++r) {
            double e = pred[r] - y[r];
            ss += e * e;
        }
        return std::sqrt(ss / static_cast<double>(y.size()));
    };

    ImportanceTable table;
    table.baseline_metric = rmse_of(predict(X));

    std::vector<std::vector<double>> degradations(X.n_cols,
                                                  std::vector<double>(repeats, 0.0));
    parallel_for(X.n_cols, jobs, [&](size_t j) {
        Matrix permuted = X;
        std::vector<double> column(X.n_rows);
        for (size_t rep = 0; rep < repeats; ++rep) {
            for (size_t r = 0; r < X.n_rows; ++r) column[r] = X.at(r, j);
            Rng rng = Rng(seed).stream("permutation").stream(rep).stream(j);
            rng.shuffle(column);
            for (size_t r = 0; r < X.n_rows; ++r) permuted.at(r, j) = column[r];
            degradations[j][rep] = rmse_of(predict(permuted)) - table.baseline_metric;
        }
        for (size_t r = 0; r < X.n_rows; ++r) permuted.at(r, j) = X.at(r, j);
    });

    for (size_t j = 0; j < X.n_cols; ++j) {
        ImportanceEntry e;
        e.feature = names[j];
        double mean = std::accumulate(degradations[j].begin(), degradations[j].end(), 0.0) /
                      static_cast<double>(repeats);
        e.mean_degradation = mean;
        if (repeats > 1) {
            double ss = 0;
            for (double v : degradations[j]) ss += (v - mean) * (v - mean);
            e.std_degradation = std::sqrt(ss / static_cast<double>(repeats - 1));
        }
        table.entries.push_back(e);
    }
    std::stable_sort(table.entries.begin(), table.entries.end(),
                     [](const ImportanceEntry& a, const ImportanceEntry& b) {
                         return a.mean_degradation > b.mean_degradation;
                     });
    return table;
}

ShapReports shap_reports(const ShapMatrix& shap, const Matrix& X_explain,
                         const std::vector<double>& predictions,
                         const std::vector<double>& actuals, size_t k) {
    const size_t n = shap.values.n_rows;
    const size_t d = shap.values.n_cols;
    if (X_explain.n_rows != n) throw LengthMismatchError(X_explain.n_rows, n);
    if (X_explain.n_cols != d) throw WidthMismatchError(d, X_explain.n_cols);
    if (predictions.size() != n) throw LengthMismatchError(predictions.size(), n);
    if (actuals.size() != n) throw LengthMismatchError(actuals.size(), n);
    if (k > n) throw ConfigError("cannot select more decision records than rows");

    auto name_of = [&](size_t j) {
        return j < shap.feature_names.size() ? shap.feature_names[j]
                                             : "f" + std::to_string(j);
    };

    ShapReports reports;
    for (size_t j = 0; j < d; ++j) {
        double s = 0;
        for (size_t r = 0; r < n; ++r) s += std::abs(shap.values.at(r, j));
        reports.importance.push_back({name_of(j), s / static_cast<double>(n)});
    }
    std::stable_sort(reports.importance.begin(), reports.importance.end(),
                     [](const ShapImportanceEntry& a, const ShapImportanceEntry& b) {
                         return a.mean_abs > b.mean_abs;
                     });

    reports.dependence.resize(d);
    for (size_t j = 0; j < d; ++j) {
        double lo = X_explain.at(0, j), hi = lo;
        for (size_t r = 0; r < n; ++r) {
            lo = std::min(lo, X_explain.at(r, j));
            hi = std::max(hi, X_explain.at(r, j));
        }
        double span = hi - lo;
        for (size_t r = 0; r < n; ++r) {
            double v = X_explain.at(r, j);
            reports.dependence[j].push_back({v, shap.values.at(r, j)});
            double norm = span > 0 ? (v - lo) / span : 0.5;
            reports.beeswarm.push_back({r, j, shap.values.at(r, j), norm});
        }
    }

    std::vector<size_t> by_error(n);
    std::iota(by_error.begin(), by_error.end(), size_t(0));
    std::stable_sort(by_error.begin(), by_error.end(), [&](size_t a, size_t b) {
        return std::abs(predictions[a] - actuals[a]) < std::abs(predictions[b] - actuals[b]);
    });

    auto record_for = [&](size_t r) {
        DecisionRecord rec;
        rec.row = r;
        rec.prediction = predictions[r];
        rec.actual = actuals[r];
        std::vector<size_t> order(d);
        std::iota(order.begin(), order.end(), size_t(0));
        std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            return std::abs(shap.values.at(r, a)) > std::abs(shap.values.at(r, b));
        });
        double running = shap.base_value;
        for (size_t j : order) {
            running += shap.values.at(r, j);
            rec.steps.push_back({name_of(j), shap.values.at(r, j), running});
        }
        return rec;
    };
    for (size_t i = 0; i < k; ++i) reports.best.push_back(record_for(by_error[i]));
    for (size_t i = 0; i < k; ++i) {
        reports.worst.push_back(record_for(by_error[n - 1 - i]));
    }
    return reports;
}

std::vector<std::pair<std::string, double>> linear_coefficients(
    const FittedModel& model, const std::vector<std::string>& names) {
    const auto* m = std::get_if<LinearModel>(&model.model);
    if (m == nullptr) throw NotLinearError(family_name(model.spec.family));
    if (names.size() != m->coef.size()) throw LengthMismatchError(names.size(), m->coef.size());
    std::vector<std::pair<std::string, double>> out;
    out.emplace_back("(intercept)", m->intercept);
    for (size_t j = 0; j < names.size(); ++j) out.emplace_back(names[j], m->coef[j]);
    return out;
}

}  // namespace fatml
