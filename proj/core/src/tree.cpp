#include "fatml/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fatml/parallel.hpp"

namespace fatml {

namespace {

struct SplitChoice {
    bool found = false;
    double gain = 0.0;
    size_t feature = 0;
    double threshold = 0.0;
};

struct Builder {
    const Matrix& X;
    const std::vector<double>& y;
    const TreeParams& params;
    Rng rng;
    Tree tree;

    std::vector<size_t> sample_features() {
        size_t d = X.n_cols;
        size_t k = std::max<size_t>(
            1, static_cast<size_t>(std::lround(params.max_features * static_cast<double>(d))));
        if (k > d) k = d;
        std::vector<size_t> all(d);
        std::iota(all.begin(), all.end(), size_t(0));
        if (k == d) return all;
        // partial Fisher-Yates, then ascending order so tie-breaks stay by index
        for (size_t i = 0; i < k; ++i) {
            size_t j = i + static_cast<size_t>(rng.below(d - i));
            std::swap(all[i], all[j]);
        }
        all.resize(k);
        std::sort(all.begin(), all.end());
        return all;
    }

    SplitChoice best_exact_split(const std::vector<size_t>& rows,
                                 const std::vector<size_t>& features, double sse_parent) {
        SplitChoice best;
        size_t n = rows.size();
        std::vector<std::pair<double, double>> vals(n);  // (x, y)
        for (size_t f : features) {
            for (size_t i = 0; i < n; ++i) {
                vals[i] = {X.at(rows[i], f), y[rows[i]]};
            }
            std::sort(vals.begin(), vals.end());
            if (vals.front().first == vals.back().first) continue;

            double total_sum = 0, total_sq = 0;
            for (const auto& [xv, yv] : vals) {
                total_sum += yv;
                total_sq += yv * yv;
            }
            double left_sum = 0, left_sq = 0;
            for (size_t i = 1; i < n; ++i) {
                left_sum += vals[i - 1].second;
                left_sq += vals[i - 1].second * vals[i - 1].second;
                if (vals[i].first == vals[i - 1].first) continue;
                size_t nl = i, nr = n - i;
                if (nl < params.min_samples_leaf || nr < params.min_samples_leaf) continue;
                double right_sum = total_sum - left_sum;
                double right_sq = total_sq - left_sq;
                double sse = (left_sq - left_sum * left_sum / static_cast<double>(nl)) +
                             (right_sq - right_sum * right_sum / static_cast<double>(nr));
                double gain = sse_parent - sse;
                if (gain > 0 && gain > best.gain) {
                    best.found = true;
                    best.gain = gain;
                    best.feature = f;
                    best.threshold = 0.5 * (vals[i - 1].first + vals[i].first);
                }
            }
        }
        return best;
    }

    SplitChoice best_random_split(const std::vector<size_t>& rows,
                                  const std::vector<size_t>& features, double sse_parent) {
        SplitChoice best;
        size_t n = rows.size();
        for (size_t f : features) {
            double lo = X.at(rows[0], f), hi = lo;
            for (size_t r : rows) {
                lo = std::min(lo, X.at(r, f));
                hi = std::max(hi, X.at(r, f));
            }
            if (lo == hi) continue;
            double thr = rng.uniform(lo, hi);
            double lsum = 0, lsq = 0, rsum = 0, rsq = 0;
            size_t nl = 0;
            for (size_t r : rows) {
                double yv = y[r];
                if (X.at(r, f) <= thr) {
                    lsum += yv;
                    lsq += yv * yv;
                    ++nl;
                } else {
                    rsum += yv;
                    rsq += yv * yv;
                }
            }
            size_t nr = n - nl;
            if (nl < params.min_samples_leaf || nr < params.min_samples_leaf) continue;
            double sse = (lsq - lsum * lsum / static_cast<double>(nl)) +
                         (rsq - rsum * rsum / static_cast<double>(nr));
            double gain = sse_parent - sse;
            if (gain > best.gain && gain > 0) {
                best.found = true;
                best.gain = gain;
                best.feature = f;
                best.threshold = thr;
            }
        }
        return best;
    }

    int32_t build(const std::vector<size_t>& rows, size_t depth) {
        double sum = 0, sq = 0;
        for (size_t r : rows) {
            sum += y[r];
            sq += y[r] * y[r];
        }
        double n = static_cast<double>(rows.size());
        double mean = sum / n;
        double sse = sq - sum * sum / n;

        auto node_index = static_cast<int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.back().value = mean;
        tree.nodes.back().n_samples = static_cast<uint32_t>(rows.size());

        bool depth_ok = params.max_depth == 0 || depth < params.max_depth;
        if (!depth_ok || rows.size() < params.min_samples_split || sse <= 0) {
            return node_index;
        }

        std::vector<size_t> features = sample_features();
        SplitChoice choice = params.random_thresholds
                                 ? best_random_split(rows, features, sse)
                                 : best_exact_split(rows, features, sse);
        if (!choice.found) return node_index;

        std::vector<size_t> left_rows, right_rows;
        for (size_t r : rows) {
            (X.at(r, choice.feature) <= choice.threshold ? left_rows : right_rows).push_back(r);
        }
        tree.nodes[static_cast<size_t>(node_index)].feature =
            static_cast<int32_t>(choice.feature);
        tree.nodes[static_cast<size_t>(node_index)].threshold = choice.threshold;
        int32_t left = build(left_rows, depth + 1);
        int32_t right = build(right_rows, depth + 1);
        tree.nodes[static_cast<size_t>(node_index)].left = left;
        tree.nodes[static_cast<size_t>(node_index)].right = right;
        return node_index;
    }
};

}  // namespace

Tree build_tree(const Matrix& X, const std::vector<double>& y,
                const std::vector<size_t>& rows, const TreeParams& params, Rng rng) {
    if (rows.empty()) return {};
    Builder b{X, y, params, rng, {}};
    b.build(rows, 0);
    return std::move(b.tree);
}

Forest build_forest(const Matrix& X, const std::vector<double>& y, const ForestParams& params,
                    uint64_t seed, size_t jobs) {
    Forest f;
    f.trees.resize(params.n_estimators);
    Rng base = Rng(seed).stream("forest");
    parallel_for(params.n_estimators, jobs, [&](size_t t) {
        Rng tree_rng = base.stream(t);
        std::vector<size_t> rows(X.n_rows);
        if (params.bootstrap) {
            for (size_t i = 0; i < X.n_rows; ++i) {
                rows[i] = static_cast<size_t>(tree_rng.below(X.n_rows));
            }
        } else {
            std::iota(rows.begin(), rows.end(), size_t(0));
        }
        f.trees[t] = build_tree(X, y, rows, params.tree, tree_rng);
    });
    return f;
}

}  // namespace fatml
