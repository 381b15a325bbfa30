#include "fatml/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fatml/errors.hpp"
#include "fatml/rng.hpp"

namespace fatml {

namespace {

// Per-feature ascending cut thresholds; bin k holds values in
// (cuts[k-1], cuts[k]], the last bin is open above.
struct BinMap {
    std::vector<std::vector<double>> cuts;

    size_t bin_of(size_t feature, double v) const {
        const auto& c = cuts[feature];
        return static_cast<size_t>(std::lower_bound(c.begin(), c.end(), v) - c.begin());
    }
    size_t n_bins(size_t feature) const { return cuts[feature].size() + 1; }
};

BinMap fit_bins(const Matrix& X, size_t n_bins) {
    BinMap bm;
    bm.cuts.resize(X.n_cols);
    for (size_t f = 0; f < X.n_cols; ++f) {
        std::vector<double> v = X.column(f);
        std::sort(v.begin(), v.end());
        std::vector<double> distinct;
        for (double x : v) {
            if (distinct.empty() || x != distinct.back()) distinct.push_back(x);
        }
        auto& cuts = bm.cuts[f];
        if (distinct.size() <= n_bins) {
            for (size_t i = 0; i + 1 < distinct.size(); ++i) {
                cuts.push_back(0.5 * (distinct[i] + distinct[i + 1]));
            }
        } else {
            // quantile picks, value itself as the inclusive upper edge
            for (size_t k = 1; k < n_bins; ++k) {
                cuts.push_back(v[k * v.size() / n_bins]);
            }
            cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        }
    }
    return bm;
}

struct NodeSplit {
    bool found = false;
    double gain = 0;
    size_t feature = 0;
    size_t cut_index = 0;  // split sends bin <= cut_index left
};

struct LeafCandidate {
    std::vector<size_t> rows;
    int32_t node = -1;  // index into tree.nodes
    size_t depth = 0;
    double sum = 0;
    NodeSplit split;
};

struct StageBuilder {
    const Matrix& X;
    const std::vector<double>& grad;  // residuals
    const BinMap& bins;
    const std::vector<std::vector<uint16_t>>& binned;  // [feature][row]
    const GbdtParams& params;
    Rng node_rng_base;
    size_t node_counter = 0;

    double leaf_value(double sum, size_t n) const {
        return sum / (static_cast<double>(n) + params.reg_lambda);
    }
    double score(double g, size_t n) const {
        return g * g / (static_cast<double>(n) + params.reg_lambda);
    }

    NodeSplit best_split(const std::vector<size_t>& rows, double sum) {
        NodeSplit best;
        size_t d = X.n_cols;
        std::vector<size_t> features(d);
        std::iota(features.begin(), features.end(), size_t(0));
        if (params.feature_fraction < 1.0) {
            size_t k = std::max<size_t>(
                1, static_cast<size_t>(
                       std::lround(params.feature_fraction * static_cast<double>(d))));
            Rng rng = node_rng_base.stream(node_counter);
            for (size_t i = 0; i < k && i < d; ++i) {
                size_t j = i + static_cast<size_t>(rng.below(d - i));
                std::swap(features[i], features[j]);
            }
            features.resize(std::min(k, d));
            std::sort(features.begin(), features.end());
        }
        ++node_counter;

        double parent_score = score(sum, rows.size());
        std::vector<double> bin_sum;
        std::vector<size_t> bin_cnt;
        for (size_t f : features) {
            size_t nb = bins.n_bins(f);
            if (nb < 2) continue;
            bin_sum.assign(nb, 0.0);
            bin_cnt.assign(nb, 0);
            for (size_t r : rows) {
                size_t b = binned[f][r];
                bin_sum[b] += grad[r];
                ++bin_cnt[b];
            }
            double lsum = 0;
            size_t lcnt = 0;
            for (size_t b = 0; b + 1 < nb; ++b) {
                lsum += bin_sum[b];
                lcnt += bin_cnt[b];
                if (lcnt < params.min_data_in_leaf) continue;
                size_t rcnt = rows.size() - lcnt;
                if (rcnt < params.min_data_in_leaf) break;
                if (lcnt == 0 || rcnt == 0) continue;
                double gain = score(lsum, lcnt) + score(sum - lsum, rcnt) - parent_score;
                if (gain > 1e-12 && gain > best.gain) {
                    best.found = true;
                    best.gain = gain;
                    best.feature = f;
                    best.cut_index = b;
                }
            }
        }
        return best;
    }

    void make_children(Tree& tree, LeafCandidate& cand, LeafCandidate& left,
                       LeafCandidate& right) {
        const NodeSplit& sp = cand.split;
        double thr = bins.cuts[sp.feature][sp.cut_index];
        for (size_t r : cand.rows) {
            if (binned[sp.feature][r] <= sp.cut_index) {
                left.rows.push_back(r);
                left.sum += grad[r];
            } else {
                right.rows.push_back(r);
                right.sum += grad[r];
            }
        }
        left.depth = right.depth = cand.depth + 1;
        left.node = static_cast<int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        right.node = static_cast<int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();

        // index after growing: emplace_back may reallocate the node storage
        auto& parent = tree.nodes[static_cast<size_t>(cand.node)];
        parent.feature = static_cast<int32_t>(sp.feature);
        parent.threshold = thr;
        parent.left = left.node;
        parent.right = right.node;
        for (LeafCandidate* c : {&left, &right}) {
            auto& n = tree.nodes[static_cast<size_t>(c->node)];
            n.value = leaf_value(c->sum, c->rows.size());
            n.n_samples = static_cast<uint32_t>(c->rows.size());
        }
    }

    Tree build_depthwise(std::vector<size_t> rows) {
        Tree tree;
        LeafCandidate root;
        root.rows = std::move(rows);
        root.sum = 0;
        for (size_t r : root.rows) root.sum += grad[r];
        root.node = 0;
        tree.nodes.emplace_back();
        tree.nodes[0].value = leaf_value(root.sum, root.rows.size());
        tree.nodes[0].n_samples = static_cast<uint32_t>(root.rows.size());

        std::vector<LeafCandidate> open;
        open.push_back(std::move(root));
        while (!open.empty()) {
            LeafCandidate cand = std::move(open.back());
            open.pop_back();
            bool depth_ok = params.max_depth == 0 || cand.depth < params.max_depth;
            if (!depth_ok || cand.rows.size() < 2 * params.min_data_in_leaf) continue;
            cand.split = best_split(cand.rows, cand.sum);
            if (!cand.split.found) continue;
            LeafCandidate left, right;
            make_children(tree, cand, left, right);
            // right first so the left child is processed (and numbered) first
            open.push_back(std::move(right));
            open.push_back(std::move(left));
        }
        return tree;
    }

    Tree build_leafwise(std::vector<size_t> rows) {
        Tree tree;
        LeafCandidate root;
        root.rows = std::move(rows);
        for (size_t r : root.rows) root.sum += grad[r];
        root.node = 0;
        tree.nodes.emplace_back();
        tree.nodes[0].value = leaf_value(root.sum, root.rows.size());
        tree.nodes[0].n_samples = static_cast<uint32_t>(root.rows.size());
        root.split = best_split(root.rows, root.sum);

        std::vector<LeafCandidate> open;
        open.push_back(std::move(root));
        size_t leaves = 1;
        while (leaves < params.num_leaves) {
            // highest gain wins; ties go to the earliest created leaf
            size_t best = open.size();
            for (size_t i = 0; i < open.size(); ++i) {
                if (!open[i].split.found) continue;
                if (best == open.size() || open[i].split.gain > open[best].split.gain) {
                    best = i;
                }
            }
            if (best == open.size()) break;
            LeafCandidate cand = std::move(open[best]);
            open.erase(open.begin() + static_cast<long>(best));
            LeafCandidate left, right;
            make_children(tree, cand, left, right);
            left.split = best_split(left.rows, left.sum);
            right.split = best_split(right.rows, right.sum);
            open.push_back(std::move(left));
            open.push_back(std::move(right));
            ++leaves;
        }
        return tree;
    }
};

double rmse_of(const std::vector<double>& a, const std::vector<double>& b) {
    double ss = 0;
    for (size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(ss / static_cast<double>(a.size()));
}

}  // namespace

GbdtModel train_gbdt(const Matrix& X, const std::vector<double>& y, const GbdtParams& params,
                     uint64_t seed, std::optional<ValidationRef> validation,
                     std::vector<TrainLogRow>* log_out) {
    if (X.n_rows != y.size()) throw LengthMismatchError(X.n_rows, y.size());
    if (X.n_rows < 2) throw TooFewRowsError(X.n_rows, 2);

    BinMap bins = fit_bins(X, params.n_bins);
    std::vector<std::vector<uint16_t>> binned(X.n_cols, std::vector<uint16_t>(X.n_rows));
    for (size_t f = 0; f < X.n_cols; ++f) {
        for (size_t r = 0; r < X.n_rows; ++r) {
            binned[f][r] = static_cast<uint16_t>(bins.bin_of(f, X.at(r, f)));
        }
    }

    GbdtModel model;
    model.learning_rate = params.learning_rate;
    model.init = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());

    std::vector<double> pred(X.n_rows, model.init);
    std::vector<double> grad(X.n_rows);
    std::vector<double> valid_pred;
    if (validation) valid_pred.assign(validation->y->size(), model.init);

    Rng base = Rng(seed).stream("gbdt");
    double best_valid = std::numeric_limits<double>::infinity();
    size_t best_iter = 0;

    for (size_t t = 0; t < params.n_estimators; ++t) {
        for (size_t r = 0; r < X.n_rows; ++r) grad[r] = y[r] - pred[r];

        std::vector<size_t> rows(X.n_rows);
        std::iota(rows.begin(), rows.end(), size_t(0));
        if (params.subsample < 1.0) {
            Rng rng = base.stream("stage").stream(t);
            rng.shuffle(rows);
            size_t keep = std::max<size_t>(
                1, static_cast<size_t>(
                       std::lround(params.subsample * static_cast<double>(X.n_rows))));
            rows.resize(std::min(keep, rows.size()));
            std::sort(rows.begin(), rows.end());
        }

        StageBuilder sb{X,      grad, bins, binned,
                        params, base.stream("node").stream(t), 0};
        Tree tree = params.num_leaves > 0 ? sb.build_leafwise(std::move(rows))
                                          : sb.build_depthwise(std::move(rows));

        for (size_t r = 0; r < X.n_rows; ++r) {
            pred[r] += params.learning_rate * tree.predict_row(X.row(r));
        }
        model.stages.push_back(std::move(tree));

        TrainLogRow row;
        row.iteration = t + 1;
        row.train_metric = rmse_of(y, pred);
        row.valid_metric = std::numeric_limits<double>::quiet_NaN();
        if (validation) {
            for (size_t r = 0; r < valid_pred.size(); ++r) {
                valid_pred[r] += params.learning_rate *
                                 model.stages.back().predict_row(validation->X->row(r));
            }
            row.valid_metric = rmse_of(*validation->y, valid_pred);
            if (row.valid_metric < best_valid) {
                best_valid = row.valid_metric;
                best_iter = t + 1;
            }
        }
        if (log_out) log_out->push_back(row);

        if (validation && params.early_stopping_rounds > 0 &&
            (t + 1) - best_iter >= params.early_stopping_rounds) {
            break;
        }
    }

    if (validation) {
        model.best_iteration = best_iter == 0 ? model.stages.size() : best_iter;
        if (params.early_stopping_rounds > 0 && model.best_iteration < model.stages.size()) {
            model.stages.resize(model.best_iteration);
        }
    } else {
        model.best_iteration = model.stages.size();
    }
    return model;
}

}  // namespace fatml
