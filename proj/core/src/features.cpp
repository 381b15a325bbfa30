#include "fatml/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "fatml/errors.hpp"
#include "fatml/parallel.hpp"
#include "fatml/rng.hpp"
#include "fatml/tree.hpp"

namespace fatml {

namespace {

bool is_constant(const Matrix& X, size_t c) {
    double first = X.at(0, c);
    for (size_t r = 1; r < X.n_rows; ++r) {
        if (X.at(r, c) != first) return false;
    }
    return true;
}

double pearson(const Matrix& X, size_t a, size_t b) {
    const size_t n = X.n_rows;
    double ma = 0, mb = 0;
    for (size_t r = 0; r < n; ++r) {
        ma += X.at(r, a);
        mb += X.at(r, b);
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0, saa = 0, sbb = 0;
    for (size_t r = 0; r < n; ++r) {
        double da = X.at(r, a) - ma;
        double db = X.at(r, b) - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    double r = sab / std::sqrt(saa * sbb);
    return std::clamp(r, -1.0, 1.0);
}

}  // namespace

CorrelationResult correlation_matrix(const Matrix& X, const std::vector<std::string>& names) {
    if (X.n_cols != names.size()) throw WidthMismatchError(names.size(), X.n_cols);
    if (X.n_rows < 2) throw TooFewRowsError(X.n_rows, 2);

    CorrelationResult result;
    std::vector<size_t> cols;
    for (size_t c = 0; c < X.n_cols; ++c) {
        if (is_constant(X, c)) {
            result.constant_columns.push_back(names[c]);
        } else {
            cols.push_back(c);
            result.names.push_back(names[c]);
        }
    }
    const size_t d = cols.size();
    result.r = Matrix(d, d);
    for (size_t i = 0; i < d; ++i) {
        result.r.at(i, i) = 1.0;
        for (size_t j = i + 1; j < d; ++j) {
            double r = pearson(X, cols[i], cols[j]);
            result.r.at(i, j) = r;
            result.r.at(j, i) = r;
        }
    }
    return result;
}

std::vector<VifEntry> compute_vif(const Matrix& X, const std::vector<std::string>& names) {
    if (X.n_cols != names.size()) throw WidthMismatchError(names.size(), X.n_cols);
    const size_t n = X.n_rows;
    const size_t d = X.n_cols;
    if (n <= d) throw TooFewRowsError(n, d + 1);

    std::vector<VifEntry> entries(d);
    for (size_t i = 0; i < d; ++i) {
        Eigen::MatrixXd A(n, d);  // intercept plus the other d-1 columns
        Eigen::VectorXd b(n);
        for (size_t r = 0; r < n; ++r) {
            A(static_cast<Eigen::Index>(r), 0) = 1.0;
            size_t k = 1;
            for (size_t c = 0; c < d; ++c) {
                if (c == i) continue;
                A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k++)) = X.at(r, c);
            }
            b(static_cast<Eigen::Index>(r)) = X.at(r, i);
        }
        double mean = b.mean();
        double ss_tot = (b.array() - mean).square().sum();

        VifEntry& e = entries[i];
        e.feature = names[i];
        if (ss_tot <= 0) {
            // constant column: the design is singular for this response
            e.r_squared = 1.0;
            e.vif = std::numeric_limits<double>::infinity();
            continue;
        }
        Eigen::VectorXd beta = A.completeOrthogonalDecomposition().solve(b);
        double ss_res = (b - A * beta).squaredNorm();
        double r2 = 1.0 - ss_res / ss_tot;
        e.r_squared = std::clamp(r2, 0.0, 1.0);
        if (e.r_squared >= 1.0 - 1e-12) {
            e.vif = std::numeric_limits<double>::infinity();
        } else {
            e.vif = std::max(1.0, 1.0 / (1.0 - e.r_squared));
        }
    }
    std::sort(entries.begin(), entries.end(), [](const VifEntry& a, const VifEntry& b) {
        if (a.vif != b.vif) return a.vif > b.vif;
        return a.feature < b.feature;
    });
    return entries;
}

VifScreenResult vif_screen(const Matrix& X, const std::vector<std::string>& names,
                           double threshold) {
    if (threshold <= 1.0) throw ConfigError("vif threshold must exceed 1");

    VifScreenResult result;
    std::vector<size_t> cols(X.n_cols);
    std::iota(cols.begin(), cols.end(), size_t(0));

    while (!cols.empty()) {
        Matrix sub = X.select_cols(cols);
        std::vector<std::string> sub_names;
        sub_names.reserve(cols.size());
        for (size_t c : cols) sub_names.push_back(names[c]);

        std::vector<VifEntry> entries = compute_vif(sub, sub_names);
        result.rounds.push_back(entries);
        if (entries.front().vif <= threshold) break;

        const std::string& victim = entries.front().feature;
        result.dropped.push_back(victim);
        for (size_t k = 0; k < cols.size(); ++k) {
            if (names[cols[k]] == victim) {
                cols.erase(cols.begin() + static_cast<long>(k));
                break;
            }
        }
    }
    for (size_t c : cols) result.kept.push_back(names[c]);
    return result;
}

double derive_overhang(double w_bp, double l_s) { return (w_bp - l_s) / 2.0; }

std::string golden_op_name(GoldenOp op) {
    return op == GoldenOp::subtract ? "subtract" : "divide";
}

namespace {

double guarded_denominator(double d) {
    double sign = d < 0 ? -1.0 : 1.0;  // zero treated as positive
    return sign * std::max(std::abs(d), 1e-9);
}

std::vector<double> combine(const Matrix& X, size_t lhs, size_t rhs, GoldenOp op) {
    std::vector<double> out(X.n_rows);
    if (op == GoldenOp::subtract) {
        for (size_t r = 0; r < X.n_rows; ++r) out[r] = X.at(r, lhs) - X.at(r, rhs);
    } else {
        for (size_t r = 0; r < X.n_rows; ++r) {
            out[r] = X.at(r, lhs) / guarded_denominator(X.at(r, rhs));
        }
    }
    return out;
}

size_t index_of_name(const std::vector<std::string>& names, const std::string& name) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw MissingColumnError(name);
    return static_cast<size_t>(it - names.begin());
}

}  // namespace

std::vector<double> GoldenFeature::materialize(const Matrix& X,
                                               const std::vector<std::string>& names) const {
    return combine(X, index_of_name(names, lhs), index_of_name(names, rhs), op);
}

std::vector<GoldenFeature> discover_golden(const Matrix& X, const std::vector<double>& y,
                                           const std::vector<std::string>& names,
                                           uint64_t seed, int jobs) {
    if (X.n_cols != names.size()) throw WidthMismatchError(names.size(), X.n_cols);
    if (X.n_rows != y.size()) throw LengthMismatchError(X.n_rows, y.size());
    if (X.n_cols < 2) throw DegenerateInputError("golden discovery needs at least 2 columns");
    if (X.n_rows < 20) throw TooFewRowsError(X.n_rows, 20);

    // pair candidates in name order so column order cannot change results
    std::vector<size_t> order(X.n_cols);
    std::iota(order.begin(), order.end(), size_t(0));
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return names[a] < names[b]; });

    struct Candidate {
        size_t lhs, rhs;
        GoldenOp op;
    };
    std::vector<Candidate> candidates;
    for (size_t a = 0; a < order.size(); ++a) {
        for (size_t b = a + 1; b < order.size(); ++b) {
            candidates.push_back({order[a], order[b], GoldenOp::subtract});
            candidates.push_back({order[a], order[b], GoldenOp::divide});
            candidates.push_back({order[b], order[a], GoldenOp::divide});
        }
    }

    // scores live in a flat array; feature structs are built only for the
    // handful of winners, so huge candidate sets stay cheap to hold
    const size_t n = X.n_rows;
    std::vector<double> scores(candidates.size());
    parallel_for(candidates.size(), jobs, [&](size_t ci) {
        const Candidate& c = candidates[ci];
        std::vector<double> v = combine(X, c.lhs, c.rhs, c.op);
        Matrix one(n, 1);
        for (size_t r = 0; r < n; ++r) one.at(r, 0) = v[r];

        Rng rng = Rng(seed).stream("golden").stream(names[c.lhs]).stream(names[c.rhs]).stream(
            golden_op_name(c.op));
        std::vector<size_t> idx(n);
        std::iota(idx.begin(), idx.end(), size_t(0));
        rng.shuffle(idx);
        size_t n_train = n / 2;
        std::vector<size_t> train(idx.begin(), idx.begin() + static_cast<long>(n_train));

        TreeParams params;
        params.max_depth = 3;
        params.min_samples_leaf = 5;
        Tree tree = build_tree(one, y, train, params, rng);

        double ss = 0;
        for (size_t k = n_train; k < n; ++k) {
            double e = tree.predict_row(one.row(idx[k])) - y[idx[k]];
            ss += e * e;
        }
        scores[ci] = ss / static_cast<double>(n - n_train);
    });

    auto recipe_of = [&](size_t ci) {
        const Candidate& c = candidates[ci];
        return names[c.lhs] + " " + golden_op_name(c.op) + " " + names[c.rhs];
    };
    std::vector<size_t> rank(candidates.size());
    std::iota(rank.begin(), rank.end(), size_t(0));
    auto better = [&](size_t a, size_t b) {
        if (scores[a] != scores[b]) return scores[a] < scores[b];
        return recipe_of(a) < recipe_of(b);
    };

    long want = std::llround(0.05 * static_cast<double>(X.n_cols));
    want = std::clamp(want, 5L, 50L);
    size_t count = std::min(rank.size(), static_cast<size_t>(want));
    std::partial_sort(rank.begin(), rank.begin() + static_cast<long>(count), rank.end(),
                      better);

    std::vector<GoldenFeature> selected(count);
    for (size_t k = 0; k < count; ++k) {
        const Candidate& c = candidates[rank[k]];
        GoldenFeature& f = selected[k];
        f.lhs = names[c.lhs];
        f.rhs = names[c.rhs];
        f.op = c.op;
        f.score = scores[rank[k]];
        f.recipe = recipe_of(rank[k]);
    }
    return selected;
}

std::string audit_reason_name(AuditReason reason) {
    switch (reason) {
        case AuditReason::indicator_arithmetic: return "indicator_arithmetic";
        case AuditReason::mixed_kind: return "mixed_kind";
        case AuditReason::unit_mismatch: return "unit_mismatch";
    }
    throw ConfigError("unknown audit reason");
}

namespace {

struct SideInfo {
    bool indicator = false;
    ColumnKind kind = ColumnKind::real;
    std::string unit;
};

SideInfo resolve_side(const std::string& name, const FeatureSchema& schema) {
    SideInfo info;
    std::string base = name;
    auto eq = name.find('=');
    if (eq != std::string::npos) {
        base = name.substr(0, eq);
        info.indicator = true;
        info.unit.clear();
    }
    const ColumnSpec* spec = schema.find(base);
    if (spec == nullptr) throw MissingColumnError(base);
    info.kind = spec->kind;
    if (!info.indicator) {
        info.indicator = spec->kind == ColumnKind::binary;
        info.unit = spec->unit;
    }
    return info;
}

}  // namespace

std::vector<AuditFlag> audit_golden(const std::vector<GoldenFeature>& features,
                                    const FeatureSchema& schema, AuditPolicy policy) {
    std::vector<AuditFlag> flags;
    for (const GoldenFeature& f : features) {
        SideInfo lhs = resolve_side(f.lhs, schema);
        SideInfo rhs = resolve_side(f.rhs, schema);
        if (lhs.indicator || rhs.indicator) {
            flags.push_back({f, AuditReason::indicator_arithmetic});
        } else if (lhs.kind != rhs.kind) {
            flags.push_back({f, AuditReason::mixed_kind});
        } else if (lhs.unit != rhs.unit &&
                   (f.op == GoldenOp::subtract || policy == AuditPolicy::strict)) {
            flags.push_back({f, AuditReason::unit_mismatch});
        }
    }
    return flags;
}

std::string format_golden_report(const std::vector<GoldenFeature>& features,
                                 const std::vector<AuditFlag>& flags) {
    std::ostringstream out;
    out << "rank\trecipe\tscore\taudit\n";
    for (size_t i = 0; i < features.size(); ++i) {
        const GoldenFeature& f = features[i];
        std::string audit = "ok";
        for (const AuditFlag& flag : flags) {
            if (flag.feature.recipe == f.recipe) {
                audit = audit_reason_name(flag.reason);
                break;
            }
        }
        out << (i + 1) << "\t" << f.recipe << "\t" << format_double(f.score) << "\t" << audit
            << "\n";
    }
    return out.str();
}

}  // namespace fatml
