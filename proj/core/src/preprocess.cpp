#include "fatml/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fatml/rng.hpp"

namespace fatml {

double yj_forward(double x, double lambda) {
    if (lambda == 1.0) return x;  // exact identity, both branches reduce to it
    // expm1/log1p forms stay accurate for small lambda and small |x|
    if (x >= 0.0) {
        if (lambda == 0.0) return std::log1p(x);
        return std::expm1(lambda * std::log1p(x)) / lambda;
    }
    double two_minus = 2.0 - lambda;
    if (two_minus == 0.0) return -std::log1p(-x);
    return -std::expm1(two_minus * std::log1p(-x)) / two_minus;
}

double yj_inverse(double x, double lambda) {
    if (lambda == 1.0) return x;
    // the transform preserves sign, so the branch is decided by x itself
    if (x >= 0.0) {
        if (lambda == 0.0) return std::expm1(x);
        return std::expm1(std::log1p(lambda * x) / lambda);
    }
    double two_minus = 2.0 - lambda;
    if (two_minus == 0.0) return -std::expm1(-x);
    return -std::expm1(std::log1p(-two_minus * x) / two_minus);
}

std::vector<double> yj_transform(const std::vector<double>& values, double lambda,
                                 TransformDirection direction) {
    std::vector<double> out(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
        out[i] = direction == TransformDirection::forward ? yj_forward(values[i], lambda)
                                                          : yj_inverse(values[i], lambda);
    }
    return out;
}

double yj_log_likelihood(const std::vector<double>& values, double lambda) {
    const double n = static_cast<double>(values.size());
    double sum = 0, jac = 0;
    std::vector<double> t(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
        t[i] = yj_forward(values[i], lambda);
        sum += t[i];
        double ax = std::abs(values[i]);
        double s = values[i] >= 0 ? 1.0 : -1.0;
        jac += s * std::log1p(ax);
    }
    double mean = sum / n;
    double ss = 0;
    for (double v : t) ss += (v - mean) * (v - mean);
    double var = ss / n;  // likelihood variance, denominator n
    if (!(var > 0)) return -std::numeric_limits<double>::infinity();
    return -0.5 * n * std::log(var) + (lambda - 1.0) * jac;
}

double yj_fit_lambda(const std::vector<double>& values) {
    if (values.size() < 3) throw TooFewRowsError(values.size(), 3);
    double lo = values[0], hi = values[0];
    for (double v : values) {
        if (!std::isfinite(v)) throw DegenerateInputError("non-finite value in power-transform fit");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo == hi) throw DegenerateInputError("constant vector in power-transform fit");

    // coarse scan brackets the maximizer, golden-section polishes it
    const double kLo = -5.0, kHi = 5.0, kStep = 0.25;
    double best_lambda = kLo, best_ll = -std::numeric_limits<double>::infinity();
    for (double l = kLo; l <= kHi + 1e-12; l += kStep) {
        double ll = yj_log_likelihood(values, l);
        if (ll > best_ll) {
            best_ll = ll;
            best_lambda = l;
        }
    }
    double a = std::max(kLo, best_lambda - kStep);
    double b = std::min(kHi, best_lambda + kStep);
    const double gr = 0.6180339887498949;
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = yj_log_likelihood(values, x1);
    double f2 = yj_log_likelihood(values, x2);
    while (b - a > 1e-7) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = yj_log_likelihood(values, x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = yj_log_likelihood(values, x1);
        }
    }
    double lambda = 0.5 * (a + b);
    if (yj_log_likelihood(values, 1.0) >= yj_log_likelihood(values, lambda)) return 1.0;
    return lambda;
}

std::vector<ImputeSpec> build_default_impute_specs(const FeatureSchema& schema) {
    std::vector<ImputeSpec> specs;
    for (const auto& col : schema.columns) {
        if (schema.is_target(col.name)) continue;
        ImputeSpec s;
        s.column = col.name;
        if (col.is_real()) {
            static const std::vector<std::string> pool_cols = {"R_eH", "R_m",        "R",
                                                               "f_T",  "R_eH_filler", "R_m_filler"};
            bool pooled = std::find(pool_cols.begin(), pool_cols.end(), col.name) !=
                          pool_cols.end();
            s.strategy = pooled ? ImputeStrategy::random_sample : ImputeStrategy::median;
        } else if (col.name == "Post_Treat") {
            s.strategy = ImputeStrategy::constant;
            s.constant_label = "no weld post-treatment";
        } else if (col.name == "Weld_Type") {
            s.strategy = ImputeStrategy::constant;
            s.constant_label = "Fillet Weld";
        } else if (col.name == "Pre_Treat") {
            s.strategy = ImputeStrategy::constant;
            s.constant_label = "none";
        } else {
            s.strategy = ImputeStrategy::random_sample;
        }
        specs.push_back(std::move(s));
    }
    return specs;
}

namespace {

double median_of_sorted(const std::vector<double>& v) {
    size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Rng impute_stream(uint64_t seed, const std::string& column, size_t row) {
    return Rng(seed).stream("impute").stream(column).stream(row);
}

double impute_real(const FittedImputer& imp, uint64_t seed, const std::string& column,
                   size_t row) {
    switch (imp.strategy) {
        case ImputeStrategy::median:
            return imp.median;
        case ImputeStrategy::constant:
            return imp.constant_real;
        case ImputeStrategy::random_sample: {
            Rng rng = impute_stream(seed, column, row);
            return imp.pool[static_cast<size_t>(rng.below(imp.pool.size()))];
        }
    }
    return imp.median;
}

std::string impute_label(const FittedImputer& imp, uint64_t seed, const std::string& column,
                         size_t row) {
    if (imp.strategy == ImputeStrategy::constant) return imp.constant_label;
    Rng rng = impute_stream(seed, column, row);
    return imp.label_pool[static_cast<size_t>(rng.below(imp.label_pool.size()))];
}

struct EncodedLayout {
    // per schema feature column: offset into the output matrix and width
    std::vector<size_t> offsets;
    std::vector<size_t> widths;
    size_t total = 0;
};

EncodedLayout make_layout(const FittedPipeline& p) {
    EncodedLayout lay;
    for (const auto& col : p.schema.columns) {
        if (p.schema.is_target(col.name)) {
            lay.offsets.push_back(lay.total);
            lay.widths.push_back(0);
            continue;
        }
        size_t width = 1;
        if (!col.is_real()) {
            const auto& enc = p.encoders.at(col.name);
            width = enc.binary ? 1 : enc.levels.size();
        }
        lay.offsets.push_back(lay.total);
        lay.widths.push_back(width);
        lay.total += width;
    }
    return lay;
}

// Raw (pre-standardization) design matrix: imputation plus encoding.
Matrix materialize(const FittedPipeline& p, const Dataset& ds, uint64_t seed) {
    EncodedLayout lay = make_layout(p);
    Matrix X(ds.n_rows(), lay.total);
    for (size_t c = 0; c < p.schema.columns.size(); ++c) {
        const auto& spec = p.schema.columns[c];
        if (p.schema.is_target(spec.name)) continue;
        const ColumnSpec* dspec = ds.schema().find(spec.name);
        if (!dspec) throw SchemaMismatchError("dataset lacks column " + spec.name);
        if (dspec->kind != spec.kind) {
            throw SchemaMismatchError("column kind differs for " + spec.name);
        }
        size_t dc = ds.schema().index_of(spec.name);
        auto imp = p.imputers.find(spec.name);
        size_t off = lay.offsets[c];

        if (spec.is_real()) {
            for (size_t r = 0; r < ds.n_rows(); ++r) {
                double v;
                if (auto cell = ds.real_at(dc, r)) {
                    v = *cell;
                } else {
                    if (imp == p.imputers.end()) {
                        throw SchemaMismatchError("missing value without imputer in column " +
                                                  spec.name);
                    }
                    v = impute_real(imp->second, seed, spec.name, r);
                }
                X.at(r, off) = v;
            }
        } else {
            const auto& enc = p.encoders.at(spec.name);
            for (size_t r = 0; r < ds.n_rows(); ++r) {
                std::string level;
                if (auto cell = ds.label_at(dc, r)) {
                    level = std::string(*cell);
                } else {
                    if (imp == p.imputers.end()) {
                        throw SchemaMismatchError("missing value without imputer in column " +
                                                  spec.name);
                    }
                    level = impute_label(imp->second, seed, spec.name, r);
                }
                if (enc.binary) {
                    X.at(r, off) = level == enc.levels.back() ? 1.0 : 0.0;
                } else {
                    auto it = std::find(enc.levels.begin(), enc.levels.end(), level);
                    if (it != enc.levels.end()) {
                        X.at(r, off + static_cast<size_t>(it - enc.levels.begin())) = 1.0;
                    }
                    // unseen levels leave the whole block at zero
                }
            }
        }
    }
    return X;
}

std::vector<std::string> encoded_names(const FittedPipeline& p) {
    std::vector<std::string> names;
    for (const auto& col : p.schema.columns) {
        if (p.schema.is_target(col.name)) continue;
        if (col.is_real()) {
            names.push_back(col.name);
        } else {
            const auto& enc = p.encoders.at(col.name);
            if (enc.binary) {
                names.push_back(col.name + "=" + enc.levels.back());
            } else {
                for (const auto& l : enc.levels) names.push_back(col.name + "=" + l);
            }
        }
    }
    return names;
}

}  // namespace

FittedPipeline fit_pipeline(const Dataset& train, const std::vector<ImputeSpec>& specs,
                            const std::string& target, uint64_t seed) {
    FittedPipeline p;
    p.schema = train.schema();
    p.target = target;
    p.seed = seed;

    size_t tc = p.schema.index_of(target);
    if (!p.schema.columns[tc].is_real()) {
        throw SchemaMismatchError("target must be a real column: " + target);
    }
    if (train.missing_count(tc) > 0) {
        throw DegenerateInputError("target column has missing values: " + target);
    }

    for (const auto& spec : specs) {
        size_t c = p.schema.index_of(spec.column);
        const auto& col = p.schema.columns[c];
        FittedImputer imp;
        imp.strategy = spec.strategy;
        if (col.is_real()) {
            if (spec.strategy == ImputeStrategy::constant) {
                if (!std::isfinite(spec.constant_real)) {
                    throw ConfigError("non-finite constant fill for " + spec.column);
                }
                imp.constant_real = spec.constant_real;
            } else {
                std::vector<double> observed = train.observed_reals(c);
                if (observed.empty()) throw AllMissingColumnError(spec.column);
                std::sort(observed.begin(), observed.end());
                if (spec.strategy == ImputeStrategy::median) {
                    imp.median = median_of_sorted(observed);
                } else {
                    imp.pool = std::move(observed);
                }
            }
        } else {
            if (spec.strategy == ImputeStrategy::median) {
                throw ConfigError("median imputation is undefined for label column " +
                                  spec.column);
            }
            if (spec.strategy == ImputeStrategy::constant) {
                if (spec.constant_label.empty()) {
                    throw ConfigError("empty constant fill for " + spec.column);
                }
                imp.constant_label = spec.constant_label;
            } else {
                std::vector<std::string> observed;  // sorted multiset, draws follow frequency
                for (size_t r = 0; r < train.n_rows(); ++r) {
                    if (auto l = train.label_at(c, r)) observed.emplace_back(*l);
                }
                if (observed.empty()) throw AllMissingColumnError(spec.column);
                std::sort(observed.begin(), observed.end());
                imp.label_pool = std::move(observed);
            }
        }
        p.imputers[spec.column] = std::move(imp);
    }

    for (size_t c = 0; c < p.schema.columns.size(); ++c) {
        const auto& col = p.schema.columns[c];
        if (col.is_real() || p.schema.is_target(col.name)) continue;
        FittedEncoder enc;
        enc.levels = train.observed_levels(c);
        // a constant fill may introduce a level never observed in train
        auto imp = p.imputers.find(col.name);
        if (imp != p.imputers.end() && imp->second.strategy == ImputeStrategy::constant) {
            if (std::find(enc.levels.begin(), enc.levels.end(), imp->second.constant_label) ==
                enc.levels.end()) {
                enc.levels.push_back(imp->second.constant_label);
                std::sort(enc.levels.begin(), enc.levels.end());
            }
        }
        if (enc.levels.empty()) throw AllMissingColumnError(col.name);
        enc.binary = col.kind == ColumnKind::binary && enc.levels.size() <= 2;
        p.encoders[col.name] = std::move(enc);
    }

    // target chain: decadic log, power transform, standardization
    std::vector<double> y = train.observed_reals(tc);
    for (double v : y) {
        if (!(v > 0)) throw DegenerateInputError("target must be positive for the log transform");
    }
    std::vector<double> logy(y.size());
    for (size_t i = 0; i < y.size(); ++i) logy[i] = std::log10(y[i]);
    p.target_transform.log10 = true;
    p.target_transform.yj_lambda = yj_fit_lambda(logy);
    std::vector<double> t =
        yj_transform(logy, p.target_transform.yj_lambda, TransformDirection::forward);
    double mu = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(t.size());
    double ss = 0;
    for (double v : t) ss += (v - mu) * (v - mu);
    double sigma = std::sqrt(ss / static_cast<double>(t.size() - 1));
    if (!(sigma > 0)) throw DegenerateInputError("constant target after transform");
    p.target_transform.mu = mu;
    p.target_transform.sigma = sigma;

    // feature moments come from the train matrix as materialized with `seed`
    Matrix X = materialize(p, train, seed);
    p.feature_names = encoded_names(p);
    p.feature_mu.assign(X.n_cols, 0.0);
    p.feature_sigma.assign(X.n_cols, 1.0);
    for (size_t j = 0; j < X.n_cols; ++j) {
        double s = 0;
        for (size_t r = 0; r < X.n_rows; ++r) s += X.at(r, j);
        double m = s / static_cast<double>(X.n_rows);
        double varss = 0;
        for (size_t r = 0; r < X.n_rows; ++r) {
            double d = X.at(r, j) - m;
            varss += d * d;
        }
        double sd = X.n_rows > 1 ? std::sqrt(varss / static_cast<double>(X.n_rows - 1)) : 0.0;
        p.feature_mu[j] = m;
        p.feature_sigma[j] = sd > 1e-12 ? sd : 1.0;
    }
    return p;
}

EncodedData apply_pipeline(const FittedPipeline& p, const Dataset& ds, uint64_t seed) {
    Matrix X = materialize(p, ds, seed);
    for (size_t j = 0; j < X.n_cols; ++j) {
        for (size_t r = 0; r < X.n_rows; ++r) {
            X.at(r, j) = (X.at(r, j) - p.feature_mu[j]) / p.feature_sigma[j];
        }
    }

    size_t tc = ds.schema().index_of(p.target);
    std::vector<double> y(ds.n_rows());
    for (size_t r = 0; r < ds.n_rows(); ++r) {
        auto cell = ds.real_at(tc, r);
        if (!cell) throw DegenerateInputError("target column has missing values: " + p.target);
        if (!(*cell > 0)) throw DegenerateInputError("target must be positive");
        double t = yj_forward(std::log10(*cell), p.target_transform.yj_lambda);
        y[r] = (t - p.target_transform.mu) / p.target_transform.sigma;
    }
    return {std::move(X), std::move(y), p.feature_names};
}

double inverse_target_one(const FittedPipeline& p, double y_transformed) {
    double t = y_transformed * p.target_transform.sigma + p.target_transform.mu;
    double logy = yj_inverse(t, p.target_transform.yj_lambda);
    return std::pow(10.0, logy);
}

std::vector<double> inverse_target(const FittedPipeline& p,
                                   const std::vector<double>& y_transformed) {
    std::vector<double> out(y_transformed.size());
    for (size_t i = 0; i < y_transformed.size(); ++i) out[i] = inverse_target_one(p, y_transformed[i]);
    return out;
}

// ---- serialization ----

nlohmann::json schema_to_json(const FeatureSchema& s) {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : s.columns) {
        nlohmann::json jc;
        jc["name"] = c.name;
        jc["kind"] = std::string(to_string(c.kind));
        jc["unit"] = c.unit;
        if (c.range) jc["range"] = {c.range->low, c.range->high};
        if (!c.levels.empty()) jc["levels"] = c.levels;
        cols.push_back(jc);
    }
    return nlohmann::json{{"columns", cols}, {"targets", s.target_names}};
}

FeatureSchema schema_from_json(const nlohmann::json& j) {
    FeatureSchema s;
    for (const auto& jc : j.at("columns")) {
        ColumnSpec c;
        c.name = jc.at("name").get<std::string>();
        c.kind = column_kind_from_string(jc.at("kind").get<std::string>());
        c.unit = jc.at("unit").get<std::string>();
        if (jc.contains("range")) {
            c.range = ValueRange{jc["range"][0].get<double>(), jc["range"][1].get<double>()};
        }
        if (jc.contains("levels")) c.levels = jc["levels"].get<std::vector<std::string>>();
        s.columns.push_back(std::move(c));
    }
    s.target_names = j.at("targets").get<std::vector<std::string>>();
    return s;
}

nlohmann::json FittedPipeline::to_json() const {
    nlohmann::json j;
    j["schema"] = schema_to_json(schema);
    j["target"] = target;
    j["seed"] = seed;
    nlohmann::json jimp = nlohmann::json::object();
    for (const auto& [name, imp] : imputers) {
        nlohmann::json ji;
        switch (imp.strategy) {
            case ImputeStrategy::median:
                ji["strategy"] = "median";
                ji["median"] = imp.median;
                break;
            case ImputeStrategy::random_sample:
                ji["strategy"] = "random_sample";
                if (!imp.pool.empty()) ji["pool"] = imp.pool;
                if (!imp.label_pool.empty()) ji["label_pool"] = imp.label_pool;
                break;
            case ImputeStrategy::constant:
                ji["strategy"] = "constant";
                if (imp.constant_label.empty()) {
                    ji["value"] = imp.constant_real;
                } else {
                    ji["label"] = imp.constant_label;
                }
                break;
        }
        jimp[name] = ji;
    }
    j["imputers"] = jimp;
    nlohmann::json jenc = nlohmann::json::object();
    for (const auto& [name, enc] : encoders) {
        jenc[name] = {{"levels", enc.levels}, {"binary", enc.binary}};
    }
    j["encoders"] = jenc;
    j["target_transform"] = {{"log10", target_transform.log10},
                             {"yj_lambda", target_transform.yj_lambda},
                             {"mu", target_transform.mu},
                             {"sigma", target_transform.sigma}};
    j["feature_names"] = feature_names;
    j["feature_mu"] = feature_mu;
    j["feature_sigma"] = feature_sigma;
    return j;
}

FittedPipeline FittedPipeline::from_json(const nlohmann::json& j) {
    FittedPipeline p;
    p.schema = schema_from_json(j.at("schema"));
    p.target = j.at("target").get<std::string>();
    p.seed = j.at("seed").get<uint64_t>();
    for (const auto& [name, ji] : j.at("imputers").items()) {
        FittedImputer imp;
        std::string strategy = ji.at("strategy").get<std::string>();
        if (strategy == "median") {
            imp.strategy = ImputeStrategy::median;
            imp.median = ji.at("median").get<double>();
        } else if (strategy == "random_sample") {
            imp.strategy = ImputeStrategy::random_sample;
            if (ji.contains("pool")) imp.pool = ji["pool"].get<std::vector<double>>();
            if (ji.contains("label_pool")) {
                imp.label_pool = ji["label_pool"].get<std::vector<std::string>>();
            }
        } else {
            imp.strategy = ImputeStrategy::constant;
            if (ji.contains("label")) {
                imp.constant_label = ji["label"].get<std::string>();
            } else {
                imp.constant_real = ji.at("value").get<double>();
            }
        }
        p.imputers[name] = std::move(imp);
    }
    for (const auto& [name, je] : j.at("encoders").items()) {
        FittedEncoder enc;
        enc.levels = je.at("levels").get<std::vector<std::string>>();
        enc.binary = je.at("binary").get<bool>();
        p.encoders[name] = std::move(enc);
    }
    const auto& tt = j.at("target_transform");
    p.target_transform.log10 = tt.at("log10").get<bool>();
    p.target_transform.yj_lambda = tt.at("yj_lambda").get<double>();
    p.target_transform.mu = tt.at("mu").get<double>();
    p.target_transform.sigma = tt.at("sigma").get<double>();
    p.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    p.feature_mu = j.at("feature_mu").get<std::vector<double>>();
    p.feature_sigma = j.at("feature_sigma").get<std::vector<double>>();
    return p;
}

}  // namespace fatml
