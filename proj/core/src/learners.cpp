#include "fatml/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "fatml/errors.hpp"

namespace fatml {

std::string family_name(Family family) {
    switch (family) {
        case Family::baseline: return "baseline";
        case Family::linear: return "linear";
        case Family::tree: return "tree";
        case Family::random_forest: return "random_forest";
        case Family::extra_trees: return "extra_trees";
        case Family::gbdt: return "gbdt";
        case Family::gbdt_leafwise: return "gbdt_leafwise";
        case Family::nn: return "nn";
    }
    throw ConfigError("unknown model family");
}

Family family_from_name(const std::string& name) {
    for (Family f : {Family::baseline, Family::linear, Family::tree, Family::random_forest,
                     Family::extra_trees, Family::gbdt, Family::gbdt_leafwise, Family::nn}) {
        if (family_name(f) == name) return f;
    }
    throw ConfigError("unknown model family: " + name);
}

double LearnerSpec::hp_or(const std::string& key, double fallback) const {
    auto it = hp.find(key);
    return it == hp.end() ? fallback : it->second;
}

namespace {

size_t hp_count(const LearnerSpec& spec, const std::string& key, size_t fallback) {
    auto it = spec.hp.find(key);
    if (it == spec.hp.end()) return fallback;
    return static_cast<size_t>(std::llround(it->second));
}

LinearModel fit_linear(const Matrix& X, const std::vector<double>& y) {
    const auto n = static_cast<Eigen::Index>(X.n_rows);
    const auto d = static_cast<Eigen::Index>(X.n_cols);
    Eigen::MatrixXd A(n, d + 1);
    Eigen::VectorXd b(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        A(r, 0) = 1.0;
        const double* row = X.row(static_cast<size_t>(r));
        for (Eigen::Index c = 0; c < d; ++c) A(r, c + 1) = row[c];
        b(r) = y[static_cast<size_t>(r)];
    }
    // minimum-norm least squares; rank deficiency maps to the smallest
    // coefficient vector instead of an exception
    Eigen::VectorXd beta = A.completeOrthogonalDecomposition().solve(b);
    LinearModel m;
    m.intercept = beta(0);
    m.coef.resize(X.n_cols);
    for (Eigen::Index c = 0; c < d; ++c) m.coef[static_cast<size_t>(c)] = beta(c + 1);
    return m;
}

TreeParams tree_params_from(const LearnerSpec& spec) {
    TreeParams p;
    p.max_depth = hp_count(spec, "max_depth", 0);
    p.min_samples_split = hp_count(spec, "min_samples_split", 2);
    p.min_samples_leaf = hp_count(spec, "min_samples_leaf", 1);
    p.max_features = spec.hp_or("max_features", 1.0);
    p.random_thresholds = spec.hp_or("random_thresholds", 0.0) != 0.0;
    return p;
}

GbdtParams gbdt_params_from(const LearnerSpec& spec) {
    GbdtParams p;
    p.n_estimators = hp_count(spec, "n_estimators", 100);
    p.learning_rate = spec.hp_or("learning_rate", 0.1);
    p.max_depth = hp_count(spec, "max_depth", spec.family == Family::gbdt_leafwise ? 0 : 3);
    p.num_leaves = hp_count(spec, "num_leaves", 0);
    // min_child_weight is the same constraint for squared loss
    p.min_data_in_leaf =
        hp_count(spec, "min_data_in_leaf", hp_count(spec, "min_child_weight", 1));
    p.subsample = spec.hp_or("subsample", spec.hp_or("bagging_fraction", 1.0));
    p.feature_fraction = spec.hp_or("feature_fraction", 1.0);
    p.reg_lambda = spec.hp_or("reg_lambda", 0.0);
    p.early_stopping_rounds = hp_count(spec, "early_stopping_rounds", 0);
    p.n_bins = hp_count(spec, "n_bins", 255);
    return p;
}

NnParams nn_params_from(const LearnerSpec& spec) {
    NnParams p;
    p.dense1 = hp_count(spec, "dense1", 32);
    p.dense2 = hp_count(spec, "dense2", 16);
    p.dropout = spec.hp_or("dropout", 0.0);
    p.learning_rate = spec.hp_or("learning_rate", 0.05);
    p.momentum = spec.hp_or("momentum", 0.9);
    p.decay = spec.hp_or("decay", 0.001);
    p.batch_size = hp_count(spec, "batch_size", 32);
    p.max_epochs = hp_count(spec, "max_epochs", 200);
    return p;
}

}  // namespace

double FittedModel::predict_row(const double* x) const {
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ConstantModel>) {
                return m.value;
            } else if constexpr (std::is_same_v<T, LinearModel>) {
                double s = m.intercept;
                for (size_t i = 0; i < m.coef.size(); ++i) s += m.coef[i] * x[i];
                return s;
            } else {
                return m.predict_row(x);
            }
        },
        model);
}

std::vector<double> FittedModel::predict(const Matrix& X) const {
    if (X.n_cols != n_features) throw WidthMismatchError(n_features, X.n_cols);
    std::vector<double> out(X.n_rows);
    for (size_t r = 0; r < X.n_rows; ++r) out[r] = predict_row(X.row(r));
    return out;
}

FittedModel fit(const Matrix& X, const std::vector<double>& y, const LearnerSpec& spec,
                std::optional<ValidationRef> validation, size_t jobs) {
    if (X.n_rows != y.size()) throw LengthMismatchError(X.n_rows, y.size());
    if (X.n_rows == 0) throw TooFewRowsError(0, 1);

    FittedModel fitted;
    fitted.spec = spec;
    fitted.n_features = X.n_cols;

    switch (spec.family) {
        case Family::baseline: {
            double mean = std::accumulate(y.begin(), y.end(), 0.0) /
                          static_cast<double>(y.size());
            fitted.model = ConstantModel{mean};
            break;
        }
        case Family::linear: {
            if (X.n_rows < 2) throw TooFewRowsError(X.n_rows, 2);
            fitted.model = fit_linear(X, y);
            break;
        }
        case Family::tree: {
            if (X.n_rows < 2) throw TooFewRowsError(X.n_rows, 2);
            std::vector<size_t> rows(X.n_rows);
            std::iota(rows.begin(), rows.end(), size_t(0));
            Rng rng = Rng(spec.seed).stream("tree");
            fitted.model = build_tree(X, y, rows, tree_params_from(spec), rng);
            break;
        }
        case Family::random_forest:
        case Family::extra_trees: {
            if (X.n_rows < 2) throw TooFewRowsError(X.n_rows, 2);
            ForestParams p;
            p.n_estimators = hp_count(spec, "n_estimators", 100);
            p.bootstrap = spec.family == Family::random_forest;
            p.tree = tree_params_from(spec);
            p.tree.random_thresholds = spec.family == Family::extra_trees;
            fitted.model = build_forest(X, y, p, spec.seed, jobs);
            break;
        }
        case Family::gbdt:
        case Family::gbdt_leafwise: {
            if (X.n_rows < 2) throw TooFewRowsError(X.n_rows, 2);
            GbdtModel m = train_gbdt(X, y, gbdt_params_from(spec), spec.seed, validation,
                                     &fitted.training_log);
            fitted.best_iteration = m.best_iteration;
            fitted.model = std::move(m);
            break;
        }
        case Family::nn: {
            if (X.n_rows < 2) throw TooFewRowsError(X.n_rows, 2);
            NnModel m = train_nn(X, y, nn_params_from(spec), spec.seed, validation,
                                 &fitted.training_log);
            size_t best = 0;
            double best_valid = std::numeric_limits<double>::infinity();
            for (const auto& row : fitted.training_log) {
                if (std::isfinite(row.valid_metric) && row.valid_metric < best_valid) {
                    best_valid = row.valid_metric;
                    best = row.iteration;
                }
            }
            fitted.best_iteration = best;
            fitted.model = std::move(m);
            break;
        }
    }
    return fitted;
}

const std::vector<TrainLogRow>& learning_curve(const FittedModel& model) {
    switch (model.spec.family) {
        case Family::gbdt:
        case Family::gbdt_leafwise:
        case Family::nn:
            return model.training_log;
        default:
            throw NotIterativeError(family_name(model.spec.family));
    }
}

namespace {

nlohmann::json tree_to_json(const Tree& tree) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes) {
        nodes.push_back({{"f", n.feature},
                         {"t", n.threshold},
                         {"l", n.left},
                         {"r", n.right},
                         {"v", n.value},
                         {"n", n.n_samples}});
    }
    return nodes;
}

Tree tree_from_json(const nlohmann::json& j) {
    Tree tree;
    tree.nodes.reserve(j.size());
    for (const auto& jn : j) {
        TreeNode n;
        n.feature = jn.at("f").get<int>();
        n.threshold = jn.at("t").get<double>();
        n.left = jn.at("l").get<int>();
        n.right = jn.at("r").get<int>();
        n.value = jn.at("v").get<double>();
        n.n_samples = jn.at("n").get<size_t>();
        tree.nodes.push_back(n);
    }
    return tree;
}

nlohmann::json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

double null_or_finite(const nlohmann::json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

}  // namespace

nlohmann::json model_to_json(const FittedModel& fitted) {
    nlohmann::json j;
    j["spec"] = {{"family", family_name(fitted.spec.family)},
                 {"space", fitted.spec.space},
                 {"hp", fitted.spec.hp},
                 {"seed", fitted.spec.seed}};
    j["n_features"] = fitted.n_features;
    j["best_iteration"] = fitted.best_iteration;

    nlohmann::json log = nlohmann::json::array();
    for (const auto& row : fitted.training_log) {
        log.push_back({{"iteration", row.iteration},
                       {"train", finite_or_null(row.train_metric)},
                       {"valid", finite_or_null(row.valid_metric)}});
    }
    j["training_log"] = log;

    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ConstantModel>) {
                j["kind"] = "constant";
                j["model"] = {{"value", m.value}};
            } else if constexpr (std::is_same_v<T, LinearModel>) {
                j["kind"] = "linear";
                j["model"] = {{"intercept", m.intercept}, {"coef", m.coef}};
            } else if constexpr (std::is_same_v<T, Tree>) {
                j["kind"] = "tree";
                j["model"] = {{"nodes", tree_to_json(m)}};
            } else if constexpr (std::is_same_v<T, Forest>) {
                j["kind"] = "forest";
                nlohmann::json trees = nlohmann::json::array();
                for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
                j["model"] = {{"trees", std::move(trees)}};
            } else if constexpr (std::is_same_v<T, GbdtModel>) {
                j["kind"] = "gbdt";
                nlohmann::json stages = nlohmann::json::array();
                for (const auto& t : m.stages) stages.push_back(tree_to_json(t));
                j["model"] = {{"init", m.init},
                              {"learning_rate", m.learning_rate},
                              {"best_iteration", m.best_iteration},
                              {"stages", std::move(stages)}};
            } else if constexpr (std::is_same_v<T, NnModel>) {
                j["kind"] = "nn";
                j["model"] = {{"d_in", m.d_in}, {"d1", m.d1},   {"d2", m.d2},
                              {"w1", m.w1},     {"b1", m.b1},   {"w2", m.w2},
                              {"b2", m.b2},     {"w3", m.w3},   {"b3", m.b3}};
            }
        },
        fitted.model);
    return j;
}

FittedModel model_from_json(const nlohmann::json& j) {
    FittedModel fitted;
    const auto& js = j.at("spec");
    fitted.spec.family = family_from_name(js.at("family").get<std::string>());
    fitted.spec.space = js.at("space").get<std::string>();
    fitted.spec.hp = js.at("hp").get<std::map<std::string, double>>();
    fitted.spec.seed = js.at("seed").get<uint64_t>();
    fitted.n_features = j.at("n_features").get<size_t>();
    fitted.best_iteration = j.at("best_iteration").get<size_t>();
    for (const auto& jr : j.at("training_log")) {
        TrainLogRow row;
        row.iteration = jr.at("iteration").get<size_t>();
        row.train_metric = null_or_finite(jr.at("train"));
        row.valid_metric = null_or_finite(jr.at("valid"));
        fitted.training_log.push_back(row);
    }

    const std::string kind = j.at("kind").get<std::string>();
    const auto& jm = j.at("model");
    if (kind == "constant") {
        fitted.model = ConstantModel{jm.at("value").get<double>()};
    } else if (kind == "linear") {
        LinearModel m;
        m.intercept = jm.at("intercept").get<double>();
        m.coef = jm.at("coef").get<std::vector<double>>();
        fitted.model = std::move(m);
    } else if (kind == "tree") {
        fitted.model = tree_from_json(jm.at("nodes"));
    } else if (kind == "forest") {
        Forest f;
        for (const auto& jt : jm.at("trees")) f.trees.push_back(tree_from_json(jt));
        fitted.model = std::move(f);
    } else if (kind == "gbdt") {
        GbdtModel m;
        m.init = jm.at("init").get<double>();
        m.learning_rate = jm.at("learning_rate").get<double>();
        m.best_iteration = jm.at("best_iteration").get<size_t>();
        for (const auto& jt : jm.at("stages")) m.stages.push_back(tree_from_json(jt));
        fitted.model = std::move(m);
    } else if (kind == "nn") {
        NnModel m;
        m.d_in = jm.at("d_in").get<size_t>();
        m.d1 = jm.at("d1").get<size_t>();
        m.d2 = jm.at("d2").get<size_t>();
        m.w1 = jm.at("w1").get<std::vector<double>>();
        m.b1 = jm.at("b1").get<std::vector<double>>();
        m.w2 = jm.at("w2").get<std::vector<double>>();
        m.b2 = jm.at("b2").get<std::vector<double>>();
        m.w3 = jm.at("w3").get<std::vector<double>>();
        m.b3 = jm.at("b3").get<std::vector<double>>();
        fitted.model = std::move(m);
    } else {
        throw ConfigError("unknown model kind: " + kind);
    }
    return fitted;
}

namespace {

double choice(Rng& rng, std::initializer_list<double> values) {
    std::vector<double> v(values);
    return v[rng.below(v.size())];
}

bool is_integer(double v) { return v == std::floor(v); }

bool int_in(const LearnerSpec& spec, const std::string& key, double lo, double hi) {
    auto it = spec.hp.find(key);
    if (it == spec.hp.end()) return false;
    return is_integer(it->second) && it->second >= lo && it->second <= hi;
}

bool real_in(const LearnerSpec& spec, const std::string& key, double lo, double hi) {
    auto it = spec.hp.find(key);
    if (it == spec.hp.end()) return false;
    return it->second >= lo && it->second <= hi;
}

bool one_of(const LearnerSpec& spec, const std::string& key,
            std::initializer_list<double> values) {
    auto it = spec.hp.find(key);
    if (it == spec.hp.end()) return false;
    for (double v : values) {
        if (it->second == v) return true;
    }
    return false;
}

bool keys_exactly(const LearnerSpec& spec, std::initializer_list<const char*> keys) {
    if (spec.hp.size() != keys.size()) return false;
    for (const char* k : keys) {
        if (!spec.hp.count(k)) return false;
    }
    return true;
}

}  // namespace

std::vector<std::string> search_space_names() {
    return {"baseline", "linear",        "random_forest", "extra_trees",
            "gbdt",     "gbdt_leafwise", "gbdt_cat",      "nn"};
}

LearnerSpec sample_spec(const std::string& space, Rng& rng, uint64_t model_seed) {
    LearnerSpec spec;
    spec.space = space;
    spec.seed = model_seed;
    if (space == "baseline") {
        spec.family = Family::baseline;
    } else if (space == "linear") {
        spec.family = Family::linear;
    } else if (space == "random_forest") {
        spec.family = Family::random_forest;
        spec.hp["n_estimators"] = 100;
        spec.hp["max_depth"] = static_cast<double>(rng.uniform_int(4, 12));
        spec.hp["min_samples_split"] = 2;
        spec.hp["max_features"] = rng.uniform(0.5, 1.0);
    } else if (space == "extra_trees") {
        spec.family = Family::extra_trees;
        spec.hp["n_estimators"] = 100;
        spec.hp["max_depth"] = static_cast<double>(rng.uniform_int(4, 12));
        spec.hp["min_samples_split"] = static_cast<double>(rng.uniform_int(10, 50));
        spec.hp["min_samples_leaf"] = 1;
        spec.hp["max_features"] = rng.uniform(0.5, 1.0);
    } else if (space == "gbdt_leafwise") {
        spec.family = Family::gbdt_leafwise;
        spec.hp["num_leaves"] = static_cast<double>(rng.uniform_int(3, 31));
        spec.hp["learning_rate"] = choice(rng, {0.05, 0.075, 0.1, 0.15});
        spec.hp["bagging_fraction"] = choice(rng, {0.8, 0.9, 1.0});
        spec.hp["min_data_in_leaf"] = static_cast<double>(rng.uniform_int(5, 50));
        double lo = std::log(50.0), hi = std::log(500.0);
        double n = std::exp(rng.uniform(lo, hi));
        spec.hp["n_estimators"] =
            std::clamp(std::round(n), 50.0, 500.0);
    } else if (space == "gbdt") {
        spec.family = Family::gbdt;
        spec.hp["max_depth"] = static_cast<double>(rng.uniform_int(1, 4));
        spec.hp["min_child_weight"] = static_cast<double>(rng.uniform_int(1, 10));
        spec.hp["n_estimators"] = static_cast<double>(rng.uniform_int(10, 100));
        spec.hp["learning_rate"] = rng.uniform(0.01, 0.5);
        spec.hp["subsample"] = rng.uniform(0.3, 1.0);
        spec.hp["early_stopping_rounds"] = 50;
    } else if (space == "gbdt_cat") {
        spec.family = Family::gbdt;
        spec.hp["max_depth"] = static_cast<double>(rng.uniform_int(2, 6));
        spec.hp["learning_rate"] = choice(rng, {0.05, 0.1, 0.2});
        spec.hp["n_estimators"] = 1000;
        spec.hp["feature_fraction"] = rng.uniform(0.7, 1.0);
        spec.hp["min_data_in_leaf"] = static_cast<double>(rng.uniform_int(5, 50));
        spec.hp["early_stopping_rounds"] = 50;
    } else if (space == "nn") {
        spec.family = Family::nn;
        spec.hp["dense1"] = choice(rng, {16, 32, 64});
        spec.hp["dense2"] = choice(rng, {4, 8, 16, 32});
        spec.hp["dropout"] = choice(rng, {0.0, 0.1, 0.25});
        spec.hp["learning_rate"] = choice(rng, {0.01, 0.05, 0.08, 0.1});
        spec.hp["momentum"] = choice(rng, {0.85, 0.9, 0.95});
        spec.hp["decay"] = choice(rng, {0.0001, 0.001, 0.01});
    } else {
        throw ConfigError("unknown search space: " + space);
    }
    return spec;
}

bool check_in_search_space(const LearnerSpec& spec) {
    const std::string& s = spec.space;
    if (s == "baseline") return spec.family == Family::baseline && spec.hp.empty();
    if (s == "linear") return spec.family == Family::linear && spec.hp.empty();
    if (s == "random_forest") {
        return spec.family == Family::random_forest &&
               keys_exactly(spec, {"n_estimators", "max_depth", "min_samples_split",
                                   "max_features"}) &&
               one_of(spec, "n_estimators", {100}) && int_in(spec, "max_depth", 4, 12) &&
               one_of(spec, "min_samples_split", {2}) &&
               real_in(spec, "max_features", 0.5, 1.0);
    }
    if (s == "extra_trees") {
        return spec.family == Family::extra_trees &&
               keys_exactly(spec, {"n_estimators", "max_depth", "min_samples_split",
                                   "min_samples_leaf", "max_features"}) &&
               one_of(spec, "n_estimators", {100}) && int_in(spec, "max_depth", 4, 12) &&
               int_in(spec, "min_samples_split", 10, 50) &&
               one_of(spec, "min_samples_leaf", {1}) &&
               real_in(spec, "max_features", 0.5, 1.0);
    }
    if (s == "gbdt_leafwise") {
        return spec.family == Family::gbdt_leafwise &&
               keys_exactly(spec, {"num_leaves", "learning_rate", "bagging_fraction",
                                   "min_data_in_leaf", "n_estimators"}) &&
               int_in(spec, "num_leaves", 3, 31) &&
               one_of(spec, "learning_rate", {0.05, 0.075, 0.1, 0.15}) &&
               one_of(spec, "bagging_fraction", {0.8, 0.9, 1.0}) &&
               int_in(spec, "min_data_in_leaf", 5, 50) &&
               int_in(spec, "n_estimators", 50, 500);
    }
    if (s == "gbdt") {
        return spec.family == Family::gbdt &&
               keys_exactly(spec, {"max_depth", "min_child_weight", "n_estimators",
                                   "learning_rate", "subsample", "early_stopping_rounds"}) &&
               int_in(spec, "max_depth", 1, 4) && int_in(spec, "min_child_weight", 1, 10) &&
               int_in(spec, "n_estimators", 10, 100) &&
               real_in(spec, "learning_rate", 0.01, 0.5) &&
               real_in(spec, "subsample", 0.3, 1.0) &&
               one_of(spec, "early_stopping_rounds", {50});
    }
    if (s == "gbdt_cat") {
        return spec.family == Family::gbdt &&
               keys_exactly(spec, {"max_depth", "learning_rate", "n_estimators",
                                   "feature_fraction", "min_data_in_leaf",
                                   "early_stopping_rounds"}) &&
               int_in(spec, "max_depth", 2, 6) &&
               one_of(spec, "learning_rate", {0.05, 0.1, 0.2}) &&
               one_of(spec, "n_estimators", {1000}) &&
               real_in(spec, "feature_fraction", 0.7, 1.0) &&
               int_in(spec, "min_data_in_leaf", 5, 50) &&
               one_of(spec, "early_stopping_rounds", {50});
    }
    if (s == "nn") {
        return spec.family == Family::nn &&
               keys_exactly(spec, {"dense1", "dense2", "dropout", "learning_rate",
                                   "momentum", "decay"}) &&
               one_of(spec, "dense1", {16, 32, 64}) &&
               one_of(spec, "dense2", {4, 8, 16, 32}) &&
               one_of(spec, "dropout", {0.0, 0.1, 0.25}) &&
               one_of(spec, "learning_rate", {0.01, 0.05, 0.08, 0.1}) &&
               one_of(spec, "momentum", {0.85, 0.9, 0.95}) &&
               one_of(spec, "decay", {0.0001, 0.001, 0.01});
    }
    return false;
}

}  // namespace fatml
