#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"

#include "fatml/errors.hpp"
#include "fatml/explain.hpp"
#include "fatml/learners.hpp"
#include "fatml/rng.hpp"
#include "oracles.hpp"

using namespace fatml;

namespace {

Matrix random_matrix(size_t n, size_t d, uint64_t seed, double lo = -2, double hi = 2) {
    Matrix X(n, d);
    Rng rng(seed);
    for (double& v : X.data) v = rng.uniform(lo, hi);
    return X;
}

std::vector<std::string> feat_names(size_t d) {
    std::vector<std::string> names;
    for (size_t c = 0; c < d; ++c) names.push_back("f" + std::to_string(c));
    return names;
}

FittedModel fit_family(Family family, const Matrix& X, const std::vector<double>& y,
                       uint64_t seed) {
    LearnerSpec spec;
    spec.family = family;
    spec.space = family_name(family);
    spec.seed = seed;
    if (family == Family::random_forest || family == Family::extra_trees) {
        spec.hp["n_estimators"] = 12;
        spec.hp["max_depth"] = 5;
    }
    if (family == Family::gbdt || family == Family::gbdt_leafwise) {
        spec.hp["n_estimators"] = 20;
    }
    if (family == Family::nn) {
        spec.hp["dense1"] = 8;
        spec.hp["dense2"] = 4;
        spec.hp["max_epochs"] = 15;
    }
    return fit(X, y, spec);
}

}  // namespace

TEST_CASE("tree attributions match subset enumeration exactly") {
    Rng seeds(301);
    for (int trial = 0; trial < 8; ++trial) {
        size_t d = 2 + seeds.below(3);
        size_t n = 40;
        Matrix X = random_matrix(n, d, seeds.uniform_int(1, 1u << 30));
        std::vector<double> y(n);
        Rng rng(seeds.uniform_int(1, 1u << 30));
        for (size_t r = 0; r < n; ++r) {
            y[r] = X.at(r, 0) * 2 + (d > 1 ? std::abs(X.at(r, 1)) : 0.0) + rng.normal(0, 0.2);
        }
        FittedModel model = fit_family(trial % 2 == 0 ? Family::tree : Family::gbdt, X, y,
                                       seeds.uniform_int(1, 1u << 30));

        Matrix background = random_matrix(7, d, seeds.uniform_int(1, 1u << 30));
        Matrix explain = random_matrix(3, d, seeds.uniform_int(1, 1u << 30));
        ShapOptions opt;
        opt.feature_names = feat_names(d);
        ShapMatrix shap = shap_values(model, explain, background, opt);

        auto predict = [&](const double* row) { return model.predict_row(row); };
        for (size_t r = 0; r < explain.n_rows; ++r) {
            std::vector<double> phi =
                oracles::brute_force_shapley(predict, explain.row(r), background);
            for (size_t f = 0; f < d; ++f) {
                CHECK(std::abs(shap.values.at(r, f) - phi[f]) <= 1e-9);
            }
        }
    }
}

TEST_CASE("base value plus attributions reproduces every prediction") {
    const size_t n = 80, d = 4;
    Matrix X = random_matrix(n, d, 302);
    std::vector<double> y(n);
    Rng rng(303);
    for (size_t r = 0; r < n; ++r) {
        y[r] = std::sin(X.at(r, 0)) + 0.5 * X.at(r, 1) * X.at(r, 2) + rng.normal(0, 0.1);
    }
    Matrix background = random_matrix(16, d, 304);
    Matrix explain = random_matrix(10, d, 305);

    for (Family family : {Family::baseline, Family::linear, Family::tree, Family::random_forest,
                          Family::extra_trees, Family::gbdt, Family::gbdt_leafwise, Family::nn}) {
        CAPTURE(family_name(family));
        FittedModel model = fit_family(family, X, y, 306);
        ShapOptions opt;
        opt.feature_names = feat_names(d);
        opt.n_samples = 512;
        opt.seed = 307;
        ShapMatrix shap = shap_values(model, explain, background, opt);
        for (size_t r = 0; r < explain.n_rows; ++r) {
            double total = shap.base_value;
            for (size_t f = 0; f < d; ++f) total += shap.values.at(r, f);
            double want = model.predict_row(explain.row(r));
            CHECK(std::abs(total - want) <= 1e-6 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST_CASE("linear attribution is the coefficient times the background gap") {
    const size_t n = 100, d = 3;
    Matrix X = random_matrix(n, d, 308);
    std::vector<double> y(n);
    for (size_t r = 0; r < n; ++r) y[r] = 1.5 * X.at(r, 0) - 2.0 * X.at(r, 1) + 0.25;
    FittedModel model = fit_family(Family::linear, X, y, 309);
    const LinearModel& lm = std::get<LinearModel>(model.model);

    Matrix background = random_matrix(20, d, 310);
    Matrix explain = random_matrix(5, d, 311);
    ShapMatrix shap = shap_values(model, explain, background, {feat_names(d)});

    std::vector<double> bg_mean(d, 0.0);
    for (size_t r = 0; r < background.n_rows; ++r) {
        for (size_t f = 0; f < d; ++f) bg_mean[f] += background.at(r, f);
    }
    for (double& m : bg_mean) m /= static_cast<double>(background.n_rows);

    for (size_t r = 0; r < explain.n_rows; ++r) {
        for (size_t f = 0; f < d; ++f) {
            double expected = lm.coef[f] * (explain.at(r, f) - bg_mean[f]);
            CHECK(shap.values.at(r, f) == doctest::Approx(expected).epsilon(1e-9));
        }
    }
}

TEST_CASE("constant models attribute nothing") {
    Matrix X = random_matrix(30, 3, 312);
    std::vector<double> y(30, 0.0);
    Rng rng(313);
    for (double& v : y) v = rng.uniform(0, 4);
    FittedModel model = fit_family(Family::baseline, X, y, 314);
    ShapMatrix shap = shap_values(model, random_matrix(4, 3, 315), X, {feat_names(3)});
    for (double v : shap.values.data) CHECK(v == 0.0);
    double mean = std::accumulate(y.begin(), y.end(), 0.0) / 30.0;
    CHECK(shap.base_value == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("weighted sums blend attribution parts") {
    const size_t d = 2;
    Matrix X = random_matrix(50, d, 316);
    std::vector<double> y(50);
    for (size_t r = 0; r < 50; ++r) y[r] = X.at(r, 0) + 2 * X.at(r, 1);
    Matrix background = random_matrix(8, d, 317);
    Matrix explain = random_matrix(4, d, 318);

    FittedModel a = fit_family(Family::linear, X, y, 319);
    FittedModel b = fit_family(Family::tree, X, y, 320);
    ShapMatrix sa = shap_values(a, explain, background, {feat_names(d)});
    ShapMatrix sb = shap_values(b, explain, background, {feat_names(d)});

    ShapMatrix mix = shap_weighted_sum({sa, sb}, {0.75, 0.25});
    CHECK(mix.base_value ==
          doctest::Approx(0.75 * sa.base_value + 0.25 * sb.base_value).epsilon(1e-12));
    for (size_t r = 0; r < explain.n_rows; ++r) {
        for (size_t f = 0; f < d; ++f) {
            double expected = 0.75 * sa.values.at(r, f) + 0.25 * sb.values.at(r, f);
            CHECK(mix.values.at(r, f) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
    CHECK(mix.feature_names == sa.feature_names);

    std::vector<ShapMatrix> parts{sa, sb};
    std::vector<double> short_weights{1.0};
    CHECK_THROWS_AS(shap_weighted_sum(parts, short_weights), LengthMismatchError);
}

TEST_CASE("permutation importance ranks the driving feature first") {
    const size_t n = 300, d = 4;
    Matrix X = random_matrix(n, d, 321);
    std::vector<double> y(n);
    Rng rng(322);
    for (size_t r = 0; r < n; ++r) {
        y[r] = 5.0 * X.at(r, 2) + 0.3 * X.at(r, 0) + rng.normal(0, 0.1);
    }
    FittedModel model = fit_family(Family::gbdt, X, y, 323);
    ImportanceTable table = permutation_importance(model, X, y, feat_names(d), 5, 324);

    REQUIRE(table.entries.size() == d);
    CHECK(table.entries.front().feature == "f2");
    CHECK(table.entries.front().mean_degradation > 0);
    for (size_t i = 1; i < table.entries.size(); ++i) {
        CHECK(table.entries[i - 1].mean_degradation >= table.entries[i].mean_degradation);
    }
    CHECK(table.baseline_metric > 0);

    ImportanceTable again = permutation_importance(model, X, y, feat_names(d), 5, 324);
    for (size_t i = 0; i < table.entries.size(); ++i) {
        CHECK(table.entries[i].feature == again.entries[i].feature);
        CHECK(table.entries[i].mean_degradation == again.entries[i].mean_degradation);
    }

    // the callable overload sees the same model, so it must agree
    BatchPredictor predict = [&](const Matrix& M) { return model.predict(M); };
    ImportanceTable fn = permutation_importance(predict, X, y, feat_names(d), 5, 324);
    for (size_t i = 0; i < table.entries.size(); ++i) {
        CHECK(fn.entries[i].feature == table.entries[i].feature);
        CHECK(fn.entries[i].mean_degradation ==
              doctest::Approx(table.entries[i].mean_degradation).epsilon(1e-12));
    }
}

TEST_CASE("report bundle keeps its internal promises") {
    const size_t n = 60, d = 3;
    Matrix X = random_matrix(n, d, 325);
    std::vector<double> y(n);
    Rng rng(326);
    for (size_t r = 0; r < n; ++r) y[r] = 2 * X.at(r, 1) - X.at(r, 0) + rng.normal(0, 0.2);
    FittedModel model = fit_family(Family::random_forest, X, y, 327);

    Matrix background = random_matrix(12, d, 328);
    ShapMatrix shap = shap_values(model, X, background, {feat_names(d)});
    std::vector<double> predictions = model.predict(X);
    ShapReports reports = shap_reports(shap, X, predictions, y, 4);

    REQUIRE(reports.importance.size() == d);
    for (size_t i = 1; i < d; ++i) {
        CHECK(reports.importance[i - 1].mean_abs >= reports.importance[i].mean_abs);
    }
    // mean |shap| recomputed straight from the matrix
    for (const ShapImportanceEntry& e : reports.importance) {
        size_t f = static_cast<size_t>(
            std::find(shap.feature_names.begin(), shap.feature_names.end(), e.feature) -
            shap.feature_names.begin());
        double mean_abs = 0;
        for (size_t r = 0; r < n; ++r) mean_abs += std::abs(shap.values.at(r, f));
        mean_abs /= static_cast<double>(n);
        CHECK(e.mean_abs == doctest::Approx(mean_abs).epsilon(1e-12));
    }

    REQUIRE(reports.beeswarm.size() == n * d);
    for (const BeeswarmPoint& p : reports.beeswarm) {
        CHECK(p.normalized_value >= 0.0);
        CHECK(p.normalized_value <= 1.0);
        CHECK(p.shap == shap.values.at(p.row, p.feature));
    }

    REQUIRE(reports.dependence.size() == d);
    for (size_t f = 0; f < d; ++f) CHECK(reports.dependence[f].size() == n);

    REQUIRE(reports.best.size() == 4);
    REQUIRE(reports.worst.size() == 4);
    double best_err = std::abs(reports.best.front().actual - reports.best.front().prediction);
    double worst_err = std::abs(reports.worst.front().actual - reports.worst.front().prediction);
    CHECK(best_err <= worst_err);
    for (const DecisionRecord& rec : reports.best) {
        REQUIRE(rec.steps.size() == d);
        for (size_t s = 1; s < rec.steps.size(); ++s) {
            CHECK(std::abs(rec.steps[s - 1].shap) >= std::abs(rec.steps[s].shap));
        }
        // the running total walks from the base value to the prediction
        double running = shap.base_value;
        for (const AttributionStep& step : rec.steps) {
            running += step.shap;
            CHECK(step.cumulative == doctest::Approx(running).epsilon(1e-9));
        }
        CHECK(std::abs(running - rec.prediction) <= 1e-6 * std::max(1.0, std::abs(rec.prediction)));
    }
}

TEST_CASE("linear coefficient listing pairs names with weights") {
    Matrix X = random_matrix(40, 2, 329);
    std::vector<double> y(40);
    for (size_t r = 0; r < 40; ++r) y[r] = 3 * X.at(r, 0) - 1 + 0.5 * X.at(r, 1);
    FittedModel model = fit_family(Family::linear, X, y, 330);
    auto coefs = linear_coefficients(model, feat_names(2));
    REQUIRE(coefs.size() == 3);
    CHECK(coefs[0].first == "(intercept)");
    CHECK(coefs[0].second == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(coefs[1].first == "f0");
    CHECK(coefs[1].second == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(coefs[2].first == "f1");
    CHECK(coefs[2].second == doctest::Approx(0.5).epsilon(1e-6));
}
