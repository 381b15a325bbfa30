#include <benchmark/benchmark.h>

#include <vector>

#include "fatml/explain.hpp"
#include "fatml/learners.hpp"
#include "fatml/matrix.hpp"
#include "fatml/rng.hpp"

namespace {

using namespace fatml;

struct Fixture {
    Matrix X;
    std::vector<double> y;
    std::vector<std::string> names;
    FittedModel model;
};

Fixture make_fixture(Family family) {
    size_t n = 400, d = 8;
    Rng rng(23);
    Fixture f{Matrix(n, d), std::vector<double>(n), {}, {}};
    for (double& v : f.X.data) v = rng.uniform(-2.0, 2.0);
    for (size_t r = 0; r < n; ++r) {
        f.y[r] = 1.1 * f.X.at(r, 0) - 0.8 * f.X.at(r, 1) + 0.5 * f.X.at(r, 2) * f.X.at(r, 3) +
                 rng.normal(0.0, 0.1);
    }
    for (size_t j = 0; j < d; ++j) f.names.push_back("f" + std::to_string(j));
    LearnerSpec spec;
    spec.family = family;
    spec.space = family_name(family);
    spec.seed = 7;
    if (family == Family::gbdt) spec.hp["n_estimators"] = 30;
    if (family == Family::nn) {
        spec.hp["dense1"] = 16;
        spec.hp["dense2"] = 8;
        spec.hp["max_epochs"] = 20;
    }
    f.model = fit(f.X, f.y, spec);
    return f;
}

// exact interventional attribution along tree paths; cost scales with
// explained rows x background rows x leaves
void bm_shap_tree_exact(benchmark::State& state) {
    Fixture f = make_fixture(Family::gbdt);
    std::vector<size_t> bg_rows, ex_rows;
    for (size_t i = 0; i < static_cast<size_t>(state.range(0)); ++i) bg_rows.push_back(i);
    for (size_t i = 0; i < 16; ++i) ex_rows.push_back(100 + i);
    Matrix background = f.X.select_rows(bg_rows);
    Matrix explain = f.X.select_rows(ex_rows);
    ShapOptions options;
    options.feature_names = f.names;
    for (auto _ : state) {
        ShapMatrix shap = shap_values(f.model, explain, background, options);
        benchmark::DoNotOptimize(shap.base_value);
    }
}

// seeded antithetic permutation sampling, the path used for networks
void bm_shap_sampled_nn(benchmark::State& state) {
    Fixture f = make_fixture(Family::nn);
    std::vector<size_t> bg_rows, ex_rows;
    for (size_t i = 0; i < 32; ++i) bg_rows.push_back(i);
    for (size_t i = 0; i < 8; ++i) ex_rows.push_back(100 + i);
    Matrix background = f.X.select_rows(bg_rows);
    Matrix explain = f.X.select_rows(ex_rows);
    ShapOptions options;
    options.feature_names = f.names;
    options.n_samples = static_cast<size_t>(state.range(0));
    options.seed = 3;
    for (auto _ : state) {
        ShapMatrix shap = shap_values(f.model, explain, background, options);
        benchmark::DoNotOptimize(shap.base_value);
    }
}

}  // namespace

BENCHMARK(bm_shap_tree_exact)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_shap_sampled_nn)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
