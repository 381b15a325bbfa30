#include <benchmark/benchmark.h>

#include <vector>

#include "fatml/gbdt.hpp"
#include "fatml/matrix.hpp"
#include "fatml/rng.hpp"

namespace {

using namespace fatml;

struct Problem {
    Matrix X;
    std::vector<double> y;
};

Problem make_problem(size_t n, size_t d) {
    Rng rng(11);
    Problem p{Matrix(n, d), std::vector<double>(n)};
    for (double& v : p.X.data) v = rng.uniform(-2.0, 2.0);
    for (size_t r = 0; r < n; ++r) {
        p.y[r] = 1.3 * p.X.at(r, 0) - 0.7 * p.X.at(r, 1) + 0.4 * p.X.at(r, 2) * p.X.at(r, 3) +
                 rng.normal(0.0, 0.1);
    }
    return p;
}

void bm_gbdt_depthwise(benchmark::State& state) {
    Problem p = make_problem(static_cast<size_t>(state.range(0)), 16);
    GbdtParams params;
    params.n_estimators = 100;
    params.max_depth = 3;
    for (auto _ : state) {
        GbdtModel model = train_gbdt(p.X, p.y, params, 1, std::nullopt, nullptr);
        benchmark::DoNotOptimize(model.stages.size());
    }
}

void bm_gbdt_leafwise(benchmark::State& state) {
    Problem p = make_problem(static_cast<size_t>(state.range(0)), 16);
    GbdtParams params;
    params.n_estimators = 100;
    params.num_leaves = 31;
    params.min_data_in_leaf = 20;
    for (auto _ : state) {
        GbdtModel model = train_gbdt(p.X, p.y, params, 1, std::nullopt, nullptr);
        benchmark::DoNotOptimize(model.stages.size());
    }
}

}  // namespace

BENCHMARK(bm_gbdt_depthwise)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_gbdt_leafwise)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
