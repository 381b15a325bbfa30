#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "fatml/features.hpp"
#include "fatml/matrix.hpp"
#include "fatml/rng.hpp"

namespace {

using namespace fatml;

Matrix make_matrix(size_t n, size_t d) {
    Rng rng(37);
    Matrix X(n, d);
    for (double& v : X.data) v = rng.uniform(-3.0, 3.0);
    // a couple of mildly dependent columns keep the auxiliary fits honest
    for (size_t r = 0; r < n; ++r) {
        X.at(r, d - 1) = 0.7 * X.at(r, 0) + 0.2 * X.at(r, 1) + 0.3 * X.at(r, d - 1);
    }
    return X;
}

std::vector<std::string> labels(size_t d) {
    std::vector<std::string> names(d);
    for (size_t j = 0; j < d; ++j) names[j] = "f" + std::to_string(j);
    return names;
}

void bm_vif(benchmark::State& state) {
    size_t d = static_cast<size_t>(state.range(0));
    Matrix X = make_matrix(500, d);
    std::vector<std::string> names = labels(d);
    for (auto _ : state) {
        std::vector<VifEntry> entries = compute_vif(X, names);
        benchmark::DoNotOptimize(entries.front().vif);
    }
}

void bm_vif_screen(benchmark::State& state) {
    size_t d = static_cast<size_t>(state.range(0));
    Matrix X = make_matrix(500, d);
    std::vector<std::string> names = labels(d);
    for (auto _ : state) {
        VifScreenResult screen = vif_screen(X, names, 5.0);
        benchmark::DoNotOptimize(screen.kept.size());
    }
}

}  // namespace

BENCHMARK(bm_vif)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_vif_screen)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
