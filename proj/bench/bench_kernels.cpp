// Serial reference vs OpenMP kernels.

#include "fer/forest.hpp"
#include "fer/kernels.hpp"

#include <benchmark/benchmark.h>

using namespace fer;

namespace {

Matrix points(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(n, d);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

Image noise(int side) {
    Rng rng(7);
    Image img(side, side, 1);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.index(256));
    return img;
}

template <bool Parallel>
void BM_pairwise(benchmark::State& state) {
    const Matrix x = points(state.range(0), 128, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(Parallel ? kernels::omp::pairwise_sq_distances(x, x)
                                          : kernels::serial::pairwise_sq_distances(x, x));
    }
}

template <bool Parallel>
void BM_knn(benchmark::State& state) {
    const Matrix x = points(state.range(0), 16, 2);
    const Matrix d2 = kernels::serial::pairwise_sq_distances(x, x);
    for (auto _ : state) {
        benchmark::DoNotOptimize(Parallel ? kernels::omp::knn(d2, 12, true) : kernels::serial::knn(d2, 12, true));
    }
}

template <bool Parallel>
void BM_lbp(benchmark::State& state) {
    const Image img = noise(static_cast<int>(state.range(0)));
    const auto circle = kernels::make_lbp_circle(2.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(Parallel ? kernels::omp::lbp_code_map(img, circle)
                                          : kernels::serial::lbp_code_map(img, circle));
    }
}

template <bool Parallel>
void BM_forest(benchmark::State& state) {
    const Matrix x = points(600, 20, 3);
    std::vector<int> y(600);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % 6);
    classify::ForestConfig cfg;
    cfg.trees = static_cast<std::size_t>(state.range(0));
    const auto exec = Parallel ? classify::Execution::parallel : classify::Execution::serial;
    for (auto _ : state) benchmark::DoNotOptimize(classify::rf_train(x, y, 6, cfg, 1, exec));
}

}  // namespace

BENCHMARK(BM_pairwise<false>)->Arg(600)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pairwise<true>)->Arg(600)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_knn<false>)->Arg(600)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_knn<true>)->Arg(600)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_lbp<false>)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_lbp<true>)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_forest<false>)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_forest<true>)->Arg(50)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
