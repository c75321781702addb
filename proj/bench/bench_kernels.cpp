// Serial reference vs OpenMP version of each kernel. Pass
// --benchmark_filter=... to pick one; thread count follows OMP_NUM_THREADS.

#include "effdim/approximator.hpp"
#include "effdim/designs.hpp"
#include "effdim/kernels.hpp"

#include <benchmark/benchmark.h>

using namespace effdim;

namespace {

const Approximator &approximator() {
  static const Approximator a = [] {
    const auto t = target_library(2, 1.5)[0];
    const double eps = 0.1;
    return build_approximator(t, group_cells(cover_box(2, 0.0, 1.0, approx_cell_side(2, 1.5, eps))), eps);
  }();
  return a;
}

const Matrix &inputs() {
  static const Matrix x = draw(cube_design(2), 20000, 1).transpose();
  return x;
}

template <Matrix (*F)(const ReluNetwork &, const Matrix &)> void BM_evaluate(benchmark::State &state) {
  const auto &net = approximator().net;
  for (auto _ : state) benchmark::DoNotOptimize(F(net, inputs()));
  state.SetItemsProcessed(state.iterations() * inputs().cols());
}
BENCHMARK_TEMPLATE(BM_evaluate, kernels::evaluate_batch_serial)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_evaluate, kernels::evaluate_batch_omp)->Unit(benchmark::kMillisecond);

const EllipsoidSet &ellipsoid() {
  static const EllipsoidSet s = make_ellipsoid_set(exponential_profile(10, 1.0, 0.5), 3.0, 0.2);
  return s;
}

template <std::size_t (*F)(const EllipsoidSet &, std::size_t, std::uint64_t)>
void BM_count_outside(benchmark::State &state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(F(ellipsoid(), n, 3));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_TEMPLATE(BM_count_outside, kernels::count_outside_serial)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_count_outside, kernels::count_outside_omp)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

template <std::vector<std::size_t> (*F)(std::size_t, const std::vector<double> &, std::size_t, std::uint64_t)>
void BM_tail_counts(benchmark::State &state) {
  const std::vector<double> ts = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(F(5, ts, n, 4));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_TEMPLATE(BM_tail_counts, kernels::tail_counts_serial)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_tail_counts, kernels::tail_counts_omp)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

template <Matrix (*F)(const Matrix &, std::size_t)> void BM_knn(benchmark::State &state) {
  const Matrix pts = draw(gaussian_design(exponential_profile(20, 1.0, 0.5)), static_cast<std::size_t>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(F(pts, 20));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_TEMPLATE(BM_knn, kernels::knn_distances_serial)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_knn, kernels::knn_distances_omp)->Arg(5000)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
