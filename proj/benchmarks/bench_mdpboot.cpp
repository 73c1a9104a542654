#include <benchmark/benchmark.h>

#include <vector>

#include "mdpboot/functionals.h"
#include "mdpboot/rate.h"
#include "mdpboot/rng.h"
#include "mdpboot/simulate.h"

using namespace mdpboot;

namespace {

const FiniteProbabilityMeasure kCoin(std::vector<double>{0.0, 1.0}, {0.5, 0.5});
const TestFunction kSign({-1.0, 1.0});

void BM_Philox(benchmark::State& state) {
  CounterRng rng(RngSpec{1, 1}, 0);
  for (auto _ : state) benchmark::DoNotOptimize(rng.next_u64());
}
BENCHMARK(BM_Philox);

void BM_DrawSample(benchmark::State& state) {
  std::uint64_t label = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(draw_sample(kCoin, static_cast<std::uint64_t>(state.range(0)), RngSpec{2, label++}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DrawSample)->Range(1 << 10, 1 << 16);

void BM_ExactTail(benchmark::State& state) {
  const FiniteProbabilityMeasure p = FiniteProbabilityMeasure::uniform({0, 1, 2});
  const EmpiricalMeasure emp(p, {2, 3, 1});
  const TestFunction f({-1.0, 0.5, 2.0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_conditional_tail(emp, f, 0.2, static_cast<std::uint64_t>(state.range(0))));
  }
}
BENCHMARK(BM_ExactTail)->Arg(6)->Arg(60)->Arg(600);

void BM_TiltedTail(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  const EmpiricalMeasure emp = draw_sample(kCoin, n, RngSpec{3, 0});
  SimOptions opts;
  opts.workers = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tilted_conditional_tail(emp, kSign, 0.1, n, 1000, RngSpec{3, 1}, opts));
  }
}
BENCHMARK(BM_TiltedTail)->Arg(1 << 10)->Arg(1 << 14)->Unit(benchmark::kMillisecond);

void BM_MinRateLinear(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  std::vector<double> pts(m), probs(m, 1.0 / static_cast<double>(m));
  for (std::size_t i = 0; i < m; ++i) pts[i] = static_cast<double>(i);
  const FiniteProbabilityMeasure p(pts, probs);
  std::vector<LinearConstraint> cs;
  for (int j = 0; j < 4; ++j) {
    std::vector<double> f(m);
    for (std::size_t i = 0; i < m; ++i) f[i] = static_cast<double>((i * (j + 3)) % 7) - 3.0;
    cs.emplace_back(TestFunction(f), j % 2 ? ConstraintKind::at_least : ConstraintKind::equality, 0.1 * (j + 1));
  }
  const ConstraintSet set(p, cs);
  for (auto _ : state) benchmark::DoNotOptimize(min_rate_linear(set));
}
BENCHMARK(BM_MinRateLinear)->Arg(16)->Arg(256)->Arg(4096);

void BM_RateIq(benchmark::State& state) {
  const ContinuousLaw u = ContinuousLaw::uniform();
  const GridFunction phi = GridFunction::constant(linspace(0.25, 0.75, 51), -1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rate_Iq(u, 0.25, 0.75, phi, static_cast<std::size_t>(state.range(0))));
  }
}
BENCHMARK(BM_RateIq)->Arg(100)->Arg(1000)->Arg(10000);

void BM_RateIc(benchmark::State& state) {
  const FiniteProbabilityMeasure grid = unit_square_grid(static_cast<std::size_t>(state.range(0)));
  const CopulaModel model = CopulaModel::independent_unit_square();
  const std::vector<double> levels = linspace(0.2, 0.8, 4);
  const Grid2Function phi = Grid2Function::tabulate(levels, levels, [](double s, double t) { return 0.01 * s * t; });
  for (auto _ : state) benchmark::DoNotOptimize(rate_Ic(grid, model, phi));
}
BENCHMARK(BM_RateIc)->Arg(10)->Arg(40);

}  // namespace
BENCHMARK_MAIN();
