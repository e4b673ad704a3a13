#include <benchmark/benchmark.h>

#include "cge/besov_analysis.hpp"
#include "cge/coarse_grain.hpp"
#include "cge/field_generators.hpp"
#include "cge/variational_solver.hpp"

namespace {

using namespace cge;

CoefficientField random_field(int level) {
    return gen_random_spd(GridSpec::make(2, level), 1e-2, 1e2, 7);
}

void BM_Assemble(benchmark::State& state) {
    const CoefficientField f = random_field(static_cast<int>(state.range(0)));
    const SolveConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble(f, TriadicCube::root(), cfg));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.grid().cell_count()));
}
BENCHMARK(BM_Assemble)->DenseRange(3, 5);

void BM_FluxSolve(benchmark::State& state) {
    const CoefficientField f = random_field(static_cast<int>(state.range(0)));
    SolveConfig cfg;
    cfg.cg_rel_tol = 1e-10;
    const StiffnessOperator op = assemble(f, TriadicCube::root(), cfg);
    const double e[2] = {1.0, 0.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_linear_forcing(op, f, e, Forcing::flux, cfg).value);
    }
}
BENCHMARK(BM_FluxSolve)->DenseRange(3, 5)->Unit(benchmark::kMillisecond);

void BM_Sweep(benchmark::State& state) {
    const CoefficientField f = random_field(static_cast<int>(state.range(0)));
    SweepOptions opts;
    opts.solve.cg_rel_tol = 1e-10;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sweep(f, opts).solves_performed);
    }
}
BENCHMARK(BM_Sweep)->DenseRange(3, 4)->Unit(benchmark::kMillisecond);

void BM_DualSumNorm(benchmark::State& state) {
    const GridSpec grid = GridSpec::make(1, static_cast<int>(state.range(0)));
    const ScalarGridFunction f = layered_density(grid, LayeredParams{0.5, 2});
    for (auto _ : state) {
        benchmark::DoNotOptimize(dual_sum_norm(f, 0.5, kInfinity).total);
    }
}
BENCHMARK(BM_DualSumNorm)->DenseRange(7, 11, 2);

}  // namespace

BENCHMARK_MAIN();
