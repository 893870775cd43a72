#include <benchmark/benchmark.h>

#include "insulopt/eigen.hpp"
#include "insulopt/energy.hpp"
#include "insulopt/fem.hpp"
#include "insulopt/mesh.hpp"

using namespace insulopt;

static void BM_GenerateDisc(benchmark::State& state) {
    for (auto _ : state) {
        Mesh2D mesh = generate_disc(1.0, static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(mesh.vertex_count());
    }
}
BENCHMARK(BM_GenerateDisc)->Arg(4)->Arg(5)->Arg(6);

static void BM_AssembleStiffness(benchmark::State& state) {
    Mesh2D mesh = generate_disc(1.0, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto K = assemble_stiffness(mesh);
        benchmark::DoNotOptimize(K.nonzeros());
    }
    state.SetItemsProcessed(state.iterations() * mesh.triangle_count());
}
BENCHMARK(BM_AssembleStiffness)->Arg(4)->Arg(5)->Arg(6);

static void BM_RobinSolve(benchmark::State& state) {
    Mesh2D mesh = generate_disc(1.0, static_cast<int>(state.range(0)));
    BoundaryTrace trace(mesh);
    auto h = ThicknessField::uniform(trace, 1.0);
    ScalarField f(mesh.vertex_count(), 1.0);
    for (auto _ : state) {
        ScalarField u = solve_robin(mesh, trace, h, RobinConfig{1.0}, f, 1e-10);
        benchmark::DoNotOptimize(u[0]);
    }
}
BENCHMARK(BM_RobinSolve)->Arg(4)->Arg(5)->Arg(6)->Unit(benchmark::kMillisecond);

static void BM_RobinEig(benchmark::State& state) {
    Mesh2D mesh = generate_disc(1.0, static_cast<int>(state.range(0)));
    BoundaryTrace trace(mesh);
    auto h = ThicknessField::uniform(trace, 1.0);
    for (auto _ : state) {
        auto [lambda, v] = robin_eig(mesh, trace, h, RobinConfig{1.0}, 1e-8);
        benchmark::DoNotOptimize(lambda);
    }
}
BENCHMARK(BM_RobinEig)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_MinimizeAuxiliary(benchmark::State& state) {
    Mesh2D mesh = generate_disc(1.0, static_cast<int>(state.range(0)));
    BoundaryTrace trace(mesh);
    EigenSolveOptions opt;
    opt.tol = 1e-7;
    opt.restarts = 2;
    for (auto _ : state) {
        EigenReport rep = minimize_auxiliary(mesh, trace, 1.0, 2.0, opt);
        benchmark::DoNotOptimize(rep.lambda);
    }
}
BENCHMARK(BM_MinimizeAuxiliary)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
