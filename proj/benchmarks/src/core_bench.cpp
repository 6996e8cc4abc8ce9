#include <benchmark/benchmark.h>

#include <sstream>

#include "evsched/milp.hpp"
#include "evsched/modelgen.hpp"
#include "evsched/mpc.hpp"
#include "evsched/params.hpp"
#include "evsched/stochastic.hpp"

using namespace evsched;

namespace {

milp::MilpModel make_model(int binaries, int continuous, int rows, std::uint64_t seed) {
    stoch::Rng rng(seed);
    milp::RandomModelOptions opts;
    opts.min_binaries = opts.max_binaries = binaries;
    opts.min_continuous = opts.max_continuous = continuous;
    opts.min_rows = opts.max_rows = rows;
    return milp::random_model(rng, opts);
}

stoch::ScenarioSet make_scenarios(const Config& cfg, int paths, std::uint64_t seed) {
    stoch::Rng rng(seed);
    env::StationState st = stoch::random_station_state(rng, cfg);
    auto future = [](int, env::EventClass) { return 1.3; };
    return stoch::generate_sample_paths(st, 1.1, future, paths, false, cfg, seed);
}

void bm_lp_solve(benchmark::State& state) {
    auto model = make_model(0, static_cast<int>(state.range(0)),
                            static_cast<int>(state.range(1)), 17);
    for (auto _ : state) {
        auto res = milp::lp_solve(model);
        benchmark::DoNotOptimize(res.objective);
    }
}
BENCHMARK(bm_lp_solve)->Args({6, 8})->Args({20, 30})->Args({60, 90});

void bm_branch_and_bound(benchmark::State& state) {
    auto model = make_model(static_cast<int>(state.range(0)), 6,
                            static_cast<int>(state.range(1)), 23);
    milp::SolverLimits limits;
    limits.rel_gap = 1e-9;
    for (auto _ : state) {
        auto res = milp::branch_and_bound(model, limits);
        benchmark::DoNotOptimize(res.objective);
    }
}
BENCHMARK(bm_branch_and_bound)->Args({4, 10})->Args({8, 20})->Args({12, 30});

void bm_lp_roundtrip(benchmark::State& state) {
    auto model = make_model(8, 20, 24, 31);
    for (auto _ : state) {
        auto text = milp::to_lp_string(model);
        auto back = milp::parse_lp_string(text);
        benchmark::DoNotOptimize(back.cols.size());
    }
}
BENCHMARK(bm_lp_roundtrip);

void bm_sample_paths(benchmark::State& state) {
    Config cfg = Config::preset("desk");
    stoch::Rng rng(41);
    env::StationState st = stoch::random_station_state(rng, cfg);
    auto future = [](int, env::EventClass) { return 1.3; };
    int paths = static_cast<int>(state.range(0));
    std::uint64_t seed = 100;
    for (auto _ : state) {
        auto set = stoch::generate_sample_paths(st, 1.1, future, paths, false, cfg, seed++);
        benchmark::DoNotOptimize(set.paths.size());
    }
    state.SetItemsProcessed(state.iterations() * paths);
}
BENCHMARK(bm_sample_paths)->Arg(8)->Arg(30);

void bm_compile_stage(benchmark::State& state) {
    Config cfg = Config::preset("desk");
    auto set = make_scenarios(cfg, static_cast<int>(state.range(0)), 53);
    mpc::CompileOptions opts;
    opts.mode = state.range(1) ? mpc::EmitMode::Literal : mpc::EmitMode::Compact;
    for (auto _ : state) {
        auto sm = mpc::compile_stage(set, cfg, opts);
        benchmark::DoNotOptimize(sm.model.cols.size());
    }
}
BENCHMARK(bm_compile_stage)->Args({3, 0})->Args({3, 1})->Args({8, 0});

void bm_solve_stage(benchmark::State& state) {
    Config cfg = Config::preset("desk");
    auto set = make_scenarios(cfg, static_cast<int>(state.range(0)), 53);
    mpc::CompileOptions opts;
    opts.mode = state.range(1) ? mpc::EmitMode::Literal : mpc::EmitMode::Compact;
    auto sm = mpc::compile_stage(set, cfg, opts);
    for (auto _ : state) {
        auto sol = mpc::solve_stage(sm, set, cfg);
        benchmark::DoNotOptimize(sol.mip.objective);
    }
}
BENCHMARK(bm_solve_stage)->Args({3, 0})->Args({3, 1})->Args({8, 0});

}  // namespace

BENCHMARK_MAIN();
