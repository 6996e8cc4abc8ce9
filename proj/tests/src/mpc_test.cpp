#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "evsched/modelgen.hpp"
#include "evsched/mpc.hpp"
#include "evsched/station.hpp"
#include "evsched/stochastic.hpp"

using namespace evsched;
using namespace evsched::mpc;

namespace {

Config small_config() {
    Config cfg = Config::preset("desk");
    cfg.station.pile_count = 4;
    cfg.station.window_stages = 3;
    cfg.sampling.mpc_scenarios = 2;
    cfg.sampling.eval_scenarios = 2;
    cfg.solver.rel_gap = 1e-9;
    cfg.solver.node_limit = 50000;
    return cfg;
}

stoch::ScenarioSet scenarios(const env::StationState& state, double price, int count,
                             bool fresh_first_stage, const Config& cfg, std::uint64_t seed) {
    auto future = [](int, env::EventClass) { return 1.4; };
    return stoch::generate_sample_paths(state, price, future, count, fresh_first_stage, cfg,
                                        seed);
}

// objective excludes the constant lost-arrival penalty, so adding it back to
// the reward rows must reproduce the solver objective exactly
double reward_row_total(const StageModel& sm, const StageSolution& sol) {
    double total = 0.0;
    for (int m = 0; m < sm.scenarios; ++m)
        for (int o = 0; o < sm.window; ++o) {
            const StageRewardRow& row = sol.rewards[m][o];
            total += row.reward_sans_variance() + row.qos_cost;
        }
    return total / sm.scenarios;
}

}  // namespace

TEST_SUITE("mpc") {

TEST_CASE("compact and literal programs agree on the optimum") {
    Config cfg = small_config();
    stoch::Rng rng(301);
    for (int i = 0; i < 4; ++i) {
        auto state = stoch::random_station_state(rng, cfg);
        auto set = scenarios(state, 1.2, cfg.sampling.mpc_scenarios, false, cfg,
                             stoch::substream(7, 40, i));
        CompileOptions compact{EmitMode::Compact, StageMode::Implement, ""};
        CompileOptions literal{EmitMode::Literal, StageMode::Implement, ""};
        auto sm_c = compile_stage(set, cfg, compact);
        auto sm_l = compile_stage(set, cfg, literal);
        CHECK(sm_l.model.rows.size() > sm_c.model.rows.size());

        auto sol_c = solve_stage(sm_c, set, cfg);
        auto sol_l = solve_stage(sm_l, set, cfg);
        REQUIRE(sol_c.optimal());
        REQUIRE(sol_l.optimal());
        double scale = std::max(1.0, std::abs(sol_c.mip.objective));
        CHECK(std::abs(sol_c.mip.objective - sol_l.mip.objective) < 1e-7 * scale);
    }
}

TEST_CASE("reward rows reproduce the solver objective") {
    Config cfg = small_config();
    stoch::Rng rng(302);
    for (int i = 0; i < 4; ++i) {
        auto state = stoch::random_station_state(rng, cfg);
        for (StageMode mode : {StageMode::Implement, StageMode::CandidateEval}) {
            auto set = scenarios(state, 0.8, cfg.sampling.mpc_scenarios,
                                 mode == StageMode::CandidateEval, cfg,
                                 stoch::substream(8, 41, i));
            auto sm = compile_stage(set, cfg, {EmitMode::Compact, mode, ""});
            auto sol = solve_stage(sm, set, cfg);
            REQUIRE(sol.optimal());
            double scale = std::max(1.0, std::abs(sol.mip.objective));
            CHECK(std::abs(sol.mip.objective - reward_row_total(sm, sol)) < 1e-6 * scale);
        }
    }
}

TEST_CASE("replaying the solution through the stage physics matches") {
    Config cfg = small_config();
    stoch::Rng rng(303);
    const StationParams& p = cfg.station;
    double se = p.stage_energy_kwh();

    for (int i = 0; i < 3; ++i) {
        auto state = stoch::random_station_state(rng, cfg);
        auto set = scenarios(state, 1.0, 2, false, cfg, stoch::substream(9, 42, i));
        auto sm = compile_stage(set, cfg, {EmitMode::Compact, StageMode::Implement, ""});
        auto sol = solve_stage(sm, set, cfg);
        REQUIRE(sol.optimal());

        for (int m = 0; m < sm.scenarios; ++m) {
            const auto& path = set.paths[m];
            for (int o = 0; o < sm.window; ++o) {
                std::vector<env::PileState> piles(sm.piles);
                for (const auto& stay : path.stays) {
                    if (stay.arrive_offset > o || stay.depart_offset < o) continue;
                    int charged = 0;
                    for (int k = stay.arrive_offset; k < o; ++k) {
                        int xc = sm.x_col[m][k][stay.pile];
                        if (xc >= 0 && sol.mip.x[xc] > 0.5) ++charged;
                    }
                    auto& pile = piles[stay.pile];
                    pile.occupied = true;
                    pile.locked_price = stay.locked_price;
                    pile.energy_kwh = std::max(stay.energy_kwh - charged * se, 0.0);
                    pile.stages_left = stay.depart_offset - o + 1;
                }
                env::ControlAction act;
                act.posted_price = path.stages[o].posted_price;
                act.charge.assign(sm.piles, 0);
                for (int pile = 0; pile < sm.piles; ++pile) {
                    int xc = sm.x_col[m][o][pile];
                    if (xc >= 0 && sol.mip.x[xc] > 0.5) act.charge[pile] = 1;
                }
                const auto& sc = sm.cols[m][o];
                act.storage_power_kw = sol.mip.x[sc.hdc] - sol.mip.x[sc.hc];
                act.wind_used_kw = sol.mip.x[sc.wu];
                act.solar_used_kw = sol.mip.x[sc.su];

                auto r = env::stage_reward(piles, act, path.stages[o].lost, 0.0,
                                           sm.first_stage + o, p);
                const StageRewardRow& row = sol.rewards[m][o];
                CHECK(std::abs(r.earning - row.earning) < 1e-6);
                CHECK(std::abs(r.procure_cost - row.procure_cost) < 1e-6);
                CHECK(std::abs(r.storage_cost - row.storage_cost) < 1e-6);
                CHECK(std::abs(r.wind_cost + r.solar_cost - row.renewable_cost) < 1e-6);
                CHECK(std::abs(r.qos_cost - row.qos_cost) < 1e-6);
                CHECK(std::abs(r.grid_import_kw - row.grid_import_kw) < 1e-5);
            }
        }
    }
}

TEST_CASE("first-stage action is feasible for the observed state") {
    Config cfg = small_config();
    stoch::Rng rng(304);
    for (int i = 0; i < 5; ++i) {
        auto state = stoch::random_station_state(rng, cfg);
        auto set = scenarios(state, 1.6, 3, false, cfg, stoch::substream(10, 43, i));
        auto sm = compile_stage(set, cfg, {EmitMode::Compact, StageMode::Implement, ""});
        auto sol = solve_stage(sm, set, cfg);
        REQUIRE(sol.optimal());
        CHECK(sol.first_action.posted_price == doctest::Approx(1.6));
        CHECK_NOTHROW(env::validate_action(state.piles, sol.first_action, state.soc,
                                           state.wind_available_kw, state.solar_available_kw,
                                           cfg.station));
    }
}

TEST_CASE("stage programs are deterministic") {
    Config cfg = small_config();
    stoch::Rng rng(305);
    auto state = stoch::random_station_state(rng, cfg);
    auto set = scenarios(state, 1.1, 3, false, cfg, 1234);
    auto sm1 = compile_stage(set, cfg, {});
    auto sm2 = compile_stage(set, cfg, {});
    CHECK(milp::to_lp_string(sm1.model) == milp::to_lp_string(sm2.model));
    auto sol1 = solve_stage(sm1, set, cfg);
    auto sol2 = solve_stage(sm2, set, cfg);
    CHECK(sol1.mip.objective == sol2.mip.objective);
    CHECK(sol1.first_action.charge == sol2.first_action.charge);
    CHECK(sol1.first_action.storage_power_kw == sol2.first_action.storage_power_kw);
}

TEST_CASE("fully served parked piles get no decision variables") {
    Config cfg = small_config();
    env::StationState state;
    state.stage = 5;
    state.soc = 0.5;
    state.wind_available_kw = 10.0;
    state.solar_available_kw = 5.0;
    state.piles = std::vector<env::PileState>(cfg.station.pile_count);
    state.piles[0] = {true, 0.0, 3, 1.5};  // parked, nothing left to deliver
    state.piles[1] = {true, cfg.station.stage_energy_kwh(), 2, 1.2};

    auto set = scenarios(state, 1.3, 2, false, cfg, 777);
    auto sm = compile_stage(set, cfg, {EmitMode::Compact, StageMode::Implement, ""});
    for (int m = 0; m < sm.scenarios; ++m)
        for (int o = 0; o < sm.window; ++o) CHECK(sm.x_col[m][o][0] == -1);

    auto sol = solve_stage(sm, set, cfg);
    REQUIRE(sol.optimal());
    CHECK(sol.first_action.charge[0] == 0);

    // the action must also survive the real transition
    env::StageExogenous exo;
    exo.wind_available_kw = 8.0;
    exo.solar_available_kw = 3.0;
    CHECK_NOTHROW((void)env::transition(state, sol.first_action, exo, 1.3, cfg.station));
}

TEST_CASE("model names stay stable for export") {
    Config cfg = small_config();
    stoch::Rng rng(306);
    auto state = stoch::random_station_state(rng, cfg);
    auto set = scenarios(state, 1.0, 2, false, cfg, 55);
    CompileOptions opts;
    opts.name = "stage_export";
    auto sm = compile_stage(set, cfg, opts);
    CHECK(sm.model.name == "stage_export");
    std::string text = milp::to_lp_string(sm.model);
    CHECK(text.find("stage_export") != std::string::npos);
    auto back = milp::parse_lp_string(text);
    auto a = milp::branch_and_bound(sm.model, cfg.solver);
    auto b = milp::branch_and_bound(back, cfg.solver);
    double scale = std::max(1.0, std::abs(a.objective));
    CHECK(std::abs(a.objective - b.objective) < 1e-7 * scale);
}

}  // TEST_SUITE
