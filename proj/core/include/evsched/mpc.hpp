#pragma once

#include <string>
#include <vector>

#include "evsched/milp.hpp"
#include "evsched/params.hpp"
#include "evsched/station.hpp"
#include "evsched/stochastic.hpp"

namespace evsched::mpc {

// Two equivalent ways to write the stage program.
//
// Literal keeps every auxiliary of the standard linearization: storage mode
// binaries with McCormick envelopes for the SOC-dependent power caps, the
// split |h| = u + v, the big-M pair that pins grid import to its max form,
// explicit per-stay energy counters and explicit first-stage coupling rows.
//
// Compact drops what cost pressure already enforces: grid import and storage
// wear are penalized, so g >= residual and the wear on h_c + h_dc bind on
// their own, and simultaneous charge/discharge is never optimal. Per-stay
// energy counters collapse into served-stage counting rows, and first-stage
// coupling is done by sharing columns instead of equality rows. Both modes
// have the same optimal value and the same optimal first-stage action.
enum class EmitMode { Literal, Compact };

// Implement: the first window stage is observed (admissions done), so every
// first-stage variable is coupled across scenarios. CandidateEval: paths carry
// their own first-stage arrivals, so only the variables whose meaning is
// shared (piles already parked, storage, renewable use) are coupled.
enum class StageMode { Implement, CandidateEval };

struct CompileOptions {
    EmitMode mode = EmitMode::Compact;
    StageMode stage_mode = StageMode::Implement;
    std::string name;  // model name for export; derived from the stage if empty
};

struct StageModel {
    milp::MilpModel model;
    CompileOptions opts;
    int scenarios = 0;
    int window = 0;
    int first_stage = 0;
    int piles = 0;

    struct StageCols {
        int g = -1, wu = -1, su = -1, hc = -1, hdc = -1;
        int u = -1, v = -1;  // literal |h| split
    };
    std::vector<std::vector<StageCols>> cols;          // [scenario][offset]
    std::vector<std::vector<std::vector<int>>> x_col;  // [scenario][offset][pile], -1 idle
};

// One stage of one scenario read back from a solved model, in reward terms.
struct StageRewardRow {
    double earning = 0.0;
    double procure_cost = 0.0;
    double storage_cost = 0.0;
    double renewable_cost = 0.0;
    double qos_cost = 0.0;       // from the path's lost arrivals
    double posted_price = 0.0;   // from the path
    double grid_import_kw = 0.0;

    double reward_sans_variance() const {
        return earning - procure_cost - storage_cost - renewable_cost - qos_cost;
    }
};

struct StageSolution {
    milp::MipResult mip;
    env::ControlAction first_action;                  // posted_price left at the set's price
    std::vector<std::vector<StageRewardRow>> rewards; // [scenario][offset]
    bool optimal() const {
        return mip.status == milp::MipStatus::Optimal ||
               mip.status == milp::MipStatus::FeasibleWithGap;
    }
};

// Builds the scenario program for one decision stage over the look-ahead
// window. Occupancy, events, prices and renewables are data taken from the
// sampled paths; decisions are per-pile charging, storage flows, renewable
// use and grid import.
StageModel compile_stage(const stoch::ScenarioSet& set, const Config& cfg,
                         const CompileOptions& opts);

// Solves the compiled model and reads back the first-stage action plus the
// per-scenario stage reward rows used by the pricing estimators.
StageSolution solve_stage(const StageModel& sm, const stoch::ScenarioSet& set,
                          const Config& cfg);

}  // namespace evsched::mpc
