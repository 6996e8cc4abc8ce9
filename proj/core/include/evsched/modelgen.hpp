#pragma once

#include "evsched/milp.hpp"
#include "evsched/station.hpp"
#include "evsched/stochastic.hpp"

// Random problem instances for solver cross-validation and diagnostics.
namespace evsched::milp {

// Every random model is feasible by construction: row bounds are anchored
// around the row value at a hidden mixed-integer point inside the variable
// bounds, and all variables are bounded.
struct RandomModelOptions {
    int min_binaries = 0;
    int max_binaries = 8;
    int min_continuous = 1;
    int max_continuous = 6;
    int min_rows = 1;
    int max_rows = 12;
    double equality_prob = 0.1;
    double ranged_prob = 0.2;
};

MilpModel random_model(stoch::Rng& rng, const RandomModelOptions& opts = {});

}  // namespace evsched::milp

namespace evsched::stoch {

// Random station state with consistent pile occupancy: remaining energy is a
// quantized amount deliverable within the remaining stay, so every stage
// program built from the state is feasible.
env::StationState random_station_state(Rng& rng, const Config& cfg);

}  // namespace evsched::stoch
