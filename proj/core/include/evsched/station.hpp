#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "evsched/params.hpp"

namespace evsched::env {

// Raised when an action or request violates a model constraint. The message
// names the violated constraint and the offending values.
struct FeasibilityError : std::runtime_error {
    explicit FeasibilityError(const std::string& what) : std::runtime_error(what) {}
};

// Station congestion classes: occupancy ratio n/N split into five bands,
// boundaries at 0.2 / 0.4 / 0.6 / 0.8 (upper bound inclusive).
enum class EventClass : int { E1 = 0, E2, E3, E4, E5 };

constexpr int kEventCount = 5;

const char* to_string(EventClass e);
EventClass event_from_string(const std::string& s);

// One charging request: energy still owed and parking stages remaining.
struct EVRequest {
    double energy_kwh     = 0.0;
    int    parking_stages = 0;
};

struct PileState {
    bool   occupied       = false;
    double energy_kwh     = 0.0;  // remaining requirement
    int    stages_left    = 0;    // parking stages remaining, counts this stage
    double locked_price   = 0.0;  // CNY/kWh frozen at arrival
};

struct StationState {
    int    stage = 0;             // 0-based stage within the (periodic) day
    double wind_available_kw  = 0.0;
    double solar_available_kw = 0.0;
    double soc = 0.5;             // battery state of charge in [0,1]
    std::vector<PileState> piles;

    int occupied_count() const;
};

// Stage decision: posted price plus the physical dispatch.
struct ControlAction {
    double posted_price = 0.0;
    double storage_power_kw = 0.0;        // >0 discharge, <0 charge
    double wind_used_kw = 0.0;
    double solar_used_kw = 0.0;
    std::vector<std::uint8_t> charge;     // per pile slot, 1 = charge this stage
};

struct RewardBreakdown {
    double earning = 0.0;           // EV payments this stage
    double procure_cost = 0.0;      // grid energy at the stage tariff
    double storage_cost = 0.0;      // wear on |storage power|
    double wind_cost = 0.0;
    double solar_cost = 0.0;
    double qos_cost = 0.0;          // penalty on EVs turned away
    double variance_penalty = 0.0;  // posted-price variance term
    double grid_import_kw = 0.0;

    // Stage reward without the variance penalty (the share used for averaging
    // across sampled futures), and the full stage reward.
    double reward_sans_variance() const {
        return earning - procure_cost - storage_cost - wind_cost - solar_cost - qos_cost;
    }
    double total() const { return reward_sans_variance() - variance_penalty; }
};

// Exogenous randomness of one stage, drawn independently of any decision:
// raw arrivals with their acceptance lottery, plus realized renewables.
struct ArrivalDraw {
    double    accept_u = 0.0;  // uniform in [0,1); enters iff accept_u < 1 - price/cap
    EVRequest request{};
};

struct StageExogenous {
    std::vector<ArrivalDraw> arrivals;
    double wind_available_kw  = 0.0;  // for the *next* stage's state
    double solar_available_kw = 0.0;
};

struct AdmissionResult {
    std::vector<PileState> piles;   // post-admission pile array
    int entered = 0;
    int lost    = 0;                // price rejections + capacity overflow
    int raw_arrivals = 0;
    std::vector<int> entered_piles; // slots filled this stage, in fill order
};

struct TransitionResult {
    StationState    next;
    RewardBreakdown reward;
    int n_in = 0, n_out = 0, n_lost = 0;
};

// --- pure stage physics -----------------------------------------------------

// Piecewise wind power curve: cubic ramp between cut-in and rated speed,
// capacity between rated and cut-out, zero outside.
double wind_power(double speed_ms, const StationParams& p);

// PV output proportional to irradiance, clipped to installed capacity.
double solar_power(double irradiance_wm2, const StationParams& p);

// Price offered to an EV arriving with `req` when the posted price is
// `posted`: an exponential discount in the request's charging laxity
// (parking stages minus stages of charging needed). Throws FeasibilityError
// if the request cannot be served within its parking time.
double price_discount(double posted, const EVRequest& req, const StationParams& p);

// Laxity of a request in stages (may be fractional on sub-stage energy grids).
double charge_laxity(const EVRequest& req, const StationParams& p);

EventClass classify_event(int occupied, int pile_count);

// Battery SOC after one stage at signed power h (positive = discharge),
// with efficiency losses and hard clamps at empty/full.
double step_storage(double soc, double power_kw, const StationParams& p);

// Feasible signed storage power range (charge_min <= 0 <= discharge_max)
// implied by SOC, capacity and the converter power limit.
struct StoragePowerBounds { double charge_min; double discharge_max; };
StoragePowerBounds storage_power_bounds(double soc, const StationParams& p);

// Grid draw needed to balance EV load minus renewables minus storage.
double grid_import(double ev_load_kw, double wind_used_kw, double solar_used_kw,
                   double storage_power_kw);

// Advance all occupied piles one stage under the charge vector: energy
// decreases by one stage of charging where charge=1, parking clocks tick,
// piles with no time left depart. Throws FeasibilityError if a pile would
// be left unable to finish within its remaining parking time, or if a
// charged pile has nothing left to charge.
struct PileStepResult {
    std::vector<PileState> piles;
    int departures = 0;
};
PileStepResult step_piles(const std::vector<PileState>& piles,
                          const std::vector<std::uint8_t>& charge,
                          const StationParams& p);

// Admit raw arrivals at the posted price: acceptance lottery against the
// posted price, then lowest-index free piles until capacity runs out.
// Rejected-by-price and turned-away-by-capacity both count as lost.
AdmissionResult admit_arrivals(const std::vector<PileState>& piles, double posted_price,
                               const std::vector<ArrivalDraw>& arrivals,
                               const StationParams& p);

// Stage reward for a post-admission pile array and a dispatch decision.
// `window_mean_price` is the mean posted price over the look-ahead window
// used by the variance penalty.
RewardBreakdown stage_reward(const std::vector<PileState>& piles,
                             const ControlAction& action,
                             int n_lost, double window_mean_price, int stage,
                             const StationParams& p);

// Full stage transition: admission, dispatch validation, reward, pile step,
// storage step, next-stage renewables from `exo`. The action's charge vector
// must cover the post-admission pile array (use admit_arrivals to preview).
TransitionResult transition(const StationState& state, const ControlAction& action,
                            const StageExogenous& exo, double window_mean_price,
                            const StationParams& p);

// Validates a dispatch against a post-admission pile array; throws
// FeasibilityError naming the violated constraint.
void validate_action(const std::vector<PileState>& piles, const ControlAction& action,
                     double soc, double wind_avail, double solar_avail,
                     const StationParams& p);

}  // namespace evsched::env
