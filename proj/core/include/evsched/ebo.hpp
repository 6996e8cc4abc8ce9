#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "evsched/mpc.hpp"
#include "evsched/params.hpp"
#include "evsched/station.hpp"
#include "evsched/stochastic.hpp"

// Event-based pricing: a per-stage price table over occupancy events, learned
// online by sweeping candidate prices against simulated futures and keeping
// the best observed stage value per (stage, event).
namespace evsched::ebo {

struct PolicyTable {
    std::vector<std::array<double, env::kEventCount>> price;  // [stage][event]

    static PolicyTable uniform(int horizon, double value);

    int horizon() const { return static_cast<int>(price.size()); }
    double at(int stage, env::EventClass event) const;
    void set(int stage, env::EventClass event, double value);

    bool operator==(const PolicyTable&) const = default;
};

// Posted-price rule of a fixed table, for path generation.
stoch::PriceFn price_fn(const PolicyTable& pol);

void save_policy_csv(const PolicyTable& pol, const std::string& path);
PolicyTable load_policy_csv(const std::string& path);

// Best stage value seen so far per (stage, event). Starts at zero; a price
// update must beat the stored value to be written back.
struct ValueTable {
    std::vector<std::array<double, env::kEventCount>> value;

    static ValueTable zeros(int horizon);

    double at(int stage, env::EventClass event) const;
    void set(int stage, env::EventClass event, double v);
    double total() const;
};

// Mean window-average posted price over sampled paths that follow the
// incumbent table from the current state on.
double estimate_avg_price(const env::StationState& state, const PolicyTable& pol,
                          const Config& cfg, std::uint64_t seed_base);

// Window objective of a scenario set: the dispatch program's per-stage rewards
// minus the price variance penalty around `avg_price`, averaged over paths.
double scenario_value(const stoch::ScenarioSet& set, double avg_price, const Config& cfg,
                      mpc::EmitMode mode = mpc::EmitMode::Compact);

// Value of posting `candidate` now and the table price afterwards.
double evaluate_candidate(const env::StationState& state, double candidate,
                          const PolicyTable& pol, double avg_price, const Config& cfg,
                          std::uint64_t seed_base);

struct StageDecision {
    env::EventClass event = env::EventClass::E1;
    double avg_price = 0.0;
    double greedy_price = 0.0;
    double greedy_value = 0.0;
    double posted_price = 0.0;
    bool updated = false;   // table beat its stored value and was rewritten
    bool explored = false;  // a random grid price overrode the table
};

// One pricing step: sweep the candidate grid, gate the write-back on the
// stored stage value, then apply epsilon exploration to the posted price.
StageDecision choose_price(const env::StationState& state, PolicyTable& pol,
                           ValueTable& values, double epsilon, const Config& cfg,
                           std::uint64_t path_seed, std::uint64_t explore_seed);

// Fresh day: empty piles, configured storage level, drawn renewables.
env::StationState episode_start(const Config& cfg, stoch::Rng& day_rng);

// Dispatch for the current stage from the post-admission state: scenario
// program over sampled futures, first-stage decisions shared across paths.
env::ControlAction implement_action(const env::StationState& post_admission,
                                    double posted_price, const stoch::PriceFn& future_price,
                                    const Config& cfg, std::uint64_t seed_base);

struct StageLogRow {
    int episode = 0;
    int stage = 0;
    env::EventClass event = env::EventClass::E1;
    double epsilon = 0.0;
    double avg_price = 0.0;
    double greedy_price = 0.0;
    double greedy_value = 0.0;
    double posted_price = 0.0;
    bool updated = false;
    bool explored = false;
    env::RewardBreakdown reward;
    double soc = 0.0;
    int occupied = 0;
    int entered = 0;
    int lost = 0;
};

struct EpisodeStats {
    int episode = 0;
    double epsilon = 0.0;
    int updates = 0;
    int explorations = 0;
    double reward_total = 0.0;          // includes the variance penalty
    double reward_sans_variance = 0.0;
    double earning = 0.0;
    double value_table_total = 0.0;     // after this episode
    int entered = 0;
    int lost = 0;
};

struct TrainOptions {
    std::function<void(const EpisodeStats&)> on_episode;
    std::vector<StageLogRow>* stage_log = nullptr;
};

struct TrainResult {
    PolicyTable policy{};
    ValueTable values{};
    std::vector<EpisodeStats> episodes;
    std::string stop_reason;  // "plateau", "fixpoint" or "episode-cap"
    bool converged = false;
};

// Online learning loop: each episode simulates one day; every stage reprices
// via choose_price and dispatches via implement_action.
TrainResult train(const Config& cfg, const TrainOptions& opts = {});

}  // namespace evsched::ebo
