#pragma once

#include <vector>

#include "evsched/stochastic.hpp"

// Small finite MDPs with exactly computable window objectives. These serve as
// independent ground truth for the event-based pricing machinery: forward
// marginals, window values with a variance penalty around a constant center,
// the policy difference identity, and first-stage policy optimality.
namespace evsched::toy {

struct ToyMdp {
    int n_states = 0;
    int n_events = 0;
    int n_actions = 0;
    int window = 0;
    std::vector<int> event_of;                        // state -> observed event
    std::vector<double> price;                        // action -> posted price
    std::vector<std::vector<double>> reward;          // [action][state]
    std::vector<std::vector<std::vector<double>>> trans;  // [action][from][to]
    std::vector<double> anchor;                       // start distribution over states
    double beta = 0.0;

    // anchor conditioned on observing a given event at the first stage
    std::vector<double> anchor_given_event(int event) const;
};

// First-stage action table plus the table used at every later offset.
struct MixedPolicy {
    std::vector<int> first;
    std::vector<int> future;

    const std::vector<int>& at(int offset) const { return offset == 0 ? first : future; }
};

struct PolicyEval {
    double value = 0.0;      // expected window reward minus the variance penalty
    double avg_price = 0.0;  // expected window-average posted price
    std::vector<std::vector<double>> marginal;  // [offset][state], anchored forward
};

ToyMdp random_toy(stoch::Rng& rng, int max_states = 5, int max_events = 3,
                  int max_actions = 3, int max_window = 3);

// Exact anchored evaluation of a mixed policy observed at a given event.
PolicyEval evaluate(const ToyMdp& mdp, const MixedPolicy& pol, int event);

// Backward state values per offset with the penalty taken around a fixed
// center price. tail[k][s] covers offsets k..window-1, tail[window] is zero.
std::vector<std::vector<double>> tail_values(const ToyMdp& mdp, const MixedPolicy& pol,
                                             double center);

// One-step value of posting a first-stage action and following the tail.
double first_stage_q(const ToyMdp& mdp, int event, int action, double center,
                     const std::vector<std::vector<double>>& tail);

// Residual of the policy difference identity between two mixed policies.
double difference_identity_gap(const ToyMdp& mdp, int event, const MixedPolicy& sigma,
                               const MixedPolicy& upsilon);

// All event-to-action tables for the given sizes, in odometer order.
std::vector<std::vector<int>> all_tables(int n_events, int n_actions);

// Exhaustive argmax of evaluate() over mixed policies for one anchor event.
MixedPolicy optimal_policy(const ToyMdp& mdp, int event);

struct ToyPath {
    std::vector<int> states;
    std::vector<int> actions;
    std::vector<double> prices;
    std::vector<double> rewards;
};

// Monte Carlo draw of one anchored path under a mixed policy.
ToyPath sample_path(const ToyMdp& mdp, const MixedPolicy& pol, int event, stoch::Rng& rng);

}  // namespace evsched::toy
