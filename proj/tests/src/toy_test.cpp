#include <cmath>
#include <vector>

#include "doctest.h"
#include "evsched/toy_mdp.hpp"

using namespace evsched;
using namespace evsched::toy;

namespace {

MixedPolicy random_policy(const ToyMdp& mdp, stoch::Rng& rng) {
    MixedPolicy pol;
    pol.first.resize(mdp.n_events);
    pol.future.resize(mdp.n_events);
    for (int e = 0; e < mdp.n_events; ++e) {
        pol.first[e] = rng.uniform_int(0, mdp.n_actions - 1);
        pol.future[e] = rng.uniform_int(0, mdp.n_actions - 1);
    }
    return pol;
}

}  // namespace

TEST_SUITE("toy") {

TEST_CASE("forward marginals are proper distributions") {
    stoch::Rng rng(61);
    for (int i = 0; i < 20; ++i) {
        ToyMdp mdp = random_toy(rng);
        MixedPolicy pol = random_policy(mdp, rng);
        PolicyEval ev = evaluate(mdp, pol, 0);
        for (int k = 0; k <= mdp.window; ++k) {
            double total = 0.0;
            for (double w : ev.marginal[k]) {
                CHECK(w >= -1e-12);
                total += w;
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
        }
        // the anchor is conditioned on the observed event
        for (int s = 0; s < mdp.n_states; ++s)
            if (mdp.event_of[s] != 0) CHECK(ev.marginal[0][s] == 0.0);
    }
}

TEST_CASE("exact evaluation matches a Monte Carlo replay") {
    stoch::Rng rng(62);
    ToyMdp mdp = random_toy(rng);
    MixedPolicy pol = random_policy(mdp, rng);
    PolicyEval ev = evaluate(mdp, pol, 0);

    const int n = 20000;
    stoch::Rng paths(63);
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        ToyPath path = sample_path(mdp, pol, 0, paths);
        double v = 0.0;
        for (int k = 0; k < mdp.window; ++k) {
            double dev = path.prices[k] - ev.avg_price;
            v += path.rewards[k] - mdp.beta * dev * dev;
        }
        sum += v;
        sumsq += v * v;
    }
    double mean = sum / n;
    double se = std::sqrt(std::max(sumsq / n - mean * mean, 0.0) / n);
    CHECK(std::abs(mean - ev.value) < 5.0 * se + 1e-9);
}

TEST_CASE("anchored value equals the first-stage q of the policy itself") {
    stoch::Rng rng(64);
    for (int i = 0; i < 30; ++i) {
        ToyMdp mdp = random_toy(rng);
        MixedPolicy pol = random_policy(mdp, rng);
        for (int e = 0; e < mdp.n_events; ++e) {
            PolicyEval ev = evaluate(mdp, pol, e);
            auto tail = tail_values(mdp, pol, ev.avg_price);
            double q = first_stage_q(mdp, e, pol.first[e], ev.avg_price, tail);
            CHECK(std::abs(ev.value - q) < 1e-10);
        }
    }
}

TEST_CASE("tail recursion matches a direct recomputation") {
    stoch::Rng rng(65);
    ToyMdp mdp = random_toy(rng);
    MixedPolicy pol = random_policy(mdp, rng);
    double center = 1.7;
    auto tail = tail_values(mdp, pol, center);
    for (double v : tail[mdp.window]) CHECK(v == 0.0);
    for (int k = 0; k < mdp.window; ++k) {
        for (int s = 0; s < mdp.n_states; ++s) {
            int a = pol.at(k)[mdp.event_of[s]];
            double dev = mdp.price[a] - center;
            double expect = mdp.reward[a][s] - mdp.beta * dev * dev;
            for (int to = 0; to < mdp.n_states; ++to)
                expect += mdp.trans[a][s][to] * tail[k + 1][to];
            CHECK(tail[k][s] == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("policy difference identity holds on random pairs") {
    stoch::Rng rng(66);
    for (int i = 0; i < 25; ++i) {
        ToyMdp mdp = random_toy(rng);
        MixedPolicy sigma = random_policy(mdp, rng);
        MixedPolicy upsilon = random_policy(mdp, rng);
        for (int e = 0; e < mdp.n_events; ++e)
            CHECK(difference_identity_gap(mdp, e, sigma, upsilon) < 1e-8);
    }
}

TEST_CASE("table enumeration is complete and duplicate free") {
    auto tables = all_tables(3, 2);
    CHECK(tables.size() == 8);
    for (std::size_t i = 0; i < tables.size(); ++i)
        for (std::size_t j = i + 1; j < tables.size(); ++j) CHECK(tables[i] != tables[j]);
}

TEST_CASE("exhaustive optimum dominates sampled policies and deviations") {
    stoch::Rng rng(67);
    for (int i = 0; i < 5; ++i) {
        ToyMdp mdp = random_toy(rng, 4, 2, 3, 3);
        for (int e = 0; e < mdp.n_events; ++e) {
            MixedPolicy best = optimal_policy(mdp, e);
            PolicyEval ev = evaluate(mdp, best, e);
            for (int trial = 0; trial < 10; ++trial) {
                MixedPolicy other = random_policy(mdp, rng);
                CHECK(evaluate(mdp, other, e).value <= ev.value + 1e-12);
            }
            // no first-stage action beats the chosen one under the fixed center
            auto tail = tail_values(mdp, best, ev.avg_price);
            double chosen = first_stage_q(mdp, e, best.first[e], ev.avg_price, tail);
            for (int a = 0; a < mdp.n_actions; ++a)
                CHECK(first_stage_q(mdp, e, a, ev.avg_price, tail) <= chosen + 1e-9);
        }
    }
}

}  // TEST_SUITE
