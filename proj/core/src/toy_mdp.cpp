#include "evsched/toy_mdp.hpp"

#include <cmath>
#include <stdexcept>

namespace evsched::toy {

std::vector<double> ToyMdp::anchor_given_event(int event) const {
    std::vector<double> w(n_states, 0.0);
    double total = 0.0;
    for (int s = 0; s < n_states; ++s) {
        if (event_of[s] == event) {
            w[s] = anchor[s];
            total += anchor[s];
        }
    }
    if (total <= 0.0) throw std::invalid_argument("anchor event has zero probability");
    for (double& x : w) x /= total;
    return w;
}

ToyMdp random_toy(stoch::Rng& rng, int max_states, int max_events, int max_actions,
                  int max_window) {
    ToyMdp m;
    m.n_states = rng.uniform_int(2, max_states);
    m.n_events = rng.uniform_int(1, std::min(max_events, m.n_states));
    m.n_actions = rng.uniform_int(2, max_actions);
    m.window = rng.uniform_int(2, max_window);
    m.beta = 0.5 + 2.5 * rng.uniform();

    m.event_of.resize(m.n_states);
    for (int s = 0; s < m.n_states; ++s)
        m.event_of[s] = s < m.n_events ? s : rng.uniform_int(0, m.n_events - 1);

    m.price.resize(m.n_actions);
    for (double& c : m.price) c = 0.5 + 2.5 * rng.uniform();

    m.reward.assign(m.n_actions, std::vector<double>(m.n_states));
    for (auto& row : m.reward)
        for (double& r : row) r = -1.0 + 3.0 * rng.uniform();

    auto simplex = [&rng](int n) {
        std::vector<double> w(n);
        double total = 0.0;
        for (double& x : w) {
            x = 0.05 + 0.95 * rng.uniform();
            total += x;
        }
        for (double& x : w) x /= total;
        return w;
    };

    m.trans.assign(m.n_actions, {});
    for (auto& per_state : m.trans) {
        per_state.resize(m.n_states);
        for (auto& row : per_state) row = simplex(m.n_states);
    }
    m.anchor = simplex(m.n_states);
    return m;
}

PolicyEval evaluate(const ToyMdp& mdp, const MixedPolicy& pol, int event) {
    PolicyEval ev;
    ev.marginal.assign(mdp.window + 1, std::vector<double>(mdp.n_states, 0.0));
    ev.marginal[0] = mdp.anchor_given_event(event);

    std::vector<double> e_reward(mdp.window, 0.0), e_price(mdp.window, 0.0),
        e_price2(mdp.window, 0.0);
    for (int k = 0; k < mdp.window; ++k) {
        const std::vector<int>& table = pol.at(k);
        for (int s = 0; s < mdp.n_states; ++s) {
            double w = ev.marginal[k][s];
            if (w == 0.0) continue;
            int a = table[mdp.event_of[s]];
            e_reward[k] += w * mdp.reward[a][s];
            e_price[k] += w * mdp.price[a];
            e_price2[k] += w * mdp.price[a] * mdp.price[a];
            for (int to = 0; to < mdp.n_states; ++to)
                ev.marginal[k + 1][to] += w * mdp.trans[a][s][to];
        }
    }

    double price_sum = 0.0;
    for (double c : e_price) price_sum += c;
    ev.avg_price = price_sum / mdp.window;

    ev.value = 0.0;
    for (int k = 0; k < mdp.window; ++k) {
        double spread = e_price2[k] - 2.0 * ev.avg_price * e_price[k] +
                        ev.avg_price * ev.avg_price;
        ev.value += e_reward[k] - mdp.beta * spread;
    }
    return ev;
}

std::vector<std::vector<double>> tail_values(const ToyMdp& mdp, const MixedPolicy& pol,
                                             double center) {
    std::vector<std::vector<double>> tail(mdp.window + 1,
                                          std::vector<double>(mdp.n_states, 0.0));
    for (int k = mdp.window - 1; k >= 0; --k) {
        const std::vector<int>& table = pol.at(k);
        for (int s = 0; s < mdp.n_states; ++s) {
            int a = table[mdp.event_of[s]];
            double dev = mdp.price[a] - center;
            double next = 0.0;
            for (int to = 0; to < mdp.n_states; ++to)
                next += mdp.trans[a][s][to] * tail[k + 1][to];
            tail[k][s] = mdp.reward[a][s] - mdp.beta * dev * dev + next;
        }
    }
    return tail;
}

double first_stage_q(const ToyMdp& mdp, int event, int action, double center,
                     const std::vector<std::vector<double>>& tail) {
    std::vector<double> w = mdp.anchor_given_event(event);
    double dev = mdp.price[action] - center;
    double q = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
        if (w[s] == 0.0) continue;
        double next = 0.0;
        for (int to = 0; to < mdp.n_states; ++to)
            next += mdp.trans[action][s][to] * tail[1][to];
        q += w[s] * (mdp.reward[action][s] - mdp.beta * dev * dev + next);
    }
    return q;
}

double difference_identity_gap(const ToyMdp& mdp, int event, const MixedPolicy& sigma,
                               const MixedPolicy& upsilon) {
    PolicyEval ev_s = evaluate(mdp, sigma, event);
    PolicyEval ev_u = evaluate(mdp, upsilon, event);
    double lhs = ev_s.value - ev_u.value;

    std::vector<std::vector<double>> tail_u = tail_values(mdp, upsilon, ev_u.avg_price);
    double rhs = 0.0;
    for (int k = 0; k < mdp.window; ++k) {
        const std::vector<int>& tab_s = sigma.at(k);
        const std::vector<int>& tab_u = upsilon.at(k);
        for (int s = 0; s < mdp.n_states; ++s) {
            double w = ev_s.marginal[k][s];
            if (w == 0.0) continue;
            int a_s = tab_s[mdp.event_of[s]];
            int a_u = tab_u[mdp.event_of[s]];
            double next_s = 0.0, next_u = 0.0;
            for (int to = 0; to < mdp.n_states; ++to) {
                next_s += mdp.trans[a_s][s][to] * tail_u[k + 1][to];
                next_u += mdp.trans[a_u][s][to] * tail_u[k + 1][to];
            }
            double dev_s = mdp.price[a_s] - ev_s.avg_price;
            double dev_u = mdp.price[a_u] - ev_u.avg_price;
            double lift = mdp.reward[a_s][s] - mdp.beta * dev_s * dev_s + next_s;
            double base = mdp.reward[a_u][s] - mdp.beta * dev_u * dev_u + next_u;
            rhs += w * (lift - base);
        }
    }
    return std::fabs(lhs - rhs);
}

std::vector<std::vector<int>> all_tables(int n_events, int n_actions) {
    std::vector<std::vector<int>> out;
    std::vector<int> table(n_events, 0);
    while (true) {
        out.push_back(table);
        int pos = 0;
        while (pos < n_events) {
            if (++table[pos] < n_actions) break;
            table[pos++] = 0;
        }
        if (pos == n_events) break;
    }
    return out;
}

MixedPolicy optimal_policy(const ToyMdp& mdp, int event) {
    std::vector<std::vector<int>> tables = all_tables(mdp.n_events, mdp.n_actions);
    MixedPolicy best;
    double best_value = 0.0;
    bool have = false;
    for (const auto& first : tables) {
        for (const auto& future : tables) {
            MixedPolicy pol{first, future};
            double value = evaluate(mdp, pol, event).value;
            if (!have || value > best_value) {
                best = pol;
                best_value = value;
                have = true;
            }
        }
    }
    return best;
}

ToyPath sample_path(const ToyMdp& mdp, const MixedPolicy& pol, int event, stoch::Rng& rng) {
    auto draw = [&rng](const std::vector<double>& w) {
        double u = rng.uniform();
        double acc = 0.0;
        int last = 0;
        for (int i = 0; i < static_cast<int>(w.size()); ++i) {
            if (w[i] == 0.0) continue;
            acc += w[i];
            last = i;
            if (u < acc) return i;
        }
        return last;
    };

    ToyPath path;
    int s = draw(mdp.anchor_given_event(event));
    for (int k = 0; k < mdp.window; ++k) {
        int a = pol.at(k)[mdp.event_of[s]];
        path.states.push_back(s);
        path.actions.push_back(a);
        path.prices.push_back(mdp.price[a]);
        path.rewards.push_back(mdp.reward[a][s]);
        s = draw(mdp.trans[a][s]);
    }
    return path;
}

}  // namespace evsched::toy
