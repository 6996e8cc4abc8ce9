#include "evsched/ebo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "evsched/csv.hpp"

namespace evsched::ebo {

namespace {
int wrap(int stage, int horizon) { return ((stage % horizon) + horizon) % horizon; }
}

PolicyTable PolicyTable::uniform(int horizon, double value) {
    PolicyTable pol;
    pol.price.resize(horizon);
    for (auto& row : pol.price) row.fill(value);
    return pol;
}

double PolicyTable::at(int stage, env::EventClass event) const {
    return price[wrap(stage, horizon())][static_cast<int>(event)];
}

void PolicyTable::set(int stage, env::EventClass event, double value) {
    price[wrap(stage, horizon())][static_cast<int>(event)] = value;
}

stoch::PriceFn price_fn(const PolicyTable& pol) {
    return [pol](int stage, env::EventClass event) { return pol.at(stage, event); };
}

void save_policy_csv(const PolicyTable& pol, const std::string& path) {
    csv::Table table;
    table.header = {"stage"};
    for (int e = 0; e < env::kEventCount; ++e)
        table.header.push_back(env::to_string(static_cast<env::EventClass>(e)));
    for (int t = 0; t < pol.horizon(); ++t) {
        std::vector<std::string> row{std::to_string(t)};
        for (int e = 0; e < env::kEventCount; ++e)
            row.push_back(csv::format_double(pol.price[t][e]));
        table.rows.push_back(std::move(row));
    }
    csv::write_file(path, table);
}

PolicyTable load_policy_csv(const std::string& path) {
    csv::Table table = csv::read_file(path);
    if (table.header.size() != 1 + env::kEventCount)
        throw std::runtime_error("policy file " + path + ": expected stage plus " +
                                 std::to_string(env::kEventCount) + " event columns");
    PolicyTable pol;
    pol.price.resize(table.rows.size());
    for (const auto& row : table.rows) {
        int t = std::stoi(row.at(0));
        if (t < 0 || t >= pol.horizon())
            throw std::runtime_error("policy file " + path + ": stage out of range");
        for (int e = 0; e < env::kEventCount; ++e)
            pol.price[t][e] = std::stod(row.at(1 + e));
    }
    return pol;
}

ValueTable ValueTable::zeros(int horizon) {
    ValueTable v;
    v.value.resize(horizon);
    for (auto& row : v.value) row.fill(0.0);
    return v;
}

double ValueTable::at(int stage, env::EventClass event) const {
    return value[wrap(stage, static_cast<int>(value.size()))][static_cast<int>(event)];
}

void ValueTable::set(int stage, env::EventClass event, double v) {
    value[wrap(stage, static_cast<int>(value.size()))][static_cast<int>(event)] = v;
}

double ValueTable::total() const {
    double total = 0.0;
    for (const auto& row : value)
        for (double v : row) total += v;
    return total;
}

double estimate_avg_price(const env::StationState& state, const PolicyTable& pol,
                          const Config& cfg, std::uint64_t seed_base) {
    const StationParams& p = cfg.station;
    stoch::PriceFn fn = price_fn(pol);
    env::EventClass event = env::classify_event(state.occupied_count(), p.pile_count);
    double first = fn(state.stage, event);
    stoch::ScenarioSet set = stoch::generate_sample_paths(
        state, first, fn, cfg.sampling.sample_paths, true, cfg, seed_base);
    double total = 0.0;
    for (const stoch::SamplePath& path : set.paths) {
        double path_sum = 0.0;
        for (const stoch::PathStage& ps : path.stages) path_sum += ps.posted_price;
        total += path_sum / set.window;
    }
    return total / static_cast<double>(set.paths.size());
}

double scenario_value(const stoch::ScenarioSet& set, double avg_price, const Config& cfg,
                      mpc::EmitMode mode) {
    mpc::CompileOptions opts;
    opts.mode = mode;
    opts.stage_mode = mpc::StageMode::CandidateEval;
    mpc::StageModel sm = mpc::compile_stage(set, cfg, opts);
    mpc::StageSolution sol = mpc::solve_stage(sm, set, cfg);

    const double beta = cfg.station.price_variance_weight;
    double total = 0.0;
    for (const auto& scenario : sol.rewards) {
        for (const mpc::StageRewardRow& row : scenario) {
            double dev = row.posted_price - avg_price;
            total += row.reward_sans_variance() - beta * dev * dev;
        }
    }
    return total / static_cast<double>(sol.rewards.size());
}

double evaluate_candidate(const env::StationState& state, double candidate,
                          const PolicyTable& pol, double avg_price, const Config& cfg,
                          std::uint64_t seed_base) {
    stoch::ScenarioSet set = stoch::generate_sample_paths(
        state, candidate, price_fn(pol), cfg.sampling.eval_scenarios, true, cfg, seed_base);
    return scenario_value(set, avg_price, cfg);
}

StageDecision choose_price(const env::StationState& state, PolicyTable& pol,
                           ValueTable& values, double epsilon, const Config& cfg,
                           std::uint64_t path_seed, std::uint64_t explore_seed) {
    const StationParams& p = cfg.station;
    StageDecision dec;
    dec.event = env::classify_event(state.occupied_count(), p.pile_count);
    dec.avg_price = estimate_avg_price(state, pol, cfg, path_seed);

    std::vector<double> grid = cfg.pricing.candidate_grid();
    dec.greedy_value = -std::numeric_limits<double>::infinity();
    for (double phi : grid) {
        double value = evaluate_candidate(state, phi, pol, dec.avg_price, cfg, path_seed);
        if (value > dec.greedy_value) {
            dec.greedy_value = value;
            dec.greedy_price = phi;
        }
    }

    if (dec.greedy_value > values.at(state.stage, dec.event)) {
        values.set(state.stage, dec.event, dec.greedy_value);
        pol.set(state.stage, dec.event, dec.greedy_price);
        dec.updated = true;
    }

    stoch::Rng explore(explore_seed);
    double lottery = explore.uniform();
    int pick = explore.uniform_int(0, static_cast<int>(grid.size()) - 1);
    if (lottery < epsilon) {
        dec.explored = true;
        dec.posted_price = grid[pick];
    } else {
        dec.posted_price = pol.at(state.stage, dec.event);
    }
    return dec;
}

env::StationState episode_start(const Config& cfg, stoch::Rng& day_rng) {
    env::StationState state;
    state.stage = 0;
    state.soc = cfg.station.initial_soc;
    state.piles.assign(cfg.station.pile_count, env::PileState{});
    stoch::draw_renewables(day_rng, 0, cfg, state.wind_available_kw, state.solar_available_kw);
    return state;
}

env::ControlAction implement_action(const env::StationState& post_admission,
                                    double posted_price, const stoch::PriceFn& future_price,
                                    const Config& cfg, std::uint64_t seed_base) {
    stoch::ScenarioSet set =
        stoch::generate_sample_paths(post_admission, posted_price, future_price,
                                     cfg.sampling.mpc_scenarios, false, cfg, seed_base);
    mpc::CompileOptions opts;
    opts.mode = mpc::EmitMode::Compact;
    opts.stage_mode = mpc::StageMode::Implement;
    mpc::StageModel sm = mpc::compile_stage(set, cfg, opts);
    return mpc::solve_stage(sm, set, cfg).first_action;
}

TrainResult train(const Config& cfg, const TrainOptions& opts) {
    const StationParams& p = cfg.station;
    const int horizon = p.horizon_stages;
    const auto tag = [](stoch::StreamTag t) { return static_cast<std::uint64_t>(t); };

    TrainResult out;
    out.policy = PolicyTable::uniform(horizon, cfg.pricing.initial_price);
    out.values = ValueTable::zeros(horizon);

    for (int ep = 0; ep < cfg.pricing.max_episodes; ++ep) {
        double epsilon = cfg.pricing.epsilon.at_episode(ep);
        stoch::Rng day_rng(stoch::substream(cfg.seed, tag(stoch::StreamTag::DayExogenous), ep));
        env::StationState state = episode_start(cfg, day_rng);

        EpisodeStats stats;
        stats.episode = ep;
        stats.epsilon = epsilon;
        for (int t = 0; t < horizon; ++t) {
            std::uint64_t path_seed =
                stoch::substream(cfg.seed, tag(stoch::StreamTag::SamplePath), ep, t);
            std::uint64_t explore_seed =
                stoch::substream(cfg.seed, tag(stoch::StreamTag::Exploration), ep, t);
            StageDecision dec =
                choose_price(state, out.policy, out.values, epsilon, cfg, path_seed,
                             explore_seed);

            env::StageExogenous exo = stoch::draw_stage_exogenous(day_rng, t, cfg);
            env::AdmissionResult adm =
                env::admit_arrivals(state.piles, dec.posted_price, exo.arrivals, p);
            env::StationState post = state;
            post.piles = adm.piles;
            env::ControlAction act = implement_action(
                post, dec.posted_price, price_fn(out.policy), cfg,
                stoch::substream(cfg.seed, tag(stoch::StreamTag::SamplePath), ep, t, 1));
            env::TransitionResult res = env::transition(state, act, exo, dec.avg_price, p);

            stats.updates += dec.updated ? 1 : 0;
            stats.explorations += dec.explored ? 1 : 0;
            stats.reward_total += res.reward.total();
            stats.reward_sans_variance += res.reward.reward_sans_variance();
            stats.earning += res.reward.earning;
            stats.entered += res.n_in;
            stats.lost += res.n_lost;
            if (opts.stage_log) {
                StageLogRow row;
                row.episode = ep;
                row.stage = t;
                row.event = dec.event;
                row.epsilon = epsilon;
                row.avg_price = dec.avg_price;
                row.greedy_price = dec.greedy_price;
                row.greedy_value = dec.greedy_value;
                row.posted_price = dec.posted_price;
                row.updated = dec.updated;
                row.explored = dec.explored;
                row.reward = res.reward;
                row.soc = res.next.soc;
                row.occupied = res.next.occupied_count();
                row.entered = res.n_in;
                row.lost = res.n_lost;
                opts.stage_log->push_back(row);
            }
            state = res.next;
        }

        stats.value_table_total = out.values.total();
        out.episodes.push_back(stats);
        if (opts.on_episode) opts.on_episode(stats);

        if (cfg.pricing.stop_on_plateau) {
            int window = cfg.pricing.plateau_window;
            int n = static_cast<int>(out.episodes.size());
            if (n > window) {
                double prev = out.episodes[n - 1 - window].value_table_total;
                double rel = (stats.value_table_total - prev) / std::max(std::abs(prev), 1e-9);
                if (rel < cfg.pricing.plateau_rel_tol) {
                    out.stop_reason = "plateau";
                    out.converged = true;
                    break;
                }
            }
        } else if (stats.updates == 0 && stats.explorations == 0) {
            // the whole day reproduced the incumbent table
            out.stop_reason = "fixpoint";
            out.converged = true;
            break;
        }
    }
    if (out.stop_reason.empty()) out.stop_reason = "episode-cap";
    return out;
}

}  // namespace evsched::ebo
