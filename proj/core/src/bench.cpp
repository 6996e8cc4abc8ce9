#include "evsched/bench.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evsched::bench {

namespace {
constexpr double kHighPrice = 2.3;
constexpr double kLowPrice = 0.3;

std::uint64_t tag(stoch::StreamTag t) { return static_cast<std::uint64_t>(t); }

int required_stages(double energy_kwh, double stage_energy) {
    if (energy_kwh <= 1e-9) return 0;
    return static_cast<int>(std::ceil(energy_kwh / stage_energy - 1e-9));
}
}  // namespace

std::vector<PolicySpec> standard_policies() {
    std::vector<PolicySpec> specs;
    specs.push_back({"pi*", PricingMode::Learned, ChargingMode::Mpc, 0.0});
    specs.push_back({"pi1", PricingMode::Learned, ChargingMode::Greedy, 0.0});
    specs.push_back({"pi2", PricingMode::Learned, ChargingMode::Delayed, 0.0});
    specs.push_back({"pi3", PricingMode::Constant, ChargingMode::Mpc, kHighPrice});
    specs.push_back({"pi4", PricingMode::Constant, ChargingMode::Greedy, kHighPrice});
    specs.push_back({"pi5", PricingMode::Constant, ChargingMode::Delayed, kHighPrice});
    specs.push_back({"pi6", PricingMode::Constant, ChargingMode::Mpc, kLowPrice});
    specs.push_back({"pi7", PricingMode::Constant, ChargingMode::Greedy, kLowPrice});
    specs.push_back({"pi8", PricingMode::Constant, ChargingMode::Delayed, kLowPrice});
    specs.push_back({"pi9", PricingMode::EventTable, ChargingMode::Mpc, 0.0});
    return specs;
}

double event_price_baseline(env::EventClass event) {
    switch (event) {
        case env::EventClass::E1: return 1.0;
        case env::EventClass::E2: return 1.4;
        case env::EventClass::E3: return 1.8;
        case env::EventClass::E4: return 2.1;
        case env::EventClass::E5: return 2.4;
    }
    return 1.0;
}

std::vector<std::uint8_t> greedy_charge(const std::vector<env::PileState>& piles,
                                        const StationParams&) {
    std::vector<std::uint8_t> charge(piles.size(), 0);
    for (std::size_t i = 0; i < piles.size(); ++i)
        charge[i] = piles[i].occupied && piles[i].energy_kwh > 1e-9 ? 1 : 0;
    return charge;
}

std::vector<std::uint8_t> delayed_charge(const std::vector<env::PileState>& piles,
                                         const StationParams& p) {
    const double se = p.stage_energy_kwh();
    std::vector<std::uint8_t> charge(piles.size(), 0);
    for (std::size_t i = 0; i < piles.size(); ++i) {
        const env::PileState& pile = piles[i];
        if (!pile.occupied) continue;
        int need = required_stages(pile.energy_kwh, se);
        charge[i] = need >= pile.stages_left && need > 0 ? 1 : 0;
    }
    return charge;
}

env::ControlAction heuristic_dispatch(const env::StationState& state,
                                      std::vector<std::uint8_t> charge, double posted_price,
                                      const StationParams& p) {
    env::ControlAction act;
    act.posted_price = posted_price;
    act.charge = std::move(charge);

    int charging = 0;
    for (std::uint8_t z : act.charge) charging += z;
    double load = charging * p.pile_power_kw;

    double wind_used = std::min(load, state.wind_available_kw);
    double rest = load - wind_used;
    double solar_used = std::min(rest, state.solar_available_kw);
    rest -= solar_used;

    env::StoragePowerBounds bounds = env::storage_power_bounds(state.soc, p);
    double storage = 0.0;
    if (rest > 1e-12) {
        storage = std::min(rest, bounds.discharge_max);
    } else {
        double surplus = (state.wind_available_kw - wind_used) +
                         (state.solar_available_kw - solar_used);
        double fill = std::min(surplus, -bounds.charge_min);
        if (fill > 1e-12) {
            storage = -fill;
            double from_wind = std::min(state.wind_available_kw - wind_used, fill);
            wind_used += from_wind;
            solar_used += fill - from_wind;
        }
    }

    act.wind_used_kw = wind_used;
    act.solar_used_kw = std::min(solar_used, state.solar_available_kw);
    act.storage_power_kw = storage;
    return act;
}

double DayResult::price_std() const {
    if (posted_prices.empty()) return 0.0;
    double mean = 0.0;
    for (double c : posted_prices) mean += c;
    mean /= static_cast<double>(posted_prices.size());
    double var = 0.0;
    for (double c : posted_prices) var += (c - mean) * (c - mean);
    return std::sqrt(var / static_cast<double>(posted_prices.size()));
}

double DayResult::price_gap() const {
    if (posted_prices.empty()) return 0.0;
    auto [lo, hi] = std::minmax_element(posted_prices.begin(), posted_prices.end());
    return *hi - *lo;
}

DayResult simulate_day(const PolicySpec& spec, const ebo::PolicyTable* learned,
                       const Config& cfg, int day, std::vector<StageTraceRow>* trace) {
    const StationParams& p = cfg.station;
    if (spec.pricing == PricingMode::Learned && learned == nullptr)
        throw std::invalid_argument("policy " + spec.name + " needs a learned price table");

    stoch::PriceFn future;
    switch (spec.pricing) {
        case PricingMode::Learned: future = ebo::price_fn(*learned); break;
        case PricingMode::Constant: {
            double c = spec.constant_price;
            future = [c](int, env::EventClass) { return c; };
            break;
        }
        case PricingMode::EventTable:
            future = [](int, env::EventClass e) { return event_price_baseline(e); };
            break;
    }

    stoch::Rng day_rng(
        stoch::substream(cfg.seed, tag(stoch::StreamTag::Diagnostics), day));
    env::StationState state = ebo::episode_start(cfg, day_rng);

    DayResult out;
    for (int t = 0; t < p.horizon_stages; ++t) {
        env::EventClass event = env::classify_event(state.occupied_count(), p.pile_count);
        double posted = future(t, event);

        env::StageExogenous exo = stoch::draw_stage_exogenous(day_rng, t, cfg);
        env::AdmissionResult adm = env::admit_arrivals(state.piles, posted, exo.arrivals, p);
        env::StationState post = state;
        post.piles = adm.piles;

        env::ControlAction act;
        switch (spec.charging) {
            case ChargingMode::Mpc:
                act = ebo::implement_action(
                    post, posted, future, cfg,
                    stoch::substream(cfg.seed, tag(stoch::StreamTag::SamplePath), day, t, 2));
                break;
            case ChargingMode::Greedy:
                act = heuristic_dispatch(post, greedy_charge(post.piles, p), posted, p);
                break;
            case ChargingMode::Delayed:
                act = heuristic_dispatch(post, delayed_charge(post.piles, p), posted, p);
                break;
        }

        // penalty center = posted price: realized window centers are applied
        // to the day total afterwards
        env::TransitionResult res = env::transition(state, act, exo, posted, p);

        out.earning += res.reward.earning;
        out.procure_cost += res.reward.procure_cost;
        out.storage_cost += res.reward.storage_cost;
        out.wind_cost += res.reward.wind_cost;
        out.solar_cost += res.reward.solar_cost;
        out.qos_cost += res.reward.qos_cost;
        out.arrivals += adm.raw_arrivals;
        out.entered += res.n_in;
        out.lost += res.n_lost;
        out.posted_prices.push_back(posted);

        if (trace) {
            StageTraceRow row;
            row.day = day;
            row.stage = t;
            row.event = event;
            row.posted_price = posted;
            row.raw_arrivals = adm.raw_arrivals;
            row.entered = res.n_in;
            row.departed = res.n_out;
            row.lost = res.n_lost;
            row.wind_available_kw = state.wind_available_kw;
            row.solar_available_kw = state.solar_available_kw;
            row.wind_used_kw = act.wind_used_kw;
            row.solar_used_kw = act.solar_used_kw;
            row.storage_power_kw = act.storage_power_kw;
            row.grid_import_kw = res.reward.grid_import_kw;
            row.soc_after = res.next.soc;
            int charging = 0;
            for (std::uint8_t z : act.charge) charging += z;
            row.charging = charging;
            row.occupied_after = res.next.occupied_count();
            row.reward = res.reward;
            trace->push_back(row);
        }
        state = res.next;
    }

    const int horizon = p.horizon_stages;
    const int window = p.window_stages;
    const double beta = p.price_variance_weight;
    for (int t = 0; t < horizon; ++t) {
        double mean = 0.0;
        for (int o = 0; o < window; ++o) mean += out.posted_prices[(t + o) % horizon];
        mean /= window;
        double dev = out.posted_prices[t] - mean;
        out.variance_penalty += beta * dev * dev;
    }
    return out;
}

MetricSummary summarize(const std::vector<double>& samples) {
    MetricSummary s;
    if (samples.empty()) return s;
    double total = 0.0;
    for (double x : samples) total += x;
    s.mean = total / static_cast<double>(samples.size());
    if (samples.size() > 1) {
        double var = 0.0;
        for (double x : samples) var += (x - s.mean) * (x - s.mean);
        var /= static_cast<double>(samples.size() - 1);
        s.ci95 = 1.96 * std::sqrt(var / static_cast<double>(samples.size()));
    }
    return s;
}

RunMetrics aggregate_days(const std::string& name, const std::vector<DayResult>& days) {
    RunMetrics m;
    m.policy = name;
    m.days = static_cast<int>(days.size());

    auto collect = [&days](auto&& get) {
        std::vector<double> xs;
        xs.reserve(days.size());
        for (const DayResult& d : days) xs.push_back(get(d));
        return xs;
    };

    m.obj_profit_minus_qos =
        summarize(collect([](const DayResult& d) { return d.obj_profit_minus_qos(); }));
    m.obj_with_variance =
        summarize(collect([](const DayResult& d) { return d.obj_with_variance(); }));
    m.profit = summarize(collect([](const DayResult& d) { return d.profit(); }));
    m.earning = summarize(collect([](const DayResult& d) { return d.earning; }));
    m.procure_cost = summarize(collect([](const DayResult& d) { return d.procure_cost; }));
    m.storage_cost = summarize(collect([](const DayResult& d) { return d.storage_cost; }));
    m.wind_cost = summarize(collect([](const DayResult& d) { return d.wind_cost; }));
    m.solar_cost = summarize(collect([](const DayResult& d) { return d.solar_cost; }));
    m.qos_cost = summarize(collect([](const DayResult& d) { return d.qos_cost; }));
    m.arrival_num =
        summarize(collect([](const DayResult& d) { return static_cast<double>(d.arrivals); }));
    m.enter_num =
        summarize(collect([](const DayResult& d) { return static_cast<double>(d.entered); }));
    m.price_std = summarize(collect([](const DayResult& d) { return d.price_std(); }));
    m.price_gap = summarize(collect([](const DayResult& d) { return d.price_gap(); }));

    // ratio metrics use pooled sums so the reported identities hold exactly;
    // the interval reflects the day-to-day spread of the ratio
    double total_arrivals = 0.0, total_entered = 0.0, total_earning = 0.0;
    std::vector<double> day_service, day_cost;
    for (const DayResult& d : days) {
        total_arrivals += d.arrivals;
        total_entered += d.entered;
        total_earning += d.earning;
        if (d.arrivals > 0) day_service.push_back(static_cast<double>(d.entered) / d.arrivals);
        if (d.entered > 0) day_cost.push_back(d.earning / d.entered);
    }
    m.service_ratio = summarize(day_service);
    m.service_ratio.mean = total_arrivals > 0.0 ? total_entered / total_arrivals : 0.0;
    m.avg_cost_per_ev = summarize(day_cost);
    m.avg_cost_per_ev.mean = total_entered > 0.0 ? total_earning / total_entered : 0.0;
    return m;
}

std::vector<RunMetrics> run_benchmark(const std::vector<PolicySpec>& specs,
                                      const ebo::PolicyTable* learned, const Config& cfg,
                                      int days) {
    std::vector<RunMetrics> rows;
    rows.reserve(specs.size());
    for (const PolicySpec& spec : specs) {
        std::vector<DayResult> results;
        results.reserve(days);
        for (int day = 0; day < days; ++day)
            results.push_back(simulate_day(spec, learned, cfg, day));
        rows.push_back(aggregate_days(spec.name, results));
    }
    return rows;
}

std::vector<SweepPoint> beta_sweep(const std::vector<double>& betas, const Config& cfg,
                                   int eval_days) {
    std::vector<SweepPoint> points;
    for (double beta : betas) {
        Config tuned = cfg;
        tuned.station.price_variance_weight = beta;
        ebo::TrainResult trained = ebo::train(tuned);

        PolicySpec spec{"pi*", PricingMode::Learned, ChargingMode::Mpc, 0.0};
        std::vector<DayResult> results;
        results.reserve(eval_days);
        for (int day = 0; day < eval_days; ++day)
            results.push_back(simulate_day(spec, &trained.policy, tuned, day));

        SweepPoint point;
        point.value = beta;
        point.metrics = aggregate_days("pi*", results);
        point.converged = trained.converged;
        point.episodes = static_cast<int>(trained.episodes.size());
        points.push_back(std::move(point));
    }
    return points;
}

std::vector<SweepPoint> sensitivity_sweep(SweepDimension dim,
                                          const std::vector<double>& values, const Config& cfg,
                                          int eval_days) {
    std::vector<SweepPoint> points;
    for (double value : values) {
        Config tuned = cfg;
        if (dim == SweepDimension::Capacity) {
            tuned.station.pile_count = std::max(1, static_cast<int>(std::llround(value)));
        } else {
            for (double& lambda : tuned.station.arrival_rate) lambda = value;
        }
        tuned.validate();
        ebo::TrainResult trained = ebo::train(tuned);

        PolicySpec spec{"pi*", PricingMode::Learned, ChargingMode::Mpc, 0.0};
        std::vector<DayResult> results;
        results.reserve(eval_days);
        for (int day = 0; day < eval_days; ++day)
            results.push_back(simulate_day(spec, &trained.policy, tuned, day));

        SweepPoint point;
        point.value = value;
        point.metrics = aggregate_days("pi*", results);
        point.converged = trained.converged;
        point.episodes = static_cast<int>(trained.episodes.size());
        points.push_back(std::move(point));
    }
    return points;
}

}  // namespace evsched::bench
