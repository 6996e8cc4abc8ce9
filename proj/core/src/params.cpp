#include "evsched/params.hpp"

#include "evsched/csv.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace evsched {

using nlohmann::json;

std::vector<double> StationParams::default_grid_tariff() {
    // Four-block time-of-use purchase tariff by clock hour. The night valley
    // runs through hour 6 inclusive; the two peak blocks sit at 10-12 and 19-20.
    std::vector<double> t(24, 0.0);
    auto block = [&](int from, int to, double v) {
        for (int h = from; h <= to; ++h) t[h] = v;
    };
    block(0, 6, 0.3208);
    block(7, 9, 0.8145);
    block(10, 12, 1.4615);
    block(13, 14, 1.3332);
    block(15, 16, 0.8145);
    block(17, 18, 1.3332);
    block(19, 20, 1.4615);
    block(21, 22, 0.8145);
    block(23, 23, 0.3208);
    return t;
}

double StationParams::tariff_at(int stage) const {
    const int n = static_cast<int>(grid_tariff.size());
    return grid_tariff[((stage % n) + n) % n];
}

double StationParams::arrival_rate_at(int stage) const {
    const int n = static_cast<int>(arrival_rate.size());
    return arrival_rate[((stage % n) + n) % n];
}

void StationParams::validate() const {
    auto require = [](bool ok, const char* field) {
        if (!ok) throw std::invalid_argument(std::string("StationParams: bad ") + field);
    };
    require(pile_count > 0, "pile_count");
    require(stage_hours > 0.0, "stage_hours");
    require(horizon_stages > 0, "horizon_stages");
    require(window_stages > 0, "window_stages");
    require(pile_power_kw > 0.0, "pile_power_kw");
    require(ev_charge_efficiency > 0.0 && ev_charge_efficiency <= 1.0, "ev_charge_efficiency");
    require(price_cap > 0.0, "price_cap");
    require(discount_rate >= 0.0, "discount_rate");
    require(max_parking_stages > 0, "max_parking_stages");
    require(storage_capacity_kwh > 0.0, "storage_capacity_kwh");
    require(storage_power_cap_kw >= 0.0, "storage_power_cap_kw");
    require(storage_charge_eff > 0.0 && storage_charge_eff <= 1.0, "storage_charge_eff");
    require(storage_discharge_eff > 0.0 && storage_discharge_eff <= 1.0, "storage_discharge_eff");
    require(initial_soc >= 0.0 && initial_soc <= 1.0, "initial_soc");
    require(wind_capacity_kw >= 0.0, "wind_capacity_kw");
    require(wind_cut_in_ms >= 0.0 && wind_cut_in_ms < wind_rated_ms, "wind_cut_in_ms");
    require(wind_rated_ms < wind_cut_out_ms, "wind_rated_ms");
    require(solar_capacity_kw >= 0.0, "solar_capacity_kw");
    require(solar_efficiency > 0.0 && solar_efficiency <= 1.0, "solar_efficiency");
    require(standard_irradiance_wm2 > 0.0, "standard_irradiance_wm2");
    require(price_variance_weight >= 0.0, "price_variance_weight");
    require(wind_cost_per_kwh >= 0.0, "wind_cost_per_kwh");
    require(solar_cost_per_kwh >= 0.0, "solar_cost_per_kwh");
    require(storage_cost_per_kwh >= 0.0, "storage_cost_per_kwh");
    require(lost_ev_penalty >= 0.0, "lost_ev_penalty");
    require(grid_bigm > 0.0, "grid_bigm");
    // windows tile the horizon exactly; a trailing partial window would leave
    // the price-spread center ill-defined
    require(horizon_stages % window_stages == 0, "window_stages");
    require(grid_tariff.size() == 24, "grid_tariff");
    for (double v : grid_tariff) require(v >= 0.0, "grid_tariff");
    require(arrival_rate.size() == 24, "arrival_rate");
    for (double v : arrival_rate) require(v >= 0.0, "arrival_rate");
    require(energy_grid_divisor == 1 || energy_grid_divisor == 2 || energy_grid_divisor == 4,
            "energy_grid_divisor");
}

RenewableProfile RenewableProfile::default_profile() {
    // Synthetic but realistically shaped day: wind strongest in the small
    // hours, irradiance a midday bell peaking at standard test conditions.
    RenewableProfile prof;
    for (int h = 0; h < 24; ++h) {
        prof.wind_speed_ms[h] = 9.0 + 4.0 * std::cos(2.0 * std::numbers::pi * (h - 2) / 24.0);
        if (h >= 6 && h <= 18) {
            double s = std::sin(std::numbers::pi * (h - 6) / 12.0);
            prof.irradiance_wm2[h] = 800.0 * std::pow(s, 1.5);
        } else {
            prof.irradiance_wm2[h] = 0.0;
        }
    }
    return prof;
}

RenewableProfile RenewableProfile::load_csv(const std::string& path) {
    csv::Table t = csv::read_file(path);
    int ch = t.column("hour");
    int cw = t.column("wind_speed_mps");
    int ci = t.column("irradiance_wm2");
    if (ch < 0 || cw < 0 || ci < 0)
        throw std::invalid_argument("profile csv " + path +
                                    ": need columns hour,wind_speed_mps,irradiance_wm2");
    if (t.rows.size() != 24)
        throw std::invalid_argument("profile csv " + path + ": expected 24 rows");
    RenewableProfile prof;
    for (const auto& row : t.rows) {
        int h = std::stoi(row[ch]);
        if (h < 0 || h > 23) throw std::invalid_argument("profile csv " + path + ": bad hour");
        prof.wind_speed_ms[h] = std::stod(row[cw]);
        prof.irradiance_wm2[h] = std::stod(row[ci]);
    }
    return prof;
}

void RenewableProfile::save_csv(const std::string& path) const {
    csv::Table t;
    t.header = {"hour", "wind_speed_mps", "irradiance_wm2"};
    for (int h = 0; h < 24; ++h)
        t.rows.push_back({std::to_string(h), csv::format_double(wind_speed_ms[h]),
                          csv::format_double(irradiance_wm2[h])});
    csv::write_file(path, t);
}

double EpsilonSchedule::at_episode(int episode) const {
    double e = initial * std::pow(decay, episode);
    return std::max(e, floor);
}

std::vector<double> PricingConfig::candidate_grid() const {
    std::vector<double> g;
    // round-to-grid keeps candidates exact (0.1 increments suffer drift if accumulated)
    int steps = static_cast<int>(std::llround((grid_max - grid_min) / grid_step));
    for (int i = 0; i <= steps; ++i) {
        double v = grid_min + i * grid_step;
        if (v <= grid_max + 1e-12) g.push_back(std::round(v * 1e9) / 1e9);
    }
    return g;
}

void Config::validate() const {
    station.validate();
    if (pricing.grid_min <= 0.0 || pricing.grid_max > station.price_cap + 1e-12 ||
        pricing.grid_step <= 0.0)
        throw std::invalid_argument("Config: bad pricing grid");
    if (pricing.initial_price < pricing.grid_min - 1e-12 ||
        pricing.initial_price > pricing.grid_max + 1e-12)
        throw std::invalid_argument("Config: initial_price outside candidate grid");
    if (sampling.sample_paths < 1) throw std::invalid_argument("Config: sample_paths < 1");
    if (sampling.eval_scenarios < 1 || sampling.mpc_scenarios < 1)
        throw std::invalid_argument("Config: scenario counts must be >= 1");
    if (sampling.renewable_noise_frac < 0.0)
        throw std::invalid_argument("Config: renewable_noise_frac < 0");
    if (solver.rel_gap < 0.0 || solver.feas_tol <= 0.0 || solver.int_tol <= 0.0)
        throw std::invalid_argument("Config: bad solver tolerances");
}

Config Config::preset(const std::string& name) {
    Config c;  // defaults above are the full-size station
    if (name == "paper") {
        c.sampling.eval_scenarios = 8;
        c.sampling.mpc_scenarios = 8;
        c.solver.rel_gap = 1e-3;
        return c;
    }
    if (name == "desk") {
        // half the station, half the farm and half the battery: keeps the
        // renewable-to-load and storage-to-load ratios of the full station,
        // which the policy-ordering economics depend on
        c.station.pile_count = 10;
        c.station.wind_capacity_kw = 25.0;
        c.station.solar_capacity_kw = 25.0;
        c.station.storage_capacity_kwh = 83.325;
        c.station.storage_power_cap_kw = 25.0;
        c.sampling.sample_paths = 30;
        c.sampling.eval_scenarios = 2;
        c.sampling.mpc_scenarios = 3;
        // control-loop models only need a loose proof; quality is unchanged
        c.solver.rel_gap = 1e-3;
        return c;
    }
    throw std::invalid_argument("Config::preset: unknown preset '" + name + "'");
}

namespace {

json config_to_json(const Config& c) {
    const auto& s = c.station;
    json j;
    j["station"] = {
        {"piles", s.pile_count},
        {"stage_hours", s.stage_hours},
        {"horizon_stages", s.horizon_stages},
        {"window_stages", s.window_stages},
        {"pile_power_kw", s.pile_power_kw},
        {"ev_charge_efficiency", s.ev_charge_efficiency},
        {"price_cap", s.price_cap},
        {"discount_rate", s.discount_rate},
        {"max_parking_stages", s.max_parking_stages},
        {"initial_soc", s.initial_soc},
        {"storage",
         {{"capacity_kwh", s.storage_capacity_kwh},
          {"power_cap_kw", s.storage_power_cap_kw},
          {"charge_efficiency", s.storage_charge_eff},
          {"discharge_efficiency", s.storage_discharge_eff}}},
        {"wind",
         {{"capacity_kw", s.wind_capacity_kw},
          {"cut_in_ms", s.wind_cut_in_ms},
          {"rated_ms", s.wind_rated_ms},
          {"cut_out_ms", s.wind_cut_out_ms}}},
        {"solar",
         {{"capacity_kw", s.solar_capacity_kw},
          {"efficiency", s.solar_efficiency},
          {"standard_irradiance_wm2", s.standard_irradiance_wm2}}},
        {"costs",
         {{"grid_tariff", s.grid_tariff},
          {"wind_per_kwh", s.wind_cost_per_kwh},
          {"solar_per_kwh", s.solar_cost_per_kwh},
          {"storage_per_kwh", s.storage_cost_per_kwh},
          {"lost_ev_penalty", s.lost_ev_penalty},
          {"grid_bigm", s.grid_bigm}}},
        {"price_variance_weight", s.price_variance_weight},
        {"arrival_rate", s.arrival_rate},
        {"energy_grid_divisor", s.energy_grid_divisor},
    };
    j["profile"] = {
        {"wind_speed_ms", c.profile.wind_speed_ms},
        {"irradiance_wm2", c.profile.irradiance_wm2},
    };
    j["pricing"] = {
        {"grid_min", c.pricing.grid_min},
        {"grid_max", c.pricing.grid_max},
        {"grid_step", c.pricing.grid_step},
        {"initial_price", c.pricing.initial_price},
        {"epsilon",
         {{"initial", c.pricing.epsilon.initial},
          {"decay", c.pricing.epsilon.decay},
          {"floor", c.pricing.epsilon.floor}}},
        {"max_episodes", c.pricing.max_episodes},
        {"plateau_window", c.pricing.plateau_window},
        {"plateau_rel_tol", c.pricing.plateau_rel_tol},
        {"stop_on_plateau", c.pricing.stop_on_plateau},
    };
    j["sampling"] = {
        {"sample_paths", c.sampling.sample_paths},
        {"eval_scenarios", c.sampling.eval_scenarios},
        {"mpc_scenarios", c.sampling.mpc_scenarios},
        {"renewable_noise_frac", c.sampling.renewable_noise_frac},
    };
    j["solver"] = {
        {"node_limit", c.solver.node_limit},
        {"time_limit_ms", c.solver.time_limit_ms},
        {"rel_gap", c.solver.rel_gap},
        {"feas_tol", c.solver.feas_tol},
        {"int_tol", c.solver.int_tol},
    };
    j["seed"] = c.seed;
    return j;
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void apply_overrides(Config& c, const json& j) {
    if (j.contains("station")) {
        const json& js = j.at("station");
        auto& s = c.station;
        maybe(js, "piles", s.pile_count);
        maybe(js, "stage_hours", s.stage_hours);
        maybe(js, "horizon_stages", s.horizon_stages);
        maybe(js, "window_stages", s.window_stages);
        maybe(js, "pile_power_kw", s.pile_power_kw);
        maybe(js, "ev_charge_efficiency", s.ev_charge_efficiency);
        maybe(js, "price_cap", s.price_cap);
        maybe(js, "discount_rate", s.discount_rate);
        maybe(js, "max_parking_stages", s.max_parking_stages);
        maybe(js, "initial_soc", s.initial_soc);
        if (js.contains("storage")) {
            const json& x = js.at("storage");
            maybe(x, "capacity_kwh", s.storage_capacity_kwh);
            maybe(x, "power_cap_kw", s.storage_power_cap_kw);
            maybe(x, "charge_efficiency", s.storage_charge_eff);
            maybe(x, "discharge_efficiency", s.storage_discharge_eff);
        }
        if (js.contains("wind")) {
            const json& x = js.at("wind");
            maybe(x, "capacity_kw", s.wind_capacity_kw);
            maybe(x, "cut_in_ms", s.wind_cut_in_ms);
            maybe(x, "rated_ms", s.wind_rated_ms);
            maybe(x, "cut_out_ms", s.wind_cut_out_ms);
        }
        if (js.contains("solar")) {
            const json& x = js.at("solar");
            maybe(x, "capacity_kw", s.solar_capacity_kw);
            maybe(x, "efficiency", s.solar_efficiency);
            maybe(x, "standard_irradiance_wm2", s.standard_irradiance_wm2);
        }
        if (js.contains("costs")) {
            const json& x = js.at("costs");
            maybe(x, "grid_tariff", s.grid_tariff);
            maybe(x, "wind_per_kwh", s.wind_cost_per_kwh);
            maybe(x, "solar_per_kwh", s.solar_cost_per_kwh);
            maybe(x, "storage_per_kwh", s.storage_cost_per_kwh);
            maybe(x, "lost_ev_penalty", s.lost_ev_penalty);
            maybe(x, "grid_bigm", s.grid_bigm);
        }
        maybe(js, "price_variance_weight", s.price_variance_weight);
        if (js.contains("arrival_rate")) {
            const json& x = js.at("arrival_rate");
            if (x.is_number())
                s.arrival_rate.assign(24, x.get<double>());
            else
                s.arrival_rate = x.get<std::vector<double>>();
        }
        maybe(js, "energy_grid_divisor", s.energy_grid_divisor);
    }
    if (j.contains("profile")) {
        const json& jp = j.at("profile");
        maybe(jp, "wind_speed_ms", c.profile.wind_speed_ms);
        maybe(jp, "irradiance_wm2", c.profile.irradiance_wm2);
    }
    if (j.contains("pricing")) {
        const json& jp = j.at("pricing");
        maybe(jp, "grid_min", c.pricing.grid_min);
        maybe(jp, "grid_max", c.pricing.grid_max);
        maybe(jp, "grid_step", c.pricing.grid_step);
        maybe(jp, "initial_price", c.pricing.initial_price);
        if (jp.contains("epsilon")) {
            const json& x = jp.at("epsilon");
            maybe(x, "initial", c.pricing.epsilon.initial);
            maybe(x, "decay", c.pricing.epsilon.decay);
            maybe(x, "floor", c.pricing.epsilon.floor);
        }
        maybe(jp, "max_episodes", c.pricing.max_episodes);
        maybe(jp, "plateau_window", c.pricing.plateau_window);
        maybe(jp, "plateau_rel_tol", c.pricing.plateau_rel_tol);
        maybe(jp, "stop_on_plateau", c.pricing.stop_on_plateau);
    }
    if (j.contains("sampling")) {
        const json& jp = j.at("sampling");
        maybe(jp, "sample_paths", c.sampling.sample_paths);
        maybe(jp, "eval_scenarios", c.sampling.eval_scenarios);
        maybe(jp, "mpc_scenarios", c.sampling.mpc_scenarios);
        maybe(jp, "renewable_noise_frac", c.sampling.renewable_noise_frac);
    }
    if (j.contains("solver")) {
        const json& jp = j.at("solver");
        maybe(jp, "node_limit", c.solver.node_limit);
        maybe(jp, "time_limit_ms", c.solver.time_limit_ms);
        maybe(jp, "rel_gap", c.solver.rel_gap);
        maybe(jp, "feas_tol", c.solver.feas_tol);
        maybe(jp, "int_tol", c.solver.int_tol);
    }
    maybe(j, "seed", c.seed);
}

}  // namespace

std::string Config::to_json() const {
    return config_to_json(*this).dump(2);  // nlohmann::json orders keys
}

Config Config::from_json(const std::string& text) {
    json j = json::parse(text);
    std::string preset_name = "paper";
    if (j.contains("preset")) preset_name = j.at("preset").get<std::string>();
    Config c = preset(preset_name);
    apply_overrides(c, j);
    c.validate();
    return c;
}

Config Config::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("Config::load_file: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::uint64_t Config::hash() const {
    // FNV-1a over the canonical serialization; stable across runs
    std::string text = to_json();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace evsched
