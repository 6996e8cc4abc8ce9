#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace evsched {

// Physical and economic parameters of the charging station. Defaults describe
// a 20-pile station with a 50 kW wind turbine, a 50 kW PV array and a
// 166.65 kWh battery buying energy under a four-block time-of-use tariff.
struct StationParams {
    int    pile_count            = 20;
    double stage_hours           = 1.0;   // length of one decision stage
    int    horizon_stages        = 24;    // stages per operating day
    int    window_stages         = 6;     // look-ahead window for pricing/control

    double pile_power_kw         = 3.6;   // per-pile charging power
    double ev_charge_efficiency  = 0.92;
    double price_cap             = 2.5;   // CNY/kWh, acceptance hits zero here
    double discount_rate         = 0.04;  // exponential laxity discount coefficient
    int    max_parking_stages    = 6;

    double storage_capacity_kwh   = 166.65;
    double storage_power_cap_kw   = 50.0;
    double storage_charge_eff     = 0.82;
    double storage_discharge_eff  = 0.82;
    double initial_soc            = 0.5;

    double wind_capacity_kw  = 50.0;
    double wind_cut_in_ms    = 3.5;
    double wind_rated_ms     = 15.0;
    double wind_cut_out_ms   = 25.0;

    double solar_capacity_kw          = 50.0;
    double solar_efficiency           = 0.88;
    double standard_irradiance_wm2    = 800.0;

    double price_variance_weight = 2.0;   // weight of the posted-price variance penalty

    double wind_cost_per_kwh    = 0.018;
    double solar_cost_per_kwh   = 0.018;
    double storage_cost_per_kwh = 0.04;   // wear cost per kWh moved through the battery
    double lost_ev_penalty      = 1.8396; // CNY per EV turned away
    double grid_bigm            = 100.0;  // big-M for the exact grid-import linearization

    // Hourly purchase tariff, index = clock hour 0..23; stage t maps to
    // hour t mod 24, so stage 0 is midnight.
    std::vector<double> grid_tariff = default_grid_tariff();

    // Hourly EV arrival rates (Poisson means); scalar configs replicate.
    std::vector<double> arrival_rate = std::vector<double>(24, 10.0);

    // Energy requests are drawn on a grid of (pile energy per stage)/divisor.
    // Divisor 1 keeps every request an exact multiple of one stage of charging.
    int energy_grid_divisor = 1;

    static std::vector<double> default_grid_tariff();

    // kWh delivered into an EV battery by one stage of charging
    double stage_energy_kwh() const { return pile_power_kw * ev_charge_efficiency * stage_hours; }
    double tariff_at(int stage) const;
    double arrival_rate_at(int stage) const;

    void validate() const;  // throws std::invalid_argument naming the bad field
};

// Hourly renewable forecast inputs: wind speed (m/s) and irradiance (W/m2).
struct RenewableProfile {
    std::array<double, 24> wind_speed_ms{};
    std::array<double, 24> irradiance_wm2{};

    static RenewableProfile default_profile();

    double wind_speed_at(int stage) const { return wind_speed_ms[((stage % 24) + 24) % 24]; }
    double irradiance_at(int stage) const { return irradiance_wm2[((stage % 24) + 24) % 24]; }

    // CSV with columns hour,wind_speed_mps,irradiance_wm2 and 24 data rows.
    static RenewableProfile load_csv(const std::string& path);
    void save_csv(const std::string& path) const;
};

struct EpsilonSchedule {
    double initial = 0.1;
    double decay   = 0.995;  // multiplicative per episode
    double floor   = 0.01;

    double at_episode(int episode) const;
};

struct PricingConfig {
    double grid_min  = 0.1;
    double grid_max  = 2.5;
    double grid_step = 0.1;
    double initial_price = 2.3;
    EpsilonSchedule epsilon{};
    int    max_episodes    = 600;
    int    plateau_window  = 50;    // episodes
    double plateau_rel_tol = 0.01;  // relative improvement threshold
    bool   stop_on_plateau = true;

    std::vector<double> candidate_grid() const;
};

struct SamplingConfig {
    int    sample_paths        = 100;  // Monte Carlo paths per pricing update
    int    eval_scenarios      = 3;    // paths compiled into the candidate-evaluation model
    int    mpc_scenarios       = 4;    // paths compiled into the committed-control model
    double renewable_noise_frac = 0.1; // sigma as a fraction of the forecast
};

struct SolverLimits {
    std::int64_t node_limit    = 2000;
    double time_limit_ms       = 0.0;   // 0 = unlimited
    double rel_gap             = 1e-6;
    double feas_tol            = 1e-7;
    double int_tol             = 1e-6;
};

struct Config {
    StationParams    station{};
    RenewableProfile profile = RenewableProfile::default_profile();
    PricingConfig    pricing{};
    SamplingConfig   sampling{};
    SolverLimits     solver{};
    std::uint64_t    seed = 1;

    void validate() const;

    // Named presets: "paper" is the full-size station above; "desk" shrinks the
    // station and sampling so a full learn/benchmark cycle runs on one core.
    static Config preset(const std::string& name);

    std::string to_json() const;                    // canonical, sorted keys
    static Config from_json(const std::string& text);
    static Config load_file(const std::string& path);  // JSON, partial overrides on preset fields
    std::uint64_t hash() const;                     // FNV-1a over canonical JSON
};

}  // namespace evsched
