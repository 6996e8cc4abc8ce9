#include "evsched/stochastic.hpp"

#include <cmath>
#include <numbers>

namespace evsched::stoch {

std::uint64_t Rng::next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return (next_u64() >> 11) * 0x1.0p-53;  // 53-bit mantissa in [0,1)
}

int Rng::uniform_int(int lo, int hi) {
    // rejection-free scaling is fine at these ranges
    double u = uniform();
    int span = hi - lo + 1;
    int v = lo + static_cast<int>(u * span);
    return v > hi ? hi : v;
}

double Rng::gaussian() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int Rng::poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    double limit = std::exp(-lambda);
    double prod = uniform();
    int k = 0;
    while (prod > limit) {
        prod *= uniform();
        ++k;
    }
    return k;
}

std::uint64_t substream(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                        std::uint64_t c, std::uint64_t d) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    };
    std::uint64_t s = mix(master ^ 0x6a09e667f3bcc908ull);
    s = mix(s ^ a);
    s = mix(s ^ b);
    s = mix(s ^ c);
    s = mix(s ^ d);
    return s;
}

int sample_arrival_count(Rng& rng, double lambda) { return rng.poisson(lambda); }

env::EVRequest sample_ev_request(Rng& rng, const StationParams& p) {
    env::EVRequest req;
    req.parking_stages = rng.uniform_int(1, p.max_parking_stages);
    int slots = req.parking_stages * p.energy_grid_divisor;
    int k = rng.uniform_int(1, slots);
    req.energy_kwh = k * p.stage_energy_kwh() / p.energy_grid_divisor;
    return req;
}

env::ArrivalDraw sample_arrival_draw(Rng& rng, const StationParams& p) {
    env::ArrivalDraw draw;
    draw.accept_u = rng.uniform();
    draw.request = sample_ev_request(rng, p);
    return draw;
}

double sample_renewable(Rng& rng, double predicted_kw, double noise_frac, double cap_kw) {
    double draw = predicted_kw + rng.gaussian() * noise_frac * predicted_kw;
    if (draw < 0.0) return 0.0;
    if (draw > cap_kw) return cap_kw;
    return draw;
}

double predicted_wind_kw(const Config& cfg, int stage) {
    return env::wind_power(cfg.profile.wind_speed_at(stage), cfg.station);
}

double predicted_solar_kw(const Config& cfg, int stage) {
    return env::solar_power(cfg.profile.irradiance_at(stage), cfg.station);
}

void draw_renewables(Rng& rng, int stage, const Config& cfg, double& wind_kw, double& solar_kw) {
    wind_kw = sample_renewable(rng, predicted_wind_kw(cfg, stage),
                               cfg.sampling.renewable_noise_frac, cfg.station.wind_capacity_kw);
    solar_kw = sample_renewable(rng, predicted_solar_kw(cfg, stage),
                                cfg.sampling.renewable_noise_frac, cfg.station.solar_capacity_kw);
}

env::StageExogenous draw_stage_exogenous(Rng& rng, int stage, const Config& cfg) {
    env::StageExogenous exo;
    int count = sample_arrival_count(rng, cfg.station.arrival_rate_at(stage));
    exo.arrivals.reserve(count);
    for (int i = 0; i < count; ++i) exo.arrivals.push_back(sample_arrival_draw(rng, cfg.station));
    draw_renewables(rng, stage + 1, cfg, exo.wind_available_kw, exo.solar_available_kw);
    return exo;
}

ScenarioSet generate_sample_paths(const env::StationState& state, double first_price,
                                  const PriceFn& future_price, int count,
                                  bool first_stage_arrivals, const Config& cfg,
                                  std::uint64_t seed_base) {
    const StationParams& p = cfg.station;
    ScenarioSet set;
    set.base = state;
    set.first_stage = state.stage;
    set.window = p.window_stages;
    set.first_stage_price = first_price;
    set.first_stage_arrivals = first_stage_arrivals;
    set.paths.resize(count);

    for (int m = 0; m < count; ++m) {
        Rng rng(substream(seed_base, static_cast<std::uint64_t>(StreamTag::SamplePath), m));
        SamplePath& path = set.paths[m];
        path.stages.resize(set.window);

        // occupancy clock per pile; charging never moves it
        std::vector<int> left(p.pile_count, 0);
        for (int i = 0; i < p.pile_count; ++i) {
            const env::PileState& pile = state.piles[i];
            if (!pile.occupied) continue;
            left[i] = pile.stages_left;
            PathPileStay stay;
            stay.pile = i;
            stay.arrive_offset = 0;
            stay.depart_offset = pile.stages_left - 1;
            stay.energy_kwh = pile.energy_kwh;
            stay.parking_stages = pile.stages_left;
            stay.locked_price = pile.locked_price;
            stay.from_initial_state = true;
            path.stays.push_back(stay);
        }

        for (int o = 0; o < set.window; ++o) {
            int stage = set.first_stage + o;
            PathStage& ps = path.stages[o];

            int occupied = 0;
            for (int c : left) occupied += c > 0 ? 1 : 0;
            ps.event = env::classify_event(occupied, p.pile_count);
            ps.posted_price = (o == 0) ? first_price : future_price(stage, ps.event);

            bool draw_arrivals = (o > 0) || first_stage_arrivals;
            if (draw_arrivals) {
                int raw = sample_arrival_count(rng, p.arrival_rate_at(stage));
                ps.raw_arrivals = raw;
                double accept_prob = 1.0 - ps.posted_price / p.price_cap;
                for (int a = 0; a < raw; ++a) {
                    env::ArrivalDraw draw = sample_arrival_draw(rng, p);
                    if (!(draw.accept_u < accept_prob)) {
                        ++ps.lost;
                        continue;
                    }
                    int free = -1;
                    for (int i = 0; i < p.pile_count; ++i) {
                        if (left[i] == 0) { free = i; break; }
                    }
                    if (free < 0) {
                        ++ps.lost;
                        continue;
                    }
                    left[free] = draw.request.parking_stages;
                    ++ps.entered;
                    PathPileStay stay;
                    stay.pile = free;
                    stay.arrive_offset = o;
                    stay.depart_offset = o + draw.request.parking_stages - 1;
                    stay.energy_kwh = draw.request.energy_kwh;
                    stay.parking_stages = draw.request.parking_stages;
                    stay.locked_price = env::price_discount(ps.posted_price, draw.request, p);
                    path.stays.push_back(stay);
                }
            }

            if (o == 0 && !first_stage_arrivals) {
                ps.wind_kw = state.wind_available_kw;
                ps.solar_kw = state.solar_available_kw;
            } else if (o == 0) {
                // candidate evaluation: the current stage is still unobserved,
                // but its renewables were measured before pricing
                ps.wind_kw = state.wind_available_kw;
                ps.solar_kw = state.solar_available_kw;
            } else {
                draw_renewables(rng, stage, cfg, ps.wind_kw, ps.solar_kw);
            }

            for (int& c : left)
                if (c > 0) --c;
        }
    }
    return set;
}

}  // namespace evsched::stoch
