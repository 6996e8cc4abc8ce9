#include "evsched/modelgen.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace evsched::milp {

MilpModel random_model(stoch::Rng& rng, const RandomModelOptions& opts) {
    MilpModel m;
    m.name = "random";
    m.maximize = rng.uniform() < 0.5;

    int n_bin = rng.uniform_int(opts.min_binaries, opts.max_binaries);
    int n_cont = rng.uniform_int(opts.min_continuous, opts.max_continuous);

    std::vector<double> anchor;
    for (int i = 0; i < n_bin; ++i) {
        double obj = -5.0 + 10.0 * rng.uniform();
        m.add_col("z" + std::to_string(i), 0.0, 1.0, obj, true);
        anchor.push_back(rng.uniform() < 0.5 ? 0.0 : 1.0);
    }
    for (int i = 0; i < n_cont; ++i) {
        double lb = rng.uniform() < 0.5 ? 0.0 : -5.0 * rng.uniform();
        double ub = lb + 0.5 + 9.5 * rng.uniform();
        double obj = -5.0 + 10.0 * rng.uniform();
        m.add_col("x" + std::to_string(i), lb, ub, obj, false);
        anchor.push_back(lb + (ub - lb) * rng.uniform());
    }

    int n_cols = n_bin + n_cont;
    int n_rows = rng.uniform_int(opts.min_rows, opts.max_rows);
    for (int r = 0; r < n_rows; ++r) {
        int width = rng.uniform_int(2, std::min(5, n_cols));
        std::vector<int> cols(n_cols);
        for (int i = 0; i < n_cols; ++i) cols[i] = i;
        for (int i = 0; i < width; ++i)
            std::swap(cols[i], cols[rng.uniform_int(i, n_cols - 1)]);

        std::vector<std::pair<int, double>> terms;
        double at_anchor = 0.0;
        for (int i = 0; i < width; ++i) {
            double coef = -3.0 + 6.0 * rng.uniform();
            if (std::fabs(coef) < 0.1) coef = coef < 0.0 ? -0.1 : 0.1;
            terms.emplace_back(cols[i], coef);
            at_anchor += coef * anchor[cols[i]];
        }

        double lo = -kInf, hi = kInf;
        double shape = rng.uniform();
        if (shape < opts.equality_prob) {
            lo = hi = at_anchor;
        } else if (shape < opts.equality_prob + opts.ranged_prob) {
            lo = at_anchor - 4.0 * rng.uniform();
            hi = at_anchor + 4.0 * rng.uniform();
        } else if (rng.uniform() < 0.5) {
            hi = at_anchor + 4.0 * rng.uniform();
        } else {
            lo = at_anchor - 4.0 * rng.uniform();
        }
        m.add_row("r" + std::to_string(r), lo, hi, std::move(terms));
    }
    m.validate();
    return m;
}

}  // namespace evsched::milp

namespace evsched::stoch {

env::StationState random_station_state(Rng& rng, const Config& cfg) {
    const auto& p = cfg.station;
    env::StationState s;
    s.stage = rng.uniform_int(0, p.horizon_stages - 1);
    s.soc = 0.05 + 0.9 * rng.uniform();
    draw_renewables(rng, s.stage, cfg, s.wind_available_kw, s.solar_available_kw);

    double quantum = p.stage_energy_kwh() / p.energy_grid_divisor;
    s.piles.resize(p.pile_count);
    for (auto& pile : s.piles) {
        if (rng.uniform() >= 0.5) continue;
        pile.occupied = true;
        pile.stages_left = rng.uniform_int(1, p.max_parking_stages);
        int slots = pile.stages_left * p.energy_grid_divisor;
        pile.energy_kwh = rng.uniform_int(1, slots) * quantum;
        pile.locked_price = cfg.pricing.grid_min +
                            (cfg.pricing.grid_max - cfg.pricing.grid_min) * rng.uniform();
    }
    return s;
}

}  // namespace evsched::stoch
