#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "doctest.h"
#include "evsched/stochastic.hpp"

using namespace evsched;
using namespace evsched::stoch;

TEST_SUITE("stochastic") {

TEST_CASE("generator is deterministic per seed") {
    Rng a(42), b(42), c(43);
    bool diverged = false;
    for (int i = 0; i < 100; ++i) {
        double x = a.uniform();
        CHECK(x == b.uniform());
        CHECK(0.0 <= x);
        CHECK(x < 1.0);
        if (x != c.uniform()) diverged = true;
    }
    CHECK(diverged);
}

TEST_CASE("integer draws hit both inclusive bounds") {
    Rng rng(7);
    std::set<int> seen;
    for (int i = 0; i < 500; ++i) {
        int v = rng.uniform_int(2, 5);
        CHECK(2 <= v);
        CHECK(v <= 5);
        seen.insert(v);
    }
    CHECK(seen.size() == 4);
}

TEST_CASE("poisson and gaussian have the right first moments") {
    Rng rng(11);
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) sum += rng.poisson(4.0);
    double mean = sum / n;
    CHECK(std::abs(mean - 4.0) < 3.0 * std::sqrt(4.0 / n));

    double gsum = 0.0, gsq = 0.0;
    for (int i = 0; i < n; ++i) {
        double g = rng.gaussian();
        gsum += g;
        gsq += g * g;
    }
    CHECK(std::abs(gsum / n) < 0.05);
    CHECK(std::abs(gsq / n - 1.0) < 0.05);
}

TEST_CASE("substreams separate and reproduce") {
    CHECK(substream(1, 2, 3) == substream(1, 2, 3));
    CHECK(substream(1, 2, 3) != substream(1, 2, 4));
    CHECK(substream(1, 2, 3) != substream(2, 2, 3));
    CHECK(substream(1, 2, 3, 0, 0) == substream(1, 2, 3));
}

TEST_CASE("ev requests land on the energy grid inside the stay") {
    Config cfg;
    Rng rng(5);
    double se = cfg.station.stage_energy_kwh();
    double quantum = se / cfg.station.energy_grid_divisor;
    for (int i = 0; i < 300; ++i) {
        auto req = sample_ev_request(rng, cfg.station);
        CHECK(req.parking_stages >= 1);
        CHECK(req.parking_stages <= cfg.station.max_parking_stages);
        CHECK(req.energy_kwh >= quantum - 1e-9);
        CHECK(req.energy_kwh <= req.parking_stages * se + 1e-9);
        double units = req.energy_kwh / quantum;
        CHECK(std::abs(units - std::round(units)) < 1e-9);
    }
}

TEST_CASE("arrival draws consume a fixed number of uniforms") {
    Config cfg;
    Rng a(123), b(123);
    (void)sample_arrival_draw(a, cfg.station);
    b.uniform();
    b.uniform();
    b.uniform();
    CHECK(a.uniform() == b.uniform());
}

TEST_CASE("renewable noise clamps to the physical range") {
    Rng rng(9);
    for (int i = 0; i < 200; ++i) {
        double v = sample_renewable(rng, 45.0, 0.5, 50.0);
        CHECK(v >= 0.0);
        CHECK(v <= 50.0);
    }
    CHECK(sample_renewable(rng, 0.0, 0.1, 50.0) == 0.0);
}

TEST_CASE("stage draws depend only on the stream, not on decisions") {
    Config cfg;
    Rng a(substream(3, 1, 0)), b(substream(3, 1, 0));
    auto ea = draw_stage_exogenous(a, 7, cfg);
    auto eb = draw_stage_exogenous(b, 7, cfg);
    REQUIRE(ea.arrivals.size() == eb.arrivals.size());
    for (std::size_t i = 0; i < ea.arrivals.size(); ++i) {
        CHECK(ea.arrivals[i].accept_u == eb.arrivals[i].accept_u);
        CHECK(ea.arrivals[i].request.energy_kwh == eb.arrivals[i].request.energy_kwh);
    }
    CHECK(ea.wind_available_kw == eb.wind_available_kw);
    CHECK(ea.wind_available_kw <= cfg.station.wind_capacity_kw);
    CHECK(ea.solar_available_kw <= cfg.station.solar_capacity_kw);
}

TEST_CASE("sampled paths are reproducible prefix by prefix") {
    Config cfg = Config::preset("desk");
    env::StationState state;
    state.stage = 8;
    state.soc = 0.5;
    state.piles = std::vector<env::PileState>(cfg.station.pile_count);
    state.piles[0] = {true, cfg.station.stage_energy_kwh(), 3, 1.1};

    auto price = [](int, env::EventClass) { return 1.5; };
    auto small = generate_sample_paths(state, 2.0, price, 3, false, cfg, 99);
    auto large = generate_sample_paths(state, 2.0, price, 5, false, cfg, 99);
    REQUIRE(small.paths.size() == 3);
    REQUIRE(large.paths.size() == 5);
    for (int m = 0; m < 3; ++m) {
        const auto& ps = small.paths[m];
        const auto& pl = large.paths[m];
        REQUIRE(ps.stages.size() == pl.stages.size());
        for (std::size_t k = 0; k < ps.stages.size(); ++k) {
            CHECK(ps.stages[k].posted_price == pl.stages[k].posted_price);
            CHECK(ps.stages[k].entered == pl.stages[k].entered);
            CHECK(ps.stages[k].wind_kw == pl.stages[k].wind_kw);
        }
        REQUIRE(ps.stays.size() == pl.stays.size());
        for (std::size_t s = 0; s < ps.stays.size(); ++s) {
            CHECK(ps.stays[s].pile == pl.stays[s].pile);
            CHECK(ps.stays[s].energy_kwh == pl.stays[s].energy_kwh);
            CHECK(ps.stays[s].arrive_offset == pl.stays[s].arrive_offset);
        }
    }
}

TEST_CASE("path structure matches the observed-first-stage contract") {
    Config cfg = Config::preset("desk");
    env::StationState state;
    state.stage = 6;
    state.soc = 0.4;
    state.wind_available_kw = 20.0;
    state.solar_available_kw = 5.0;
    state.piles = std::vector<env::PileState>(cfg.station.pile_count);
    state.piles[2] = {true, 2 * cfg.station.stage_energy_kwh(), 4, 0.9};

    auto set = generate_sample_paths(state, 1.8, [](int, env::EventClass) { return 1.0; }, 6,
                                     false, cfg, 17);
    CHECK(set.first_stage == 6);
    CHECK(set.window == cfg.station.window_stages);
    CHECK(set.first_stage_price == doctest::Approx(1.8));
    CHECK_FALSE(set.first_stage_arrivals);

    for (const auto& path : set.paths) {
        REQUIRE(static_cast<int>(path.stages.size()) == set.window);
        CHECK(path.stages[0].posted_price == doctest::Approx(1.8));
        CHECK(path.stages[0].raw_arrivals == 0);  // stage 0 is observed
        CHECK(path.stages[0].entered == 0);
        CHECK(path.stages[0].wind_kw == doctest::Approx(20.0));
        for (std::size_t k = 1; k < path.stages.size(); ++k)
            CHECK(path.stages[k].posted_price == doctest::Approx(1.0));

        REQUIRE(!path.stays.empty());
        CHECK(path.stays[0].from_initial_state);
        CHECK(path.stays[0].pile == 2);
        CHECK(path.stays[0].arrive_offset == 0);
        CHECK(path.stays[0].energy_kwh == doctest::Approx(2 * cfg.station.stage_energy_kwh()));

        // per-stage occupancy never exceeds the pile count
        for (int k = 0; k < set.window; ++k) {
            int parked = 0;
            for (const auto& stay : path.stays)
                if (stay.arrive_offset <= k && k <= stay.depart_offset) ++parked;
            CHECK(parked <= cfg.station.pile_count);
        }
    }
}

TEST_CASE("higher first price thins entries on identical draws") {
    Config cfg = Config::preset("desk");
    env::StationState state;
    state.stage = 10;
    state.soc = 0.5;
    state.piles = std::vector<env::PileState>(cfg.station.pile_count);

    int low = 0, high = 0;
    auto price = [](int, env::EventClass) { return 1.2; };
    auto cheap = generate_sample_paths(state, 0.2, price, 20, true, cfg, 31);
    auto dear = generate_sample_paths(state, 2.4, price, 20, true, cfg, 31);
    for (const auto& path : cheap.paths) low += path.stages[0].entered;
    for (const auto& path : dear.paths) high += path.stages[0].entered;
    CHECK(low > high);
}

}  // TEST_SUITE
