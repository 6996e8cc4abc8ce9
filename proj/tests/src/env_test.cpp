#include <cmath>
#include <vector>

#include "doctest.h"
#include "evsched/station.hpp"

using namespace evsched;
using namespace evsched::env;

namespace {

StationParams params() { return StationParams{}; }

PileState pile(double energy, int stages, double locked = 1.0) {
    PileState p;
    p.occupied = true;
    p.energy_kwh = energy;
    p.stages_left = stages;
    p.locked_price = locked;
    return p;
}

ArrivalDraw draw(double u, double energy, int parking) {
    ArrivalDraw d;
    d.accept_u = u;
    d.request = {energy, parking};
    return d;
}

}  // namespace

TEST_SUITE("env") {

TEST_CASE("wind curve: cubic ramp, rated plateau, cut-out") {
    StationParams p = params();
    CHECK(wind_power(0.0, p) == 0.0);
    CHECK(wind_power(3.4, p) == 0.0);
    double r = 10.0 / p.wind_rated_ms;
    CHECK(wind_power(10.0, p) == doctest::Approx(p.wind_capacity_kw * r * r * r));
    CHECK(wind_power(15.0, p) == doctest::Approx(p.wind_capacity_kw));
    CHECK(wind_power(20.0, p) == doctest::Approx(p.wind_capacity_kw));
    CHECK(wind_power(25.1, p) == 0.0);
}

TEST_CASE("solar output scales with irradiance and clips at capacity") {
    StationParams p = params();
    CHECK(solar_power(-5.0, p) == 0.0);
    CHECK(solar_power(400.0, p) == doctest::Approx(50.0 * 0.88 * 0.5));
    CHECK(solar_power(800.0, p) == doctest::Approx(44.0));
    CHECK(solar_power(5000.0, p) == doctest::Approx(50.0));
}

TEST_CASE("laxity discount multiplies the posted price") {
    StationParams p = params();
    double se = p.stage_energy_kwh();
    EVRequest req{se, 3};  // one stage of charging, three parked
    CHECK(charge_laxity(req, p) == doctest::Approx(2.0));
    CHECK(price_discount(2.3, req, p) == doctest::Approx(2.3 * std::exp(-0.04 * 2.0)));

    EVRequest tight{3.0 * se, 3};  // zero laxity, full price
    CHECK(price_discount(2.3, tight, p) == doctest::Approx(2.3));

    EVRequest impossible{4.0 * se, 3};
    CHECK_THROWS_AS((void)price_discount(2.3, impossible, p), FeasibilityError);
    CHECK_THROWS_AS((void)price_discount(2.3, EVRequest{se, 0}, p), FeasibilityError);
}

TEST_CASE("occupancy bands split at 0.2/0.4/0.6/0.8 with inclusive tops") {
    CHECK(classify_event(0, 20) == EventClass::E1);
    CHECK(classify_event(4, 20) == EventClass::E1);
    CHECK(classify_event(5, 20) == EventClass::E2);
    CHECK(classify_event(8, 20) == EventClass::E2);
    CHECK(classify_event(9, 20) == EventClass::E3);
    CHECK(classify_event(12, 20) == EventClass::E3);
    CHECK(classify_event(13, 20) == EventClass::E4);
    CHECK(classify_event(16, 20) == EventClass::E4);
    CHECK(classify_event(17, 20) == EventClass::E5);
    CHECK(classify_event(20, 20) == EventClass::E5);
    CHECK(classify_event(2, 10) == EventClass::E1);
    CHECK(classify_event(3, 10) == EventClass::E2);
    CHECK_THROWS_AS((void)classify_event(21, 20), FeasibilityError);
}

TEST_CASE("event names round trip") {
    for (int e = 0; e < kEventCount; ++e) {
        EventClass ev = static_cast<EventClass>(e);
        CHECK(event_from_string(to_string(ev)) == ev);
    }
    CHECK_THROWS((void)event_from_string("E9"));
}

TEST_CASE("storage step applies efficiencies and clamps") {
    StationParams p = params();
    double cap = p.storage_capacity_kwh;
    CHECK(step_storage(0.5, 10.0, p) == doctest::Approx(0.5 - 10.0 / (0.82 * cap)));
    CHECK(step_storage(0.5, -10.0, p) == doctest::Approx(0.5 + 10.0 * 0.82 / cap));
    CHECK(step_storage(0.01, 50.0, p) == 0.0);
    CHECK(step_storage(0.99, -50.0, p) == 1.0);
    CHECK(step_storage(0.5, 0.0, p) == doctest::Approx(0.5));
}

TEST_CASE("storage power bounds shrink with state of charge") {
    StationParams p = params();
    auto mid = storage_power_bounds(0.5, p);
    CHECK(mid.charge_min == doctest::Approx(-50.0));
    CHECK(mid.discharge_max == doctest::Approx(50.0));

    auto full = storage_power_bounds(1.0, p);
    CHECK(full.charge_min == doctest::Approx(0.0));
    CHECK(full.discharge_max == doctest::Approx(50.0));

    auto empty = storage_power_bounds(0.0, p);
    CHECK(empty.discharge_max == doctest::Approx(0.0));

    auto low = storage_power_bounds(0.1, p);
    CHECK(low.discharge_max == doctest::Approx(0.1 * p.storage_capacity_kwh * 0.82));
}

TEST_CASE("grid import is the nonnegative balance residual") {
    CHECK(grid_import(30.0, 5.0, 5.0, 10.0) == doctest::Approx(10.0));
    CHECK(grid_import(10.0, 20.0, 0.0, 0.0) == 0.0);
    CHECK(grid_import(10.0, 0.0, 0.0, -5.0) == doctest::Approx(15.0));
}

TEST_CASE("pile step: charging drains, clocks tick, departures free piles") {
    StationParams p = params();
    double se = p.stage_energy_kwh();
    std::vector<PileState> piles = {pile(2.0 * se, 3), pile(se, 1), PileState{}};

    auto res = step_piles(piles, {1, 1, 0}, p);
    CHECK(res.departures == 1);
    CHECK(res.piles[0].occupied);
    CHECK(res.piles[0].energy_kwh == doctest::Approx(se));
    CHECK(res.piles[0].stages_left == 2);
    CHECK_FALSE(res.piles[1].occupied);
    CHECK(res.piles[1].energy_kwh == 0.0);
}

TEST_CASE("pile step rejects infeasible charge vectors") {
    StationParams p = params();
    double se = p.stage_energy_kwh();
    CHECK_THROWS_AS((void)step_piles({pile(se, 2)}, {1, 0}, p), FeasibilityError);
    CHECK_THROWS_AS((void)step_piles({PileState{}}, {1}, p), FeasibilityError);
    CHECK_THROWS_AS((void)step_piles({pile(0.0, 2)}, {1}, p), FeasibilityError);
    // idling would leave 2 stages of energy with 1 stage left
    CHECK_THROWS_AS((void)step_piles({pile(2.0 * se, 2)}, {0}, p), FeasibilityError);
    // fully served pile parked longer is fine when idle
    CHECK_NOTHROW((void)step_piles({pile(0.0, 3)}, {0}, p));
}

TEST_CASE("admission lottery uses the raw posted price") {
    StationParams p = params();
    double se = p.stage_energy_kwh();
    std::vector<PileState> piles(2);
    double posted = 1.25;  // acceptance probability 0.5 at the default cap
    std::vector<ArrivalDraw> arrivals = {
        draw(0.49, se, 2), draw(0.51, se, 2), draw(0.10, 2.0 * se, 3), draw(0.20, se, 4)};

    auto res = admit_arrivals(piles, posted, arrivals, p);
    CHECK(res.raw_arrivals == 4);
    CHECK(res.entered == 2);   // third acceptable arrival finds no pile
    CHECK(res.lost == 2);      // one priced out, one capacity overflow
    REQUIRE(res.entered_piles == std::vector<int>{0, 1});
    CHECK(res.piles[0].occupied);
    CHECK(res.piles[0].energy_kwh == doctest::Approx(se));
    // locked price carries the laxity discount, lottery did not
    CHECK(res.piles[0].locked_price ==
          doctest::Approx(price_discount(posted, {se, 2}, p)));
    CHECK(res.piles[0].locked_price < posted);
}

TEST_CASE("admission at the price cap rejects everyone") {
    StationParams p = params();
    auto res = admit_arrivals(std::vector<PileState>(3), p.price_cap,
                              {draw(0.0, 3.312, 2), draw(0.5, 3.312, 2)}, p);
    CHECK(res.entered == 0);
    CHECK(res.lost == 2);
}

TEST_CASE("stage reward accounts every term") {
    StationParams p = params();
    double se = p.stage_energy_kwh();
    std::vector<PileState> piles = {pile(se, 2, 1.5), pile(2 * se, 4, 0.8), PileState{}};
    ControlAction act;
    act.posted_price = 2.0;
    act.charge = {1, 1, 0};
    act.wind_used_kw = 3.0;
    act.solar_used_kw = 1.0;
    act.storage_power_kw = 2.0;

    auto r = stage_reward(piles, act, 2, 1.8, 11, p);
    double load = 2 * p.pile_power_kw;
    double g = load - 3.0 - 1.0 - 2.0;
    CHECK(r.earning == doctest::Approx((1.5 + 0.8) * p.pile_power_kw));
    CHECK(r.grid_import_kw == doctest::Approx(g));
    CHECK(r.procure_cost == doctest::Approx(p.tariff_at(11) * g));
    CHECK(r.storage_cost == doctest::Approx(0.04 * 2.0));
    CHECK(r.wind_cost == doctest::Approx(0.018 * 3.0));
    CHECK(r.solar_cost == doctest::Approx(0.018 * 1.0));
    CHECK(r.qos_cost == doctest::Approx(2 * 1.8396));
    CHECK(r.variance_penalty == doctest::Approx(2.0 * 0.2 * 0.2));
    CHECK(r.reward_sans_variance() ==
          doctest::Approx(r.earning - r.procure_cost - r.storage_cost - r.wind_cost -
                          r.solar_cost - r.qos_cost));
    CHECK(r.total() == doctest::Approx(r.reward_sans_variance() - r.variance_penalty));
}

TEST_CASE("billing meters pile power, battery receives less") {
    StationParams p = params();
    double se = p.stage_energy_kwh();
    std::vector<PileState> piles = {pile(se, 1, 1.0)};
    ControlAction act;
    act.posted_price = 1.0;
    act.charge = {1};
    auto r = stage_reward(piles, act, 0, 1.0, 0, p);
    // bill: locked price x metered energy (3.6 kWh), not delivered energy (3.312)
    CHECK(r.earning == doctest::Approx(3.6));
    auto stepped = step_piles(piles, {1}, p);
    CHECK(stepped.departures == 1);  // the 3.312 kWh requirement was met
}

TEST_CASE("action validation names the violated constraint") {
    StationParams p = params();
    std::vector<PileState> piles = {pile(3.312, 2)};
    ControlAction act;
    act.posted_price = 1.0;
    act.charge = {1};

    CHECK_NOTHROW(validate_action(piles, act, 0.5, 10.0, 10.0, p));

    ControlAction bad = act;
    bad.wind_used_kw = 11.0;
    CHECK_THROWS_AS(validate_action(piles, bad, 0.5, 10.0, 10.0, p), FeasibilityError);

    bad = act;
    bad.storage_power_kw = 60.0;
    CHECK_THROWS_AS(validate_action(piles, bad, 0.5, 10.0, 10.0, p), FeasibilityError);

    bad = act;
    bad.posted_price = 3.0;
    CHECK_THROWS_AS(validate_action(piles, bad, 0.5, 10.0, 10.0, p), FeasibilityError);

    bad = act;
    bad.charge = {1, 1};
    CHECK_THROWS_AS(validate_action(piles, bad, 0.5, 10.0, 10.0, p), FeasibilityError);
}

TEST_CASE("transition chains admission, reward, pile and storage steps") {
    StationParams p = params();
    double se = p.stage_energy_kwh();
    StationState s;
    s.stage = 4;
    s.soc = 0.5;
    s.wind_available_kw = 8.0;
    s.solar_available_kw = 0.0;
    s.piles = std::vector<PileState>(3);
    s.piles[0] = pile(se, 1, 1.2);

    StageExogenous exo;
    exo.arrivals = {draw(0.01, se, 2)};
    exo.wind_available_kw = 6.0;
    exo.solar_available_kw = 2.0;

    ControlAction act;
    act.posted_price = 1.0;
    act.charge = {1, 1, 0};  // charge the sitting EV and the new arrival
    act.wind_used_kw = 7.2;

    auto res = transition(s, act, exo, 1.0, p);
    CHECK(res.n_in == 1);
    CHECK(res.n_out == 1);
    CHECK(res.n_lost == 0);
    CHECK(res.next.stage == 5);
    CHECK(res.next.wind_available_kw == doctest::Approx(6.0));
    CHECK(res.next.solar_available_kw == doctest::Approx(2.0));
    CHECK(res.next.soc == doctest::Approx(0.5));  // no storage flow
    CHECK(res.next.occupied_count() == 1);        // one left, one arrived
    CHECK(res.reward.earning > 0.0);
}

}  // TEST_SUITE
