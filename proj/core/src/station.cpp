#include "evsched/station.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace evsched::env {

namespace {
constexpr double kEnergyTol = 1e-9;
constexpr double kPowerTol = 1e-7;

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}
}  // namespace

const char* to_string(EventClass e) {
    switch (e) {
        case EventClass::E1: return "E1";
        case EventClass::E2: return "E2";
        case EventClass::E3: return "E3";
        case EventClass::E4: return "E4";
        case EventClass::E5: return "E5";
    }
    return "E?";
}

EventClass event_from_string(const std::string& s) {
    for (int i = 0; i < kEventCount; ++i) {
        EventClass e = static_cast<EventClass>(i);
        if (s == to_string(e)) return e;
    }
    throw std::invalid_argument("event_from_string: '" + s + "'");
}

int StationState::occupied_count() const {
    int n = 0;
    for (const auto& pile : piles) n += pile.occupied ? 1 : 0;
    return n;
}

double wind_power(double speed_ms, const StationParams& p) {
    if (speed_ms < p.wind_cut_in_ms || speed_ms > p.wind_cut_out_ms) return 0.0;
    if (speed_ms <= p.wind_rated_ms) {
        double r = speed_ms / p.wind_rated_ms;
        return p.wind_capacity_kw * r * r * r;
    }
    return p.wind_capacity_kw;
}

double solar_power(double irradiance_wm2, const StationParams& p) {
    if (irradiance_wm2 <= 0.0) return 0.0;
    double out = p.solar_capacity_kw * p.solar_efficiency *
                 (irradiance_wm2 / p.standard_irradiance_wm2);
    return std::clamp(out, 0.0, p.solar_capacity_kw);
}

double charge_laxity(const EVRequest& req, const StationParams& p) {
    return req.parking_stages - req.energy_kwh / p.stage_energy_kwh();
}

double price_discount(double posted, const EVRequest& req, const StationParams& p) {
    if (req.parking_stages <= 0)
        throw FeasibilityError("price_discount: nonpositive parking time");
    if (req.energy_kwh <= 0.0)
        throw FeasibilityError("price_discount: nonpositive energy request");
    double max_energy = req.parking_stages * p.stage_energy_kwh();
    if (req.energy_kwh > max_energy + kEnergyTol)
        throw FeasibilityError("price_discount: request " + fmt(req.energy_kwh) +
                               " kWh unreachable within " + fmt(max_energy) + " kWh of parking");
    double laxity = std::max(charge_laxity(req, p), 0.0);
    return posted * std::exp(-p.discount_rate * laxity);
}

EventClass classify_event(int occupied, int pile_count) {
    if (pile_count <= 0 || occupied < 0 || occupied > pile_count)
        throw FeasibilityError("classify_event: occupancy " + fmt(occupied) + "/" +
                               fmt(pile_count));
    // integer comparisons keep band edges exact (e.g. 8/20 lands in E2)
    long long lhs = 5LL * occupied;
    if (lhs <= pile_count) return EventClass::E1;
    if (lhs <= 2LL * pile_count) return EventClass::E2;
    if (lhs <= 3LL * pile_count) return EventClass::E3;
    if (lhs <= 4LL * pile_count) return EventClass::E4;
    return EventClass::E5;
}

double step_storage(double soc, double power_kw, const StationParams& p) {
    double dt = p.stage_hours;
    if (power_kw >= 0.0) {
        double next = soc - power_kw * dt / (p.storage_discharge_eff * p.storage_capacity_kwh);
        return std::max(next, 0.0);
    }
    double next = soc - power_kw * p.storage_charge_eff * dt / p.storage_capacity_kwh;
    return std::min(next, 1.0);
}

StoragePowerBounds storage_power_bounds(double soc, const StationParams& p) {
    double dt = p.stage_hours;
    double charge_room = (1.0 - soc) * p.storage_capacity_kwh / (p.storage_charge_eff * dt);
    double discharge_room = soc * p.storage_capacity_kwh * p.storage_discharge_eff / dt;
    return {-std::min(p.storage_power_cap_kw, charge_room),
            std::min(p.storage_power_cap_kw, discharge_room)};
}

double grid_import(double ev_load_kw, double wind_used_kw, double solar_used_kw,
                   double storage_power_kw) {
    return std::max(ev_load_kw - wind_used_kw - solar_used_kw - storage_power_kw, 0.0);
}

PileStepResult step_piles(const std::vector<PileState>& piles,
                          const std::vector<std::uint8_t>& charge,
                          const StationParams& p) {
    if (charge.size() != piles.size())
        throw FeasibilityError("step_piles: charge vector covers " + fmt(charge.size()) +
                               " piles, station has " + fmt(piles.size()));
    PileStepResult out;
    out.piles = piles;
    double se = p.stage_energy_kwh();
    for (std::size_t i = 0; i < piles.size(); ++i) {
        PileState& pile = out.piles[i];
        if (!pile.occupied) {
            if (charge[i])
                throw FeasibilityError("step_piles: charge requested on empty pile " + fmt(i));
            continue;
        }
        if (charge[i] && pile.energy_kwh <= kEnergyTol)
            throw FeasibilityError("step_piles: pile " + fmt(i) + " already fully served");
        double energy = pile.energy_kwh;
        if (charge[i]) energy = std::max(energy - se, 0.0);
        int left = pile.stages_left - 1;
        if (energy > left * se + kEnergyTol)
            throw FeasibilityError("step_piles: pile " + fmt(i) + " cannot finish " +
                                   fmt(energy) + " kWh in " + fmt(left) + " stages");
        if (left == 0) {
            pile = PileState{};
            ++out.departures;
        } else {
            pile.energy_kwh = energy;
            pile.stages_left = left;
        }
    }
    return out;
}

AdmissionResult admit_arrivals(const std::vector<PileState>& piles, double posted_price,
                               const std::vector<ArrivalDraw>& arrivals,
                               const StationParams& p) {
    AdmissionResult res;
    res.piles = piles;
    res.raw_arrivals = static_cast<int>(arrivals.size());
    double accept_prob = 1.0 - posted_price / p.price_cap;
    std::size_t next_free = 0;
    for (const ArrivalDraw& draw : arrivals) {
        if (!(draw.accept_u < accept_prob)) {
            ++res.lost;  // priced out
            continue;
        }
        while (next_free < res.piles.size() && res.piles[next_free].occupied) ++next_free;
        if (next_free >= res.piles.size()) {
            ++res.lost;  // no pile free
            continue;
        }
        PileState& pile = res.piles[next_free];
        pile.occupied = true;
        pile.energy_kwh = draw.request.energy_kwh;
        pile.stages_left = draw.request.parking_stages;
        pile.locked_price = price_discount(posted_price, draw.request, p);
        res.entered_piles.push_back(static_cast<int>(next_free));
        ++res.entered;
    }
    return res;
}

void validate_action(const std::vector<PileState>& piles, const ControlAction& action,
                     double soc, double wind_avail, double solar_avail,
                     const StationParams& p) {
    if (action.posted_price < -kPowerTol || action.posted_price > p.price_cap + kPowerTol)
        throw FeasibilityError("action: posted price " + fmt(action.posted_price) +
                               " outside [0, " + fmt(p.price_cap) + "]");
    if (action.charge.size() != piles.size())
        throw FeasibilityError("action: charge vector size mismatch");
    for (std::size_t i = 0; i < piles.size(); ++i) {
        if (action.charge[i] && !piles[i].occupied)
            throw FeasibilityError("action: charge on empty pile " + fmt(i));
    }
    if (action.wind_used_kw < -kPowerTol || action.wind_used_kw > wind_avail + kPowerTol)
        throw FeasibilityError("action: wind use " + fmt(action.wind_used_kw) +
                               " outside [0, " + fmt(wind_avail) + "]");
    if (action.solar_used_kw < -kPowerTol || action.solar_used_kw > solar_avail + kPowerTol)
        throw FeasibilityError("action: solar use " + fmt(action.solar_used_kw) +
                               " outside [0, " + fmt(solar_avail) + "]");
    auto bounds = storage_power_bounds(soc, p);
    if (action.storage_power_kw < bounds.charge_min - kPowerTol ||
        action.storage_power_kw > bounds.discharge_max + kPowerTol)
        throw FeasibilityError("action: storage power " + fmt(action.storage_power_kw) +
                               " outside [" + fmt(bounds.charge_min) + ", " +
                               fmt(bounds.discharge_max) + "]");
}

RewardBreakdown stage_reward(const std::vector<PileState>& piles,
                             const ControlAction& action,
                             int n_lost, double window_mean_price, int stage,
                             const StationParams& p) {
    RewardBreakdown r;
    double dt = p.stage_hours;
    double load = 0.0;
    for (std::size_t i = 0; i < piles.size(); ++i) {
        if (i < action.charge.size() && action.charge[i] && piles[i].occupied) {
            load += p.pile_power_kw;
            r.earning += piles[i].locked_price * p.pile_power_kw * dt;
        }
    }
    r.grid_import_kw = grid_import(load, action.wind_used_kw, action.solar_used_kw,
                                   action.storage_power_kw);
    r.procure_cost = p.tariff_at(stage) * r.grid_import_kw * dt;
    r.storage_cost = p.storage_cost_per_kwh * std::abs(action.storage_power_kw) * dt;
    r.wind_cost = p.wind_cost_per_kwh * action.wind_used_kw * dt;
    r.solar_cost = p.solar_cost_per_kwh * action.solar_used_kw * dt;
    r.qos_cost = p.lost_ev_penalty * n_lost;
    double dev = action.posted_price - window_mean_price;
    r.variance_penalty = p.price_variance_weight * dev * dev;
    return r;
}

TransitionResult transition(const StationState& state, const ControlAction& action,
                            const StageExogenous& exo, double window_mean_price,
                            const StationParams& p) {
    AdmissionResult adm = admit_arrivals(state.piles, action.posted_price, exo.arrivals, p);
    validate_action(adm.piles, action, state.soc, state.wind_available_kw,
                    state.solar_available_kw, p);

    TransitionResult out;
    out.n_in = adm.entered;
    out.n_lost = adm.lost;
    out.reward = stage_reward(adm.piles, action, adm.lost, window_mean_price, state.stage, p);

    PileStepResult stepped = step_piles(adm.piles, action.charge, p);
    out.n_out = stepped.departures;

    out.next.stage = state.stage + 1;
    out.next.piles = std::move(stepped.piles);
    out.next.soc = step_storage(state.soc, action.storage_power_kw, p);
    out.next.wind_available_kw = exo.wind_available_kw;
    out.next.solar_available_kw = exo.solar_available_kw;
    return out;
}

}  // namespace evsched::env
