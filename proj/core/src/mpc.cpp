#include "evsched/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace evsched::mpc {

namespace {

using stoch::PathPileStay;

enum class Sym { X, G, WU, SU, HC, HDC, ZC, ZDC, YC, YDC, FC, FDC, U, V, ZU, ZV };

std::string nm(const char* sym, int m, int o) {
    return std::string(sym) + '_' + std::to_string(m) + "_o" + std::to_string(o);
}

std::string nmp(const char* sym, int m, int o, int pile) {
    return nm(sym, m, o) + "_p" + std::to_string(pile);
}

int required_stages(const PathPileStay& stay, double stage_energy) {
    // zero for already-served piles that are still parked
    int r = static_cast<int>(std::ceil(stay.energy_kwh / stage_energy - 1e-9));
    return std::max(r, 0);
}

class Builder {
  public:
    Builder(const stoch::ScenarioSet& set, const Config& cfg, const CompileOptions& opts)
        : set_(set), p_(cfg.station), opts_(opts) {
        K_ = static_cast<int>(set.paths.size());
        if (K_ < 1) throw std::invalid_argument("compile_stage: empty scenario set");
        W_ = set.window;
        w_ = 1.0 / K_;
        dt_ = p_.stage_hours;
        se_ = p_.stage_energy_kwh();

        sm_.opts = opts;
        sm_.scenarios = K_;
        sm_.window = W_;
        sm_.first_stage = set.first_stage;
        sm_.piles = p_.pile_count;
        sm_.model.maximize = true;
        sm_.model.name = opts.name.empty()
                             ? "stage" + std::to_string(set.first_stage) +
                                   (opts.mode == EmitMode::Literal ? "_lit" : "_cmp")
                             : opts.name;
        sm_.cols.assign(K_, std::vector<StageModel::StageCols>(W_));
        sm_.x_col.assign(K_, std::vector<std::vector<int>>(
                                 W_, std::vector<int>(p_.pile_count, -1)));
    }

    StageModel build() {
        for (int m = 0; m < K_; ++m) scenario(m);
        if (opts_.mode == EmitMode::Literal) emit_ties();
        sm_.model.validate();
        return std::move(sm_);
    }

  private:
    const stoch::ScenarioSet& set_;
    const StationParams& p_;
    CompileOptions opts_;
    StageModel sm_;
    int K_ = 0, W_ = 0;
    double w_ = 0.0, dt_ = 0.0, se_ = 0.0;
    // literal first-stage coupling: base symbol -> column per scenario
    std::map<std::string, std::vector<std::pair<int, int>>> shared_;

    milp::MilpModel& model() { return sm_.model; }

    bool shared_at_first(Sym s, bool stay_from_state) const {
        if (opts_.stage_mode == StageMode::Implement) return true;
        switch (s) {
            case Sym::X: return stay_from_state;
            case Sym::G:
            case Sym::ZU:
            case Sym::ZV: return false;  // follow the scenario's own arrivals
            default: return true;        // storage and renewable use
        }
    }

    int stage_col(const char* sym, Sym kind, int m, int o, int pile, double lb, double ub,
                  bool binary, double obj_add, bool stay_from_state = false) {
        bool share = o == 0 && shared_at_first(kind, stay_from_state);
        int owner = (share && opts_.mode == EmitMode::Compact) ? 0 : m;
        std::string name = pile >= 0 ? nmp(sym, owner, o, pile) : nm(sym, owner, o);
        int id;
        auto it = model().col_index.find(name);
        if (it != model().col_index.end()) {
            id = it->second;
        } else {
            id = model().add_col(name, lb, ub, 0.0, binary);
        }
        model().cols[id].obj += obj_add;
        if (share && opts_.mode == EmitMode::Literal) {
            std::string base = std::string(sym) + (pile >= 0 ? "_p" + std::to_string(pile) : "");
            shared_[base].emplace_back(m, id);
        }
        return id;
    }

    void emit_ties() {
        for (const auto& [base, entries] : shared_) {
            int root = -1;
            for (auto [m, id] : entries) {
                if (m == 0) { root = id; break; }
            }
            if (root < 0) continue;
            for (auto [m, id] : entries) {
                if (id == root) continue;
                model().add_row("tie_" + base + "_" + std::to_string(m), 0.0, 0.0,
                                {{id, 1.0}, {root, -1.0}});
            }
        }
    }

    void scenario(int m) {
        const stoch::SamplePath& path = set_.paths[m];
        std::vector<std::vector<const PathPileStay*>> active(
            W_, std::vector<const PathPileStay*>(p_.pile_count, nullptr));
        for (const PathPileStay& stay : path.stays) {
            if (required_stages(stay, se_) == 0) continue;
            int last = std::min(stay.depart_offset, W_ - 1);
            for (int o = stay.arrive_offset; o <= last; ++o) active[o][stay.pile] = &stay;
        }

        const bool literal = opts_.mode == EmitMode::Literal;
        const double kappa = p_.storage_capacity_kwh;
        const double hcap = p_.storage_power_cap_kw;
        const double soc_c = p_.storage_charge_eff * dt_ / kappa;
        const double soc_dc = dt_ / (p_.storage_discharge_eff * kappa);
        const double bigm = p_.grid_bigm;

        int b_prev = -1;  // SOC column of the previous offset, -1 at the window start
        for (int o = 0; o < W_; ++o) {
            const stoch::PathStage& ps = path.stages[o];
            StageModel::StageCols& sc = sm_.cols[m][o];

            sc.wu = stage_col("wu", Sym::WU, m, o, -1, 0.0, ps.wind_kw, false,
                              -p_.wind_cost_per_kwh * dt_ * w_);
            sc.su = stage_col("su", Sym::SU, m, o, -1, 0.0, ps.solar_kw, false,
                              -p_.solar_cost_per_kwh * dt_ * w_);
            sc.g = stage_col("g", Sym::G, m, o, -1, 0.0, milp::kInf, false,
                             -p_.tariff_at(set_.first_stage + o) * dt_ * w_);
            double wear = literal ? 0.0 : -p_.storage_cost_per_kwh * dt_ * w_;
            sc.hc = stage_col("hc", Sym::HC, m, o, -1, 0.0, hcap, false, wear);
            sc.hdc = stage_col("hdc", Sym::HDC, m, o, -1, 0.0, hcap, false, wear);

            std::vector<std::pair<int, double>> load;  // p * x terms
            for (int pile = 0; pile < p_.pile_count; ++pile) {
                const PathPileStay* stay = active[o][pile];
                if (!stay) continue;
                int xc = stage_col("x", Sym::X, m, o, pile, 0.0, 1.0, true,
                                   stay->locked_price * p_.pile_power_kw * dt_ * w_,
                                   stay->from_initial_state);
                sm_.x_col[m][o][pile] = xc;
                load.emplace_back(xc, p_.pile_power_kw);
            }

            int b_next = model().add_col(nm("b", m, o + 1), 0.0, 1.0, 0.0, false);

            if (!literal) {
                auto bal = load;
                bal.emplace_back(sc.g, -1.0);
                bal.emplace_back(sc.wu, -1.0);
                bal.emplace_back(sc.su, -1.0);
                bal.emplace_back(sc.hdc, -1.0);
                bal.emplace_back(sc.hc, 1.0);
                model().add_row(nm("bal", m, o), 0.0, 0.0, std::move(bal));

                std::vector<std::pair<int, double>> soc{
                    {b_next, 1.0}, {sc.hc, -soc_c}, {sc.hdc, soc_dc}};
                double rhs = 0.0;
                if (b_prev >= 0) soc.emplace_back(b_prev, -1.0);
                else rhs = set_.base.soc;
                model().add_row(nm("soc", m, o), rhs, rhs, std::move(soc));
            } else {
                int zc = stage_col("zc", Sym::ZC, m, o, -1, 0.0, 1.0, true, 0.0);
                int zdc = stage_col("zdc", Sym::ZDC, m, o, -1, 0.0, 1.0, true, 0.0);
                int yc = stage_col("yc", Sym::YC, m, o, -1, 0.0, hcap, false, 0.0);
                int ydc = stage_col("ydc", Sym::YDC, m, o, -1, 0.0, hcap, false, 0.0);
                int fc = stage_col("fc", Sym::FC, m, o, -1, 0.0, 1.0, false, 0.0);
                int fdc = stage_col("fdc", Sym::FDC, m, o, -1, 0.0, 1.0, false, 0.0);
                sc.u = stage_col("u", Sym::U, m, o, -1, 0.0, hcap, false,
                                 -p_.storage_cost_per_kwh * dt_ * w_);
                sc.v = stage_col("v", Sym::V, m, o, -1, 0.0, hcap, false,
                                 -p_.storage_cost_per_kwh * dt_ * w_);
                int zu = stage_col("zu", Sym::ZU, m, o, -1, 0.0, 1.0, true, 0.0);
                int zv = stage_col("zv", Sym::ZV, m, o, -1, 0.0, 1.0, true, 0.0);

                // battery state moves with the effective flows
                std::vector<std::pair<int, double>> soc{
                    {b_next, 1.0}, {yc, -soc_c}, {ydc, soc_dc}};
                double rhs = 0.0;
                if (b_prev >= 0) soc.emplace_back(b_prev, -1.0);
                else rhs = set_.base.soc;
                model().add_row(nm("soc", m, o), rhs, rhs, std::move(soc));

                // y picks up the flow of the active mode and zero otherwise
                model().add_row(nm("ycu", m, o), -milp::kInf, 0.0, {{yc, 1.0}, {sc.hc, -1.0}});
                model().add_row(nm("ycl", m, o), -hcap, milp::kInf,
                                {{yc, 1.0}, {sc.hc, -1.0}, {zc, -hcap}});
                model().add_row(nm("ycz", m, o), -milp::kInf, 0.0, {{yc, 1.0}, {zc, -hcap}});
                model().add_row(nm("ydu", m, o), -milp::kInf, 0.0, {{ydc, 1.0}, {sc.hdc, -1.0}});
                model().add_row(nm("ydl", m, o), -hcap, milp::kInf,
                                {{ydc, 1.0}, {sc.hdc, -1.0}, {zdc, -hcap}});
                model().add_row(nm("ydz", m, o), -milp::kInf, 0.0, {{ydc, 1.0}, {zdc, -hcap}});

                // one storage mode at a time, flows gated by the mode
                model().add_row(nm("hcz", m, o), -milp::kInf, 0.0, {{sc.hc, 1.0}, {zc, -hcap}});
                model().add_row(nm("hdz", m, o), -milp::kInf, 0.0, {{sc.hdc, 1.0}, {zdc, -hcap}});
                model().add_row(nm("zcd", m, o), -milp::kInf, 1.0, {{zc, 1.0}, {zdc, 1.0}});

                // f tracks the state of charge while its mode is active
                if (b_prev >= 0) {
                    model().add_row(nm("fcu", m, o), -milp::kInf, 0.0, {{fc, 1.0}, {b_prev, -1.0}});
                    model().add_row(nm("fcl", m, o), -1.0, milp::kInf,
                                    {{fc, 1.0}, {b_prev, -1.0}, {zc, -1.0}});
                    model().add_row(nm("fdu", m, o), -milp::kInf, 0.0,
                                    {{fdc, 1.0}, {b_prev, -1.0}});
                    model().add_row(nm("fdl", m, o), -1.0, milp::kInf,
                                    {{fdc, 1.0}, {b_prev, -1.0}, {zdc, -1.0}});
                } else {
                    double b0 = set_.base.soc;
                    model().add_row(nm("fcu", m, o), -milp::kInf, b0, {{fc, 1.0}});
                    model().add_row(nm("fcl", m, o), b0 - 1.0, milp::kInf,
                                    {{fc, 1.0}, {zc, -1.0}});
                    model().add_row(nm("fdu", m, o), -milp::kInf, b0, {{fdc, 1.0}});
                    model().add_row(nm("fdl", m, o), b0 - 1.0, milp::kInf,
                                    {{fdc, 1.0}, {zdc, -1.0}});
                }
                model().add_row(nm("fcz", m, o), -milp::kInf, 0.0, {{fc, 1.0}, {zc, -1.0}});
                model().add_row(nm("fdz", m, o), -milp::kInf, 0.0, {{fdc, 1.0}, {zdc, -1.0}});

                // state-dependent power caps on the signed flow h = hdc - hc
                double cap_c = kappa / (p_.storage_charge_eff * dt_);
                double cap_dc = kappa * p_.storage_discharge_eff / dt_;
                model().add_row(nm("hlo", m, o), 0.0, milp::kInf,
                                {{sc.hdc, 1.0}, {sc.hc, -1.0}, {zc, cap_c}, {fc, -cap_c}});
                model().add_row(nm("hhi", m, o), -milp::kInf, 0.0,
                                {{sc.hdc, 1.0}, {sc.hc, -1.0}, {fdc, -cap_dc}});

                // |h| split billed as wear
                model().add_row(nm("habs", m, o), 0.0, 0.0,
                                {{sc.u, 1.0}, {sc.v, -1.0}, {sc.hdc, -1.0}, {sc.hc, 1.0}});

                // grid import as the positive part of the supply residual
                std::vector<std::pair<int, double>> resid{{sc.g, 1.0},
                                                          {sc.wu, 1.0},
                                                          {sc.su, 1.0},
                                                          {sc.hdc, 1.0},
                                                          {sc.hc, -1.0}};
                for (auto [xc, coef] : load) resid.emplace_back(xc, -coef);
                std::vector<std::pair<int, double>> gv = resid;
                gv.emplace_back(zv, bigm);
                model().add_row(nm("gres", m, o), 0.0, milp::kInf, std::move(resid));
                model().add_row(nm("gzu", m, o), -milp::kInf, bigm, {{sc.g, 1.0}, {zu, bigm}});
                model().add_row(nm("gzv", m, o), -milp::kInf, bigm, std::move(gv));
                model().add_row(nm("zuv", m, o), 1.0, milp::kInf, {{zu, 1.0}, {zv, 1.0}});
            }

            b_prev = b_next;
        }

        // served-stage accounting per stay
        for (std::size_t si = 0; si < path.stays.size(); ++si) {
            const PathPileStay& stay = path.stays[si];
            int a = stay.arrive_offset;
            int last = std::min(stay.depart_offset, W_ - 1);
            int r = required_stages(stay, se_);
            if (r == 0) continue;
            if (r > stay.depart_offset - a + 1)
                throw env::FeasibilityError("pile " + std::to_string(stay.pile) +
                                            " cannot finish charging before departure");
            std::string tag = "_p" + std::to_string(stay.pile) + "_a" + std::to_string(a);

            if (opts_.mode == EmitMode::Compact) {
                std::vector<std::pair<int, double>> total;
                for (int o = a; o <= last; ++o)
                    total.emplace_back(sm_.x_col[m][o][stay.pile], 1.0);
                if (stay.depart_offset <= W_ - 1) {
                    model().add_row("stay_" + std::to_string(m) + tag, r, r, std::move(total));
                } else {
                    model().add_row("stay_" + std::to_string(m) + tag, -milp::kInf, r, total);
                    std::vector<std::pair<int, double>> prefix;
                    for (int o = a; o <= last; ++o) {
                        prefix.emplace_back(sm_.x_col[m][o][stay.pile], 1.0);
                        int need = r - (stay.depart_offset - o);
                        if (need >= 1 && o < last)
                            model().add_row("pre_" + std::to_string(m) + tag + "_o" +
                                                std::to_string(o),
                                            need, milp::kInf, prefix);
                    }
                    int need_last = r - (stay.depart_offset - last);
                    if (need_last >= 1)
                        model().add_row("pre_" + std::to_string(m) + tag + "_o" +
                                            std::to_string(last),
                                        need_last, milp::kInf, std::move(prefix));
                }
            } else {
                // explicit energy counter in units of charging stages
                std::vector<int> e_cols;
                for (int o = a; o <= last + 1; ++o) {
                    double lb = 0.0, ub;
                    if (o == a) {
                        lb = ub = r;
                    } else {
                        int stages_left = stay.depart_offset - o + 1;  // counts stage o
                        ub = std::min(r, std::max(stages_left, 0));
                    }
                    e_cols.push_back(model().add_col(
                        "e_" + std::to_string(m) + tag + "_o" + std::to_string(o), lb, ub, 0.0,
                        false));
                }
                for (int o = a; o <= last; ++o) {
                    model().add_row("echain_" + std::to_string(m) + tag + "_o" + std::to_string(o),
                                    0.0, 0.0,
                                    {{e_cols[o - a + 1], 1.0},
                                     {e_cols[o - a], -1.0},
                                     {sm_.x_col[m][o][stay.pile], 1.0}});
                }
            }
        }
    }
};

}  // namespace

StageModel compile_stage(const stoch::ScenarioSet& set, const Config& cfg,
                         const CompileOptions& opts) {
    return Builder(set, cfg, opts).build();
}

StageSolution solve_stage(const StageModel& sm, const stoch::ScenarioSet& set,
                          const Config& cfg) {
    StageSolution sol;
    sol.mip = milp::branch_and_bound(sm.model, cfg.solver);
    if (sol.mip.status == milp::MipStatus::Infeasible ||
        sol.mip.status == milp::MipStatus::Unbounded ||
        sol.mip.status == milp::MipStatus::NoIncumbent) {
        throw std::runtime_error("solve_stage: solver returned no usable solution for '" +
                                 sm.model.name + "'");
    }
    const std::vector<double>& x = sol.mip.x;
    const StationParams& p = cfg.station;
    const double dt = p.stage_hours;

    sol.rewards.assign(sm.scenarios, std::vector<StageRewardRow>(sm.window));
    for (int m = 0; m < sm.scenarios; ++m) {
        const stoch::SamplePath& path = set.paths[m];
        std::vector<std::vector<const PathPileStay*>> active(
            sm.window, std::vector<const PathPileStay*>(sm.piles, nullptr));
        for (const PathPileStay& stay : path.stays) {
            int last = std::min(stay.depart_offset, sm.window - 1);
            for (int o = stay.arrive_offset; o <= last; ++o) active[o][stay.pile] = &stay;
        }
        for (int o = 0; o < sm.window; ++o) {
            StageRewardRow& row = sol.rewards[m][o];
            const StageModel::StageCols& sc = sm.cols[m][o];
            for (int pile = 0; pile < sm.piles; ++pile) {
                int xc = sm.x_col[m][o][pile];
                if (xc < 0 || x[xc] < 0.5) continue;
                row.earning += active[o][pile]->locked_price * p.pile_power_kw * dt;
            }
            row.grid_import_kw = x[sc.g];
            row.procure_cost = p.tariff_at(sm.first_stage + o) * x[sc.g] * dt;
            double wear_kw = sm.opts.mode == EmitMode::Literal ? x[sc.u] + x[sc.v]
                                                               : x[sc.hc] + x[sc.hdc];
            row.storage_cost = p.storage_cost_per_kwh * wear_kw * dt;
            row.renewable_cost =
                (p.wind_cost_per_kwh * x[sc.wu] + p.solar_cost_per_kwh * x[sc.su]) * dt;
            row.qos_cost = p.lost_ev_penalty * path.stages[o].lost;
            row.posted_price = path.stages[o].posted_price;
        }
    }

    const StageModel::StageCols& first = sm.cols[0][0];
    sol.first_action.posted_price = set.first_stage_price;
    sol.first_action.storage_power_kw = x[first.hdc] - x[first.hc];
    sol.first_action.wind_used_kw = std::clamp(x[first.wu], 0.0, set.paths[0].stages[0].wind_kw);
    sol.first_action.solar_used_kw =
        std::clamp(x[first.su], 0.0, set.paths[0].stages[0].solar_kw);
    sol.first_action.charge.assign(sm.piles, 0);
    for (int pile = 0; pile < sm.piles; ++pile) {
        int xc = sm.x_col[0][0][pile];
        if (xc >= 0 && x[xc] > 0.5) sol.first_action.charge[pile] = 1;
    }
    return sol;
}

}  // namespace evsched::mpc
