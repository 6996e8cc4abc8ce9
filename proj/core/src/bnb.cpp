#include "evsched/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <queue>

namespace evsched::milp {

namespace {

struct Node {
    std::uint64_t id = 0;
    double bound = 0.0;  // parent relaxation objective, in maximize space
    std::vector<std::array<double, 2>> fix;  // (lb, ub) per fixed col
    std::vector<int> fix_cols;
    std::shared_ptr<Basis> warm;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound < b.bound;  // max-heap on bound
        return a.id > b.id;                                // FIFO on ties
    }
};

double max_row_violation(const MilpModel& model, const std::vector<double>& x) {
    double worst = 0.0;
    for (const auto& r : model.rows) {
        double act = 0.0;
        for (auto [j, a] : r.terms) act += a * x[j];
        if (std::isfinite(r.lo)) worst = std::max(worst, r.lo - act);
        if (std::isfinite(r.hi)) worst = std::max(worst, act - r.hi);
    }
    for (std::size_t j = 0; j < model.cols.size(); ++j) {
        worst = std::max(worst, model.cols[j].lb - x[j]);
        worst = std::max(worst, x[j] - model.cols[j].ub);
    }
    return worst;
}

}  // namespace

MipResult branch_and_bound(const MilpModel& model, const SolverLimits& limits) {
    model.validate();
    const double sense = model.maximize ? 1.0 : -1.0;
    const auto t0 = std::chrono::steady_clock::now();
    auto out_of_time = [&]() {
        if (limits.time_limit_ms <= 0) return false;
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
        return ms >= limits.time_limit_ms;
    };

    std::vector<int> bin_cols;
    for (std::size_t j = 0; j < model.cols.size(); ++j)
        if (model.cols[j].binary) bin_cols.push_back(static_cast<int>(j));

    MipResult res;
    SimplexOptions lp_opts;
    lp_opts.feas_tol = limits.feas_tol;

    MilpModel work = model;  // bounds mutated per node, restored after

    auto solve_with = [&](const Node& nd, const Basis* warm) {
        for (std::size_t k = 0; k < nd.fix_cols.size(); ++k) {
            work.cols[nd.fix_cols[k]].lb = nd.fix[k][0];
            work.cols[nd.fix_cols[k]].ub = nd.fix[k][1];
        }
        SimplexOptions o = lp_opts;
        o.warm_start = warm;
        LpResult r = lp_solve(work, o);
        for (int c : nd.fix_cols) {
            work.cols[c].lb = model.cols[c].lb;
            work.cols[c].ub = model.cols[c].ub;
        }
        return r;
    };

    bool have_incumbent = false;
    double incumbent = -kInf;  // maximize space
    std::vector<double> best_x;

    auto fractional_of = [&](const std::vector<double>& x) {
        int col = -1;
        double worst = limits.int_tol;
        for (int j : bin_cols) {
            double f = std::abs(x[j] - std::round(x[j]));
            if (f > worst + 1e-15) { worst = f; col = j; }
        }
        return col;  // -1 when integral
    };

    auto offer_incumbent = [&](double obj_sense, const std::vector<double>& x) {
        if (!have_incumbent || obj_sense > incumbent + 1e-12) {
            have_incumbent = true;
            incumbent = obj_sense;
            best_x = x;
        }
    };

    // nodes whose bound cannot beat the incumbent by more than the requested
    // gap are proven useless
    auto prune_tol = [&]() {
        if (!have_incumbent) return 1e-12;
        return std::max(1e-12, limits.rel_gap * std::max(1.0, std::abs(incumbent)));
    };

    // dive for an incumbent: repeatedly fix every near-integral binary (and
    // the worst fractional one) to the rounding, re-solving the LP in between
    // so row feasibility is repaired as the dive deepens
    auto try_diving = [&](const Node& nd, const LpResult& relax) {
        Node probe;
        probe.fix_cols = nd.fix_cols;
        probe.fix = nd.fix;
        std::vector<char> fixed(model.cols.size(), 0);
        for (int c : probe.fix_cols) fixed[c] = 1;
        const LpResult* cur = &relax;
        LpResult step;
        for (int pass = 0; pass < 64; ++pass) {
            int frac = -1;
            double worst = limits.int_tol;
            for (int j : bin_cols) {
                if (fixed[j]) continue;
                double f = std::abs(cur->x[j] - std::round(cur->x[j]));
                if (f > worst + 1e-15) { worst = f; frac = j; }
            }
            if (frac < 0) {
                // integral already: pin the remaining binaries and accept
                for (int j : bin_cols) {
                    if (fixed[j]) continue;
                    double v = std::round(cur->x[j]);
                    probe.fix_cols.push_back(j);
                    probe.fix.push_back({v, v});
                    fixed[j] = 1;
                }
                LpResult r = solve_with(probe, &cur->basis);
                res.lp_iterations += r.iterations;
                if (r.status == LpStatus::Optimal) offer_incumbent(sense * r.objective, r.x);
                return;
            }
            for (int j : bin_cols) {
                if (fixed[j]) continue;
                double f = std::abs(cur->x[j] - std::round(cur->x[j]));
                if (j == frac || f <= limits.int_tol) {
                    double v = std::round(cur->x[j]);
                    probe.fix_cols.push_back(j);
                    probe.fix.push_back({v, v});
                    fixed[j] = 1;
                }
            }
            step = solve_with(probe, &cur->basis);
            res.lp_iterations += step.iterations;
            if (step.status != LpStatus::Optimal) return;  // dead end, keep branching
            if (have_incumbent && sense * step.objective <= incumbent + 1e-12) return;
            cur = &step;
        }
    };

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    std::uint64_t next_id = 0;
    double tree_top = kInf;  // best bound among open nodes, maximize space

    Node root;
    root.id = next_id++;
    LpResult root_lp = solve_with(root, nullptr);
    res.lp_iterations += root_lp.iterations;
    res.nodes = 1;
    if (root_lp.status == LpStatus::Infeasible) {
        res.status = MipStatus::Infeasible;
        return res;
    }
    if (root_lp.status == LpStatus::Unbounded) {
        res.status = MipStatus::Unbounded;
        return res;
    }
    if (root_lp.status == LpStatus::IterationLimit) {
        res.status = MipStatus::NoIncumbent;
        return res;
    }

    root.bound = sense * root_lp.objective;
    tree_top = root.bound;
    {
        int frac = fractional_of(root_lp.x);
        if (frac < 0) {
            offer_incumbent(root.bound, root_lp.x);
        } else {
            if (!bin_cols.empty()) try_diving(root, root_lp);
            Node lo = root, hi = root;
            lo.id = next_id++;
            hi.id = next_id++;
            lo.warm = hi.warm = std::make_shared<Basis>(root_lp.basis);
            lo.fix_cols.push_back(frac);
            lo.fix.push_back({0.0, 0.0});
            hi.fix_cols.push_back(frac);
            hi.fix.push_back({1.0, 1.0});
            open.push(std::move(lo));
            open.push(std::move(hi));
        }
    }

    bool hit_limit = false;
    double remaining_top = -kInf;  // proven residual bound after a clean stop
    while (!open.empty()) {
        if (res.nodes >= limits.node_limit || out_of_time()) { hit_limit = true; break; }
        Node nd = open.top();
        open.pop();
        tree_top = nd.bound;
        if (have_incumbent && nd.bound <= incumbent + prune_tol()) {
            // best-first: everything remaining is within the requested gap
            remaining_top = nd.bound;
            while (!open.empty()) open.pop();
            break;
        }
        ++res.nodes;
        LpResult lp = solve_with(nd, nd.warm.get());
        res.lp_iterations += lp.iterations;
        if (lp.status == LpStatus::Infeasible) continue;
        if (lp.status != LpStatus::Optimal) { hit_limit = true; break; }
        double bound = sense * lp.objective;
        if (have_incumbent && bound <= incumbent + prune_tol()) continue;

        int frac = fractional_of(lp.x);
        if (frac < 0) {
            offer_incumbent(bound, lp.x);
            continue;
        }
        if (res.nodes % 64 == 1) try_diving(nd, lp);
        Node lo = nd, hi = nd;
        lo.id = next_id++;
        hi.id = next_id++;
        lo.warm = hi.warm = std::make_shared<Basis>(lp.basis);
        lo.fix_cols.push_back(frac);
        lo.fix.push_back({0.0, 0.0});
        hi.fix_cols.push_back(frac);
        hi.fix.push_back({1.0, 1.0});
        lo.bound = hi.bound = bound;
        open.push(std::move(lo));
        open.push(std::move(hi));
    }

    double open_top = open.empty() ? -kInf : open.top().bound;
    if (!hit_limit && open.empty() && !have_incumbent) {
        res.status = MipStatus::Infeasible;
        return res;
    }
    if (!have_incumbent) {
        res.status = MipStatus::NoIncumbent;
        res.best_bound = sense * (hit_limit ? std::max(tree_top, open_top) : open_top);
        return res;
    }

    res.objective = sense * incumbent;
    res.x = best_x;
    for (int j : bin_cols) res.x[j] = std::round(res.x[j]);
    res.bound_violation = max_row_violation(model, res.x);

    double top = hit_limit ? std::max(tree_top, open_top) : remaining_top;
    res.best_bound = sense * std::max(incumbent, top);
    res.gap =
        std::max(0.0, (top - incumbent) / std::max(1.0, std::abs(incumbent)));
    res.status = !hit_limit || res.gap <= limits.rel_gap ? MipStatus::Optimal
                                                         : MipStatus::FeasibleWithGap;
    return res;
}

MipResult enumerate_oracle(const MilpModel& model, int max_binaries, const SimplexOptions& opts) {
    model.validate();
    std::vector<int> bin_cols;
    for (std::size_t j = 0; j < model.cols.size(); ++j)
        if (model.cols[j].binary) bin_cols.push_back(static_cast<int>(j));
    if (static_cast<int>(bin_cols.size()) > max_binaries)
        throw std::invalid_argument("enumerate_oracle: too many binaries (" +
                                    std::to_string(bin_cols.size()) + ")");

    const double sense = model.maximize ? 1.0 : -1.0;
    MilpModel work = model;
    MipResult res;
    res.status = MipStatus::Infeasible;
    double best = -kInf;
    const std::uint64_t count = 1ull << bin_cols.size();
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        for (std::size_t k = 0; k < bin_cols.size(); ++k) {
            double v = (mask >> k) & 1 ? 1.0 : 0.0;
            work.cols[bin_cols[k]].lb = v;
            work.cols[bin_cols[k]].ub = v;
        }
        LpResult r = lp_solve(work, opts);
        ++res.nodes;
        res.lp_iterations += r.iterations;
        if (r.status == LpStatus::Unbounded) {
            res.status = MipStatus::Unbounded;
            return res;
        }
        if (r.status != LpStatus::Optimal) continue;
        double v = sense * r.objective;
        if (res.status == MipStatus::Infeasible || v > best + 1e-12) {
            best = v;
            res.objective = r.objective;
            res.x = r.x;
            for (std::size_t k = 0; k < bin_cols.size(); ++k)
                res.x[bin_cols[k]] = (mask >> k) & 1 ? 1.0 : 0.0;
            res.status = MipStatus::Optimal;
        }
    }
    if (res.status == MipStatus::Optimal) {
        res.best_bound = res.objective;
        res.gap = 0.0;
        res.bound_violation = max_row_violation(model, res.x);
    }
    return res;
}

}  // namespace evsched::milp
