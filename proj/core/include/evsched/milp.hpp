#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "evsched/params.hpp"

namespace evsched::milp {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Mixed-integer linear model. Rows are two-sided activity ranges
// lo <= a.x <= hi; equalities have lo == hi, one-sided rows use +-inf.
struct MilpModel {
    struct Column {
        double lb = 0.0;
        double ub = kInf;
        double obj = 0.0;
        bool binary = false;
        std::string name;
    };
    struct Row {
        std::vector<std::pair<int, double>> terms;  // (column, coefficient)
        double lo = -kInf;
        double hi = kInf;
        std::string name;
    };

    bool maximize = true;
    std::string name = "model";
    std::vector<Column> cols;
    std::vector<Row> rows;
    std::unordered_map<std::string, int> col_index;

    int add_col(const std::string& name, double lb, double ub, double obj, bool binary = false);
    int add_row(const std::string& name, double lo, double hi,
                std::vector<std::pair<int, double>> terms);
    int col(const std::string& name) const;  // throws if unknown

    int binary_count() const;
    void validate() const;  // bounds sane, term indices in range
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

// Resumable basis: one entry per column then per row-slack.
struct Basis {
    std::vector<std::int8_t> status;   // 0 nonbasic-lower, 1 nonbasic-upper, 2 basic, 3 free-at-zero
    std::vector<int> basic_cols;       // column id per row position
    bool valid() const { return !basic_cols.empty(); }
};

struct LpResult {
    LpStatus status = LpStatus::IterationLimit;
    double objective = 0.0;
    std::vector<double> x;
    int iterations = 0;
    Basis basis;
};

struct SimplexOptions {
    double feas_tol = 1e-7;
    double dual_tol = 1e-9;
    int iteration_limit = 50000;
    const Basis* warm_start = nullptr;
};

// Bounded-variable primal simplex over the continuous relaxation
// (binary markers are treated as plain [lb, ub] bounds).
LpResult lp_solve(const MilpModel& model, const SimplexOptions& opts = {});

enum class MipStatus { Optimal, FeasibleWithGap, Infeasible, Unbounded, NoIncumbent };

struct MipResult {
    MipStatus status = MipStatus::NoIncumbent;
    double objective = 0.0;       // incumbent value (model sense)
    double best_bound = 0.0;      // proven bound (model sense)
    std::vector<double> x;
    std::int64_t nodes = 0;
    std::int64_t lp_iterations = 0;
    double gap = 0.0;             // (bound - incumbent) / max(1, |incumbent|)
    // audit: worst observed incumbent-above-bound excess; must stay ~0
    double bound_violation = 0.0;
};

// Best-first branch and bound on the binary columns: most-fractional
// branching (ties to the lowest column index), warm-started node LPs, and a
// fix-and-resolve rounding heuristic for incumbents. Deterministic.
MipResult branch_and_bound(const MilpModel& model, const SolverLimits& limits = {});

// Exhaustive reference solver: enumerates every binary assignment and solves
// the remaining LP. Refuses models with more than `max_binaries`.
MipResult enumerate_oracle(const MilpModel& model, int max_binaries = 20,
                           const SimplexOptions& opts = {});

// --- exchange format ---------------------------------------------------------

// Writes the model in LP exchange format (Maximize / Subject To / Bounds /
// Binaries / End). Ranged rows are emitted as a _lo/_hi pair.
void write_lp(std::ostream& os, const MilpModel& model);
std::string to_lp_string(const MilpModel& model);

// Parses the subset of the LP format emitted by write_lp.
MilpModel parse_lp(std::istream& is);
MilpModel parse_lp_string(const std::string& text);

}  // namespace evsched::milp
