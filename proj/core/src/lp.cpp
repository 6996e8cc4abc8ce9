#include "evsched/milp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evsched::milp {

int MilpModel::add_col(const std::string& name_, double lb, double ub, double obj, bool binary) {
    Column c;
    c.lb = lb;
    c.ub = ub;
    c.obj = obj;
    c.binary = binary;
    c.name = name_;
    int id = static_cast<int>(cols.size());
    cols.push_back(std::move(c));
    if (!name_.empty()) {
        auto [it, fresh] = col_index.emplace(name_, id);
        if (!fresh) throw std::invalid_argument("MilpModel: duplicate column '" + name_ + "'");
    }
    return id;
}

int MilpModel::add_row(const std::string& name_, double lo, double hi,
                       std::vector<std::pair<int, double>> terms) {
    Row r;
    r.terms = std::move(terms);
    r.lo = lo;
    r.hi = hi;
    r.name = name_;
    rows.push_back(std::move(r));
    return static_cast<int>(rows.size()) - 1;
}

int MilpModel::col(const std::string& name_) const {
    auto it = col_index.find(name_);
    if (it == col_index.end())
        throw std::invalid_argument("MilpModel: unknown column '" + name_ + "'");
    return it->second;
}

int MilpModel::binary_count() const {
    int n = 0;
    for (const auto& c : cols) n += c.binary ? 1 : 0;
    return n;
}

void MilpModel::validate() const {
    for (const auto& c : cols) {
        if (std::isnan(c.lb) || std::isnan(c.ub) || c.lb > c.ub)
            throw std::invalid_argument("MilpModel: bad bounds on column '" + c.name + "'");
        if (c.binary && (c.lb < -1e-12 || c.ub > 1.0 + 1e-12))
            throw std::invalid_argument("MilpModel: binary column '" + c.name +
                                        "' with non-unit bounds");
    }
    for (const auto& r : rows) {
        if (r.lo > r.hi) throw std::invalid_argument("MilpModel: empty row range '" + r.name + "'");
        for (auto [j, a] : r.terms) {
            if (j < 0 || j >= static_cast<int>(cols.size()))
                throw std::invalid_argument("MilpModel: row '" + r.name + "' references column " +
                                            std::to_string(j));
            if (!std::isfinite(a))
                throw std::invalid_argument("MilpModel: non-finite coefficient in '" + r.name + "'");
        }
    }
}

namespace {

enum : std::int8_t { kAtLower = 0, kAtUpper = 1, kBasic = 2, kFreeZero = 3 };

// Bounded-variable primal simplex with an explicit dense basis inverse.
// Variables 0..n-1 are the structural columns, n..n+m-1 the row slacks
// (equation a.x - s = 0 with s ranged in [row.lo, row.hi]).
class Simplex {
  public:
    Simplex(const MilpModel& model, const SimplexOptions& opts)
        : model_(model), opts_(opts), n_(static_cast<int>(model.cols.size())),
          m_(static_cast<int>(model.rows.size())) {
        total_ = n_ + m_;
        cost_.assign(total_, 0.0);
        double sense = model.maximize ? -1.0 : 1.0;
        for (int j = 0; j < n_; ++j) cost_[j] = sense * model.cols[j].obj;
        lb_.resize(total_);
        ub_.resize(total_);
        for (int j = 0; j < n_; ++j) {
            lb_[j] = model.cols[j].lb;
            ub_[j] = model.cols[j].ub;
        }
        for (int r = 0; r < m_; ++r) {
            lb_[n_ + r] = model.rows[r].lo;
            ub_[n_ + r] = model.rows[r].hi;
        }
        // column-wise matrix incl. slack coefficient -1
        col_rows_.resize(total_);
        col_vals_.resize(total_);
        for (int r = 0; r < m_; ++r) {
            for (auto [j, a] : model.rows[r].terms) {
                if (a == 0.0) continue;
                col_rows_[j].push_back(r);
                col_vals_[j].push_back(a);
            }
            col_rows_[n_ + r].push_back(r);
            col_vals_[n_ + r].push_back(-1.0);
        }
    }

    LpResult run() {
        LpResult res;
        if (!init_basis()) {
            // singular warm basis: fall back to the all-slack basis
            warm_ok_ = false;
            init_basis();
        }
        compute_basics();

        LpStatus st = phase1();
        if (st == LpStatus::Optimal) st = phase2();

        res.status = st;
        res.iterations = iters_;
        res.x.assign(n_, 0.0);
        for (int j = 0; j < n_; ++j) res.x[j] = value_[j];
        double obj = 0.0;
        for (int j = 0; j < n_; ++j) obj += model_.cols[j].obj * value_[j];
        res.objective = obj;
        res.basis.status.assign(status_.begin(), status_.end());
        res.basis.basic_cols = basis_;
        return res;
    }

  private:
    const MilpModel& model_;
    SimplexOptions opts_;
    int n_, m_, total_;
    std::vector<double> cost_, lb_, ub_, value_;
    std::vector<std::vector<int>> col_rows_;
    std::vector<std::vector<double>> col_vals_;
    std::vector<std::int8_t> status_;
    std::vector<int> basis_;       // var id per row position
    std::vector<int> row_of_;      // var id -> basis position or -1
    std::vector<double> binv_;     // dense m x m, row-major
    std::vector<double> work_y_, work_w_, work_q_;
    int iters_ = 0;
    int degen_streak_ = 0;
    bool bland_ = false;
    bool warm_ok_ = true;
    int pivots_since_factor_ = 0;

    double at(const std::vector<double>& mat, int i, int j) const { return mat[i * m_ + j]; }

    bool init_basis() {
        status_.assign(total_, kAtLower);
        basis_.assign(m_, -1);
        row_of_.assign(total_, -1);
        value_.assign(total_, 0.0);

        const Basis* warm = warm_ok_ ? opts_.warm_start : nullptr;
        if (warm && warm->valid() &&
            static_cast<int>(warm->status.size()) == total_ &&
            static_cast<int>(warm->basic_cols.size()) == m_) {
            status_ = warm->status;
            basis_ = warm->basic_cols;
            bool ok = true;
            for (int r = 0; r < m_ && ok; ++r) {
                int v = basis_[r];
                if (v < 0 || v >= total_ || row_of_[v] >= 0 || status_[v] != kBasic) ok = false;
                else row_of_[v] = r;
            }
            if (ok && factorize()) {
                snap_nonbasic_bounds();
                return true;
            }
            row_of_.assign(total_, -1);
        }

        // all-slack start
        status_.assign(total_, kAtLower);
        for (int r = 0; r < m_; ++r) {
            basis_[r] = n_ + r;
            status_[n_ + r] = kBasic;
            row_of_[n_ + r] = r;
        }
        for (int j = 0; j < n_; ++j) status_[j] = initial_status(j);
        binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
        for (int r = 0; r < m_; ++r) binv_[r * m_ + r] = -1.0;  // inverse of -I
        snap_nonbasic_bounds();
        return true;
    }

    std::int8_t initial_status(int j) const {
        if (std::isfinite(lb_[j])) return kAtLower;
        if (std::isfinite(ub_[j])) return kAtUpper;
        return kFreeZero;
    }

    void snap_nonbasic_bounds() {
        for (int j = 0; j < total_; ++j) {
            switch (status_[j]) {
                case kAtLower: value_[j] = std::isfinite(lb_[j]) ? lb_[j] : 0.0; break;
                case kAtUpper: value_[j] = std::isfinite(ub_[j]) ? ub_[j] : 0.0; break;
                case kFreeZero: value_[j] = 0.0; break;
                default: break;
            }
        }
    }

    bool factorize() {
        // dense Gauss-Jordan inverse of the basis matrix
        std::vector<double> a(static_cast<std::size_t>(m_) * m_, 0.0);
        for (int pos = 0; pos < m_; ++pos) {
            int v = basis_[pos];
            for (std::size_t k = 0; k < col_rows_[v].size(); ++k)
                a[col_rows_[v][k] * m_ + pos] += col_vals_[v][k];
        }
        std::vector<double> inv(static_cast<std::size_t>(m_) * m_, 0.0);
        for (int i = 0; i < m_; ++i) inv[i * m_ + i] = 1.0;
        for (int c = 0; c < m_; ++c) {
            int piv = -1;
            double best = 1e-11;
            for (int r = c; r < m_; ++r) {
                double v = std::abs(a[r * m_ + c]);
                if (v > best) { best = v; piv = r; }
            }
            if (piv < 0) return false;
            if (piv != c) {
                for (int k = 0; k < m_; ++k) {
                    std::swap(a[piv * m_ + k], a[c * m_ + k]);
                    std::swap(inv[piv * m_ + k], inv[c * m_ + k]);
                }
            }
            double d = a[c * m_ + c];
            for (int k = 0; k < m_; ++k) {
                a[c * m_ + k] /= d;
                inv[c * m_ + k] /= d;
            }
            for (int r = 0; r < m_; ++r) {
                if (r == c) continue;
                double f = a[r * m_ + c];
                if (f == 0.0) continue;
                for (int k = 0; k < m_; ++k) {
                    a[r * m_ + k] -= f * a[c * m_ + k];
                    inv[r * m_ + k] -= f * inv[c * m_ + k];
                }
            }
        }
        binv_ = std::move(inv);
        pivots_since_factor_ = 0;
        return true;
    }

    void compute_basics() {
        // q = -(sum of nonbasic columns times their values); x_B = Binv q
        work_q_.assign(m_, 0.0);
        for (int j = 0; j < total_; ++j) {
            if (status_[j] == kBasic || value_[j] == 0.0) continue;
            double xv = value_[j];
            for (std::size_t k = 0; k < col_rows_[j].size(); ++k)
                work_q_[col_rows_[j][k]] -= col_vals_[j][k] * xv;
        }
        for (int i = 0; i < m_; ++i) {
            double s = 0.0;
            const double* row = &binv_[i * m_];
            for (int k = 0; k < m_; ++k) s += row[k] * work_q_[k];
            value_[basis_[i]] = s;
        }
    }

    void ftran(int j, std::vector<double>& w) const {
        w.assign(m_, 0.0);
        for (std::size_t k = 0; k < col_rows_[j].size(); ++k) {
            int r = col_rows_[j][k];
            double a = col_vals_[j][k];
            const double* binv_col = &binv_[r];  // column r strided by m_
            for (int i = 0; i < m_; ++i) w[i] += a * binv_col[i * m_];
        }
    }

    // y = cb^T Binv, with cb given per basis position (sparse iteration)
    void btran(const std::vector<std::pair<int, double>>& cb, std::vector<double>& y) const {
        y.assign(m_, 0.0);
        for (auto [i, c] : cb) {
            const double* row = &binv_[i * m_];
            for (int k = 0; k < m_; ++k) y[k] += c * row[k];
        }
    }

    double reduced_cost(int j, const std::vector<double>& y, bool phase1) const {
        double d = phase1 ? 0.0 : cost_[j];
        for (std::size_t k = 0; k < col_rows_[j].size(); ++k)
            d -= y[col_rows_[j][k]] * col_vals_[j][k];
        return d;
    }

    struct Entering {
        int var = -1;
        int dir = 0;  // +1 increase, -1 decrease
        double score = 0.0;
    };

    Entering price(const std::vector<double>& y, bool phase1) const {
        Entering best;
        for (int j = 0; j < total_; ++j) {
            std::int8_t st = status_[j];
            if (st == kBasic) continue;
            if (ub_[j] - lb_[j] < 1e-12 && st != kFreeZero) continue;  // fixed
            double d = reduced_cost(j, y, phase1);
            int dir = 0;
            double score = 0.0;
            if ((st == kAtLower || st == kFreeZero) && d < -opts_.dual_tol) {
                dir = +1;
                score = -d;
            } else if ((st == kAtUpper || st == kFreeZero) && d > opts_.dual_tol) {
                dir = -1;
                score = d;
            } else {
                continue;
            }
            if (bland_) { best = {j, dir, score}; return best; }
            if (score > best.score + 1e-15 ||
                (score > best.score - 1e-15 && (best.var < 0 || j < best.var))) {
                best = {j, dir, score};
            }
        }
        return best;
    }

    struct RatioHit {
        double t = kInf;
        int pos = -1;       // basis position, or -2 for an entering bound flip
        int side = 0;       // 0 leave at lower, 1 leave at upper
    };

    // Blocking step length. In phase 1 infeasible basics block when they
    // reach the bound they violate (the composite gradient flips there).
    RatioHit ratio_test(int jenter, int dir, const std::vector<double>& w,
                        const std::vector<std::int8_t>& infeas) const {
        RatioHit best;
        double span = ub_[jenter] - lb_[jenter];
        if (std::isfinite(span)) { best.t = span; best.pos = -2; }

        const double piv_tol = 1e-9;
        for (int i = 0; i < m_; ++i) {
            double delta = -dir * w[i];  // rate of change of basic i
            if (std::abs(delta) < piv_tol) continue;
            int v = basis_[i];
            double x = value_[v];
            double t = kInf;
            int side = 0;
            std::int8_t inf = infeas.empty() ? std::int8_t{0} : infeas[i];
            if (inf == -1) {  // below lower bound
                if (delta > 0.0) { t = (lb_[v] - x) / delta; side = 0; }
            } else if (inf == +1) {  // above upper bound
                if (delta < 0.0) { t = (ub_[v] - x) / delta; side = 1; }
            } else {
                if (delta < 0.0 && std::isfinite(lb_[v])) { t = (lb_[v] - x) / delta; side = 0; }
                else if (delta > 0.0 && std::isfinite(ub_[v])) { t = (ub_[v] - x) / delta; side = 1; }
            }
            if (t == kInf) continue;
            if (t < 0.0) t = 0.0;
            if (t < best.t - 1e-12) {
                best = {t, i, side};
            } else if (t < best.t + 1e-12 && best.pos >= 0) {
                // tie: prefer the larger pivot for stability, then lower var id
                double cur = std::abs(w[best.pos]);
                double cand = std::abs(w[i]);
                if (cand > cur * (1.0 + 1e-9) ||
                    (cand > cur * (1.0 - 1e-9) && basis_[i] < basis_[best.pos]))
                    best = {t, i, side};
            }
        }
        return best;
    }

    void apply_step(int jenter, int dir, double t, const std::vector<double>& w) {
        if (t != 0.0) {
            for (int i = 0; i < m_; ++i) {
                if (w[i] == 0.0) continue;
                value_[basis_[i]] -= dir * t * w[i];
            }
            value_[jenter] += dir * t;
        }
    }

    void pivot(int jenter, int pos, int leave_side, const std::vector<double>& w) {
        int jleave = basis_[pos];
        status_[jleave] = leave_side == 0 ? kAtLower : kAtUpper;
        value_[jleave] = leave_side == 0 ? lb_[jleave] : ub_[jleave];
        row_of_[jleave] = -1;
        basis_[pos] = jenter;
        status_[jenter] = kBasic;
        row_of_[jenter] = pos;

        // Binv update: row pos scaled by 1/w[pos], others eliminated
        double piv = w[pos];
        double* prow = &binv_[pos * m_];
        for (int k = 0; k < m_; ++k) prow[k] /= piv;
        for (int i = 0; i < m_; ++i) {
            if (i == pos) continue;
            double f = w[i];
            if (f == 0.0) continue;
            double* irow = &binv_[i * m_];
            for (int k = 0; k < m_; ++k) irow[k] -= f * prow[k];
        }
        if (++pivots_since_factor_ >= 120) {
            factorize();
            compute_basics();
        }
    }

    LpStatus phase1() {
        std::vector<std::int8_t> infeas(m_, 0);
        std::vector<std::pair<int, double>> cb;
        while (true) {
            if (++iters_ > opts_.iteration_limit) return LpStatus::IterationLimit;
            double total_violation = 0.0;
            cb.clear();
            for (int i = 0; i < m_; ++i) {
                int v = basis_[i];
                double x = value_[v];
                if (x < lb_[v] - opts_.feas_tol) {
                    infeas[i] = -1;
                    cb.emplace_back(i, -1.0);
                    total_violation += lb_[v] - x;
                } else if (x > ub_[v] + opts_.feas_tol) {
                    infeas[i] = +1;
                    cb.emplace_back(i, 1.0);
                    total_violation += x - ub_[v];
                } else {
                    infeas[i] = 0;
                }
            }
            if (total_violation <= opts_.feas_tol * std::max(1, m_)) return LpStatus::Optimal;

            btran(cb, work_y_);
            Entering e = price(work_y_, true);
            if (e.var < 0) return LpStatus::Infeasible;

            ftran(e.var, work_w_);
            RatioHit hit = ratio_test(e.var, e.dir, work_w_, infeas);
            if (hit.t == kInf) return LpStatus::IterationLimit;  // cannot happen in theory

            track_degeneracy(hit.t);
            apply_step(e.var, e.dir, hit.t, work_w_);
            if (hit.pos == -2) {
                status_[e.var] = e.dir > 0 ? kAtUpper : kAtLower;
            } else {
                pivot(e.var, hit.pos, hit.side, work_w_);
            }
        }
    }

    LpStatus phase2() {
        std::vector<std::int8_t> no_infeas;
        std::vector<std::pair<int, double>> cb;
        while (true) {
            if (++iters_ > opts_.iteration_limit) return LpStatus::IterationLimit;
            cb.clear();
            for (int i = 0; i < m_; ++i) {
                double c = cost_[basis_[i]];
                if (c != 0.0) cb.emplace_back(i, c);
            }
            btran(cb, work_y_);
            Entering e = price(work_y_, false);
            if (e.var < 0) return LpStatus::Optimal;

            ftran(e.var, work_w_);
            RatioHit hit = ratio_test(e.var, e.dir, work_w_, no_infeas);
            if (hit.t == kInf) return LpStatus::Unbounded;

            track_degeneracy(hit.t);
            apply_step(e.var, e.dir, hit.t, work_w_);
            if (hit.pos == -2) {
                status_[e.var] = e.dir > 0 ? kAtUpper : kAtLower;
            } else {
                pivot(e.var, hit.pos, hit.side, work_w_);
            }
        }
    }

    void track_degeneracy(double t) {
        if (t < 1e-12) {
            if (++degen_streak_ > 60) bland_ = true;
        } else {
            degen_streak_ = 0;
        }
    }
};

}  // namespace

LpResult lp_solve(const MilpModel& model, const SimplexOptions& opts) {
    model.validate();
    if (model.rows.empty()) {
        // pure bound optimization
        LpResult res;
        res.status = LpStatus::Optimal;
        res.x.assign(model.cols.size(), 0.0);
        double obj = 0.0;
        double sense = model.maximize ? 1.0 : -1.0;
        for (std::size_t j = 0; j < model.cols.size(); ++j) {
            const auto& c = model.cols[j];
            if (c.lb > c.ub) { res.status = LpStatus::Infeasible; return res; }
            double take;
            if (sense * c.obj > 0.0) take = c.ub;
            else if (sense * c.obj < 0.0) take = c.lb;
            else take = std::isfinite(c.lb) ? c.lb : (std::isfinite(c.ub) ? c.ub : 0.0);
            if (!std::isfinite(take)) { res.status = LpStatus::Unbounded; return res; }
            res.x[j] = take;
            obj += c.obj * take;
        }
        res.objective = obj;
        return res;
    }
    Simplex s(model, opts);
    return s.run();
}

}  // namespace evsched::milp
