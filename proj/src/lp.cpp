#include "tfqkd/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tfqkd/kernels.hpp"

namespace tfqkd::lp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void LinearProgram::validate() const {
  if (num_vars < 0) throw std::invalid_argument("lp: negative variable count");
  if (int(objective.size()) != num_vars || int(var_lo.size()) != num_vars ||
      int(var_hi.size()) != num_vars)
    throw std::invalid_argument("lp: objective/bounds size mismatch");
  for (int j = 0; j < num_vars; ++j) {
    if (std::isnan(var_lo[j]) || std::isnan(var_hi[j]) || var_lo[j] > var_hi[j])
      throw std::invalid_argument("lp: inconsistent variable bounds");
    if (!std::isfinite(objective[j])) throw std::invalid_argument("lp: non-finite objective");
  }
  for (const Row& r : rows) {
    if (int(r.a.size()) != num_vars) throw std::invalid_argument("lp: row width mismatch");
    if (std::isnan(r.lo) || std::isnan(r.hi) || r.lo > r.hi)
      throw std::invalid_argument("lp: inconsistent row bounds");
    for (double v : r.a)
      if (!std::isfinite(v)) throw std::invalid_argument("lp: non-finite coefficient");
  }
}

const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    default: return "iteration_limit";
  }
}

namespace {

// Augmented problem: variables z = (x, r) with [A | -I] z = 0, r carrying the
// row bounds. Works directly on a scaled copy.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const SolveOptions& opts)
      : opts_(opts),
        m_(int(lp.rows.size())),
        n_(lp.num_vars),
        total_(m_ + lp.num_vars),
        a_(std::size_t(m_) * lp.num_vars, 0.0),
        row_scale_(m_, 1.0),
        col_scale_(lp.num_vars, 1.0),
        cost_(total_, 0.0),
        lo_(total_),
        hi_(total_),
        val_(total_, 0.0),
        state_(total_, kAtLower),
        basic_(m_),
        in_basis_pos_(total_, -1),
        binv_(std::size_t(m_) * m_, 0.0),
        xb_(m_, 0.0),
        work_(m_, 0.0),
        rhs_(m_, 0.0) {
    const double sign = lp.sense == LinearProgram::Sense::maximize ? 1.0 : -1.0;
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < n_; ++j) a_[idx(i, j)] = lp.rows[i].a[j];
    if (opts.equilibrate) equilibrate();
    for (int j = 0; j < n_; ++j) {
      cost_[j] = sign * lp.objective[j] * col_scale_[j];
      lo_[j] = lp.var_lo[j] / col_scale_[j];
      hi_[j] = lp.var_hi[j] / col_scale_[j];
    }
    for (int i = 0; i < m_; ++i) {
      lo_[n_ + i] = lp.rows[i].lo * row_scale_[i];
      hi_[n_ + i] = lp.rows[i].hi * row_scale_[i];
    }
    for (int j = 0; j < total_; ++j) val_[j] = initial_value(j);
    // Optimality tests must be relative to the cost magnitude, or count-scale
    // objectives drown the tolerance in dual roundoff.
    for (int j = 0; j < total_; ++j)
      cost_scale_ = std::max(cost_scale_, std::fabs(cost_[j]));
  }

  Solution run(const LinearProgram& lp) {
    Solution sol;
    // Start with every range variable basic (basis matrix -I).
    for (int i = 0; i < m_; ++i) set_basic(n_ + i, i);
    refactorize();

    bool feasible = iterate(true, sol.iterations);
    if (!feasible) {
      sol.status = infeasibility() > opts_.feas_tol ? Status::infeasible : Status::iteration_limit;
      if (sol.status == Status::infeasible) return sol;
    }
    if (infeasibility() > opts_.feas_tol) {
      sol.status = Status::infeasible;
      return sol;
    }
    bool optimal = iterate(false, sol.iterations);
    sol.status = optimal ? Status::optimal : (unbounded_ ? Status::unbounded : Status::iteration_limit);
    if (sol.status != Status::optimal) return sol;

    extract(lp, sol);
    return sol;
  }

 private:
  static constexpr int kAtLower = 0, kAtUpper = 1, kFree = 2, kBasic = 3;

  std::size_t idx(int i, int j) const { return std::size_t(i) * n_ + j; }

  double initial_value(int j) const {
    if (std::isfinite(lo_[j])) return lo_[j];
    if (std::isfinite(hi_[j])) return hi_[j];
    return 0.0;
  }

  void equilibrate() {
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i < m_; ++i) {
        double mx = 0.0, mn = kInf;
        for (int j = 0; j < n_; ++j) {
          double v = std::fabs(a_[idx(i, j)]);
          if (v > 0.0) { mx = std::max(mx, v); mn = std::min(mn, v); }
        }
        if (mx == 0.0) continue;
        double s = 1.0 / std::sqrt(mx * mn);
        row_scale_[i] *= s;
        for (int j = 0; j < n_; ++j) a_[idx(i, j)] *= s;
      }
      for (int j = 0; j < n_; ++j) {
        double mx = 0.0, mn = kInf;
        for (int i = 0; i < m_; ++i) {
          double v = std::fabs(a_[idx(i, j)]);
          if (v > 0.0) { mx = std::max(mx, v); mn = std::min(mn, v); }
        }
        if (mx == 0.0) continue;
        double s = 1.0 / std::sqrt(mx * mn);
        col_scale_[j] *= s;
        for (int i = 0; i < m_; ++i) a_[idx(i, j)] *= s;
      }
    }
    // Bounds enter scaled space as x/C and row bounds as R*b; column scales
    // divide the bounds, so guard against scales that would overflow them.
    for (double& s : col_scale_)
      if (!std::isfinite(s) || s <= 0.0) s = 1.0;
    for (double& s : row_scale_)
      if (!std::isfinite(s) || s <= 0.0) s = 1.0;
  }

  void set_basic(int var, int pos) {
    basic_[pos] = var;
    in_basis_pos_[var] = pos;
    state_[var] = kBasic;
  }

  // column `var` of the augmented matrix written into out[m_].
  void aug_column(int var, double* out) const {
    if (var < n_)
      for (int i = 0; i < m_; ++i) out[i] = a_[idx(i, var)];
    else {
      std::fill(out, out + m_, 0.0);
      out[var - n_] = -1.0;
    }
  }

  void refactorize() {
    // Gauss-Jordan inverse of the current basis matrix.
    std::vector<double> b(std::size_t(m_) * m_, 0.0);
    std::vector<double> col(m_);
    for (int p = 0; p < m_; ++p) {
      aug_column(basic_[p], col.data());
      for (int i = 0; i < m_; ++i) b[std::size_t(i) * m_ + p] = col[i];
    }
    std::vector<double>& inv = binv_;
    std::fill(inv.begin(), inv.end(), 0.0);
    for (int i = 0; i < m_; ++i) inv[std::size_t(i) * m_ + i] = 1.0;
    for (int c = 0; c < m_; ++c) {
      int piv = -1;
      double best = 0.0;
      for (int i = c; i < m_; ++i) {
        double v = std::fabs(b[std::size_t(i) * m_ + c]);
        if (v > best) { best = v; piv = i; }
      }
      if (piv < 0 || best < 1e-13)
        throw std::runtime_error("lp: singular basis during refactorization");
      if (piv != c) {
        for (int j = 0; j < m_; ++j) {
          std::swap(b[std::size_t(piv) * m_ + j], b[std::size_t(c) * m_ + j]);
          std::swap(inv[std::size_t(piv) * m_ + j], inv[std::size_t(c) * m_ + j]);
        }
      }
      double d = 1.0 / b[std::size_t(c) * m_ + c];
      for (int j = 0; j < m_; ++j) {
        b[std::size_t(c) * m_ + j] *= d;
        inv[std::size_t(c) * m_ + j] *= d;
      }
      for (int i = 0; i < m_; ++i) {
        if (i == c) continue;
        double f = b[std::size_t(i) * m_ + c];
        if (f == 0.0) continue;
        kern::axpy(-f, {&b[std::size_t(c) * m_], std::size_t(m_)},
                   {&b[std::size_t(i) * m_], std::size_t(m_)});
        kern::axpy(-f, {&inv[std::size_t(c) * m_], std::size_t(m_)},
                   {&inv[std::size_t(i) * m_], std::size_t(m_)});
      }
    }
  }

  // Recompute basic values from the nonbasic ones: x_B = -B^-1 N x_N.
  void compute_basics() {
    std::fill(rhs_.begin(), rhs_.end(), 0.0);
    for (int j = 0; j < n_; ++j) {
      if (state_[j] == kBasic) continue;
      double v = val_[j];
      if (v == 0.0) continue;
      for (int i = 0; i < m_; ++i) rhs_[i] -= a_[idx(i, j)] * v;
    }
    for (int i = n_; i < total_; ++i) {
      if (state_[i] == kBasic) continue;
      rhs_[i - n_] += val_[i];  // slack column is -e_i
    }
    for (int i = 0; i < m_; ++i) {
      std::span<const double> row(&binv_[std::size_t(i) * m_], std::size_t(m_));
      xb_[i] = kern::dot(row, {rhs_.data(), std::size_t(m_)});
      val_[basic_[i]] = xb_[i];
    }
  }

  double infeasibility() {
    compute_basics();
    double f = 0.0;
    for (int i = 0; i < m_; ++i) {
      int v = basic_[i];
      if (xb_[i] < lo_[v]) f += lo_[v] - xb_[i];
      else if (xb_[i] > hi_[v]) f += xb_[i] - hi_[v];
    }
    return f;
  }

  // Runs one simplex phase. Returns true when the phase reached its optimum
  // (phase 1: infeasibility minimized to zero; phase 2: reduced costs clean).
  bool iterate(bool phase1, int& iter_count) {
    std::vector<double> y(m_), col(m_);
    int since_refactor = 0;
    while (iter_count < opts_.max_iterations) {
      compute_basics();

      // Phase costs on basic variables.
      bool any_infeasible = false;
      for (int i = 0; i < m_; ++i) {
        int v = basic_[i];
        double cb = 0.0;
        if (phase1) {
          if (xb_[i] < lo_[v] - opts_.feas_tol) { cb = -1.0; any_infeasible = true; }
          else if (xb_[i] > hi_[v] + opts_.feas_tol) { cb = 1.0; any_infeasible = true; }
        } else {
          cb = cost_[v];
        }
        work_[i] = cb;
      }
      if (phase1 && !any_infeasible) return true;

      // Duals y^T = c_B^T B^-1.
      for (int j = 0; j < m_; ++j) {
        double s = 0.0;
        for (int i = 0; i < m_; ++i) s += work_[i] * binv_[std::size_t(i) * m_ + j];
        y[j] = s;
      }

      // Bland entering: smallest-index eligible nonbasic.
      int enter = -1;
      double dir = 0.0;
      for (int j = 0; j < total_; ++j) {
        if (state_[j] == kBasic) continue;
        double ya;
        if (j < n_) {
          double s = 0.0;
          for (int i = 0; i < m_; ++i) s += y[i] * a_[idx(i, j)];
          ya = s;
        } else {
          ya = -y[j - n_];
        }
        double d = (phase1 ? 0.0 : cost_[j]) - ya;
        const double tol = phase1 ? opts_.opt_tol : opts_.opt_tol * cost_scale_;
        bool up_ok, down_ok;
        if (phase1) {
          // minimizing infeasibility: improvement needs s*d < 0
          up_ok = d < -tol;
          down_ok = d > tol;
        } else {
          up_ok = d > tol;
          down_ok = d < -tol;
        }
        if (state_[j] == kAtLower && up_ok) { enter = j; dir = 1.0; break; }
        if (state_[j] == kAtUpper && down_ok) { enter = j; dir = -1.0; break; }
        if (state_[j] == kFree && (up_ok || down_ok)) { enter = j; dir = up_ok ? 1.0 : -1.0; break; }
      }
      if (enter < 0) return !phase1 || infeasibility() <= opts_.feas_tol;

      // Direction through the basis: w = B^-1 a_enter.
      aug_column(enter, col.data());
      for (int i = 0; i < m_; ++i) {
        std::span<const double> row(&binv_[std::size_t(i) * m_], std::size_t(m_));
        work_[i] = kern::dot(row, {col.data(), std::size_t(m_)});
      }

      // Ratio test with Bland tie-breaking on the leaving variable index.
      double t_max = kInf;
      int leave_pos = -1;
      double leave_to = 0.0;
      double own_range = hi_[enter] - lo_[enter];
      if (std::isfinite(own_range)) t_max = own_range;
      for (int i = 0; i < m_; ++i) {
        double delta = -dir * work_[i];  // rate of change of basic i
        if (std::fabs(delta) <= opts_.pivot_tol) continue;
        int v = basic_[i];
        double t, target;
        if (delta < 0.0) {
          // decreasing: infeasible-below basics never block on the way down
          if (xb_[i] < lo_[v] - opts_.feas_tol) continue;
          target = (xb_[i] > hi_[v] + opts_.feas_tol) ? hi_[v] : lo_[v];
          if (!std::isfinite(target)) continue;
          t = (xb_[i] - target) / (-delta);
        } else {
          if (xb_[i] > hi_[v] + opts_.feas_tol) continue;
          target = (xb_[i] < lo_[v] - opts_.feas_tol) ? lo_[v] : hi_[v];
          if (!std::isfinite(target)) continue;
          t = (target - xb_[i]) / delta;
        }
        t = std::max(t, 0.0);
        bool take = t < t_max - 1e-12;
        if (!take && t <= t_max + 1e-12 && leave_pos >= 0 && basic_[i] < basic_[leave_pos])
          take = true;  // Bland tie-break on the leaving variable index
        if (take) {
          t_max = std::min(t_max, t);
          leave_pos = i;
          leave_to = target;
        }
      }

      if (!std::isfinite(t_max)) {
        if (!phase1) { unbounded_ = true; return false; }
        throw std::runtime_error("lp: unbounded infeasibility direction");
      }

      ++iter_count;
      if (leave_pos < 0) {
        // Bound flip of the entering variable.
        state_[enter] = state_[enter] == kAtLower ? kAtUpper : kAtLower;
        val_[enter] = state_[enter] == kAtLower ? lo_[enter] : hi_[enter];
        continue;
      }

      int leave = basic_[leave_pos];
      double pivot = work_[leave_pos];
      if (std::fabs(pivot) < opts_.pivot_tol)
        throw std::runtime_error("lp: pivot element below tolerance");

      // Basis exchange and product-form update of B^-1.
      val_[enter] = val_[enter] + dir * t_max;  // entering value (informational)
      state_[leave] = (leave_to == lo_[leave]) ? kAtLower
                     : (leave_to == hi_[leave]) ? kAtUpper : kFree;
      val_[leave] = leave_to;
      in_basis_pos_[leave] = -1;
      set_basic(enter, leave_pos);

      double inv_p = 1.0 / pivot;
      std::span<double> prow(&binv_[std::size_t(leave_pos) * m_], std::size_t(m_));
      kern::scale(inv_p, prow);
      for (int i = 0; i < m_; ++i) {
        if (i == leave_pos) continue;
        double f = work_[i];
        if (f == 0.0) continue;
        kern::axpy(-f, prow, {&binv_[std::size_t(i) * m_], std::size_t(m_)});
      }
      if (++since_refactor >= 64) {
        refactorize();
        since_refactor = 0;
      }
    }
    return false;
  }

  void extract(const LinearProgram& lp, Solution& sol) {
    compute_basics();
    sol.x.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
      double v = val_[j] * col_scale_[j];
      // Clamp to the original bounds; basic values can sit a hair outside.
      v = std::min(std::max(v, lp.var_lo[j]), lp.var_hi[j]);
      if (std::fabs(v - lp.var_lo[j]) < 1e-12) v = lp.var_lo[j];
      if (std::fabs(v - lp.var_hi[j]) < 1e-12) v = lp.var_hi[j];
      sol.x[j] = v;
    }
    double obj = 0.0;
    for (int j = 0; j < n_; ++j) obj += lp.objective[j] * sol.x[j];
    sol.objective = obj;
    sol.max_violation = 0.0;
    for (const Row& r : lp.rows) {
      double act = kern::dot({r.a.data(), r.a.size()}, {sol.x.data(), sol.x.size()});
      if (act < r.lo) sol.max_violation = std::max(sol.max_violation, r.lo - act);
      if (act > r.hi) sol.max_violation = std::max(sol.max_violation, act - r.hi);
    }
  }

  SolveOptions opts_;
  double cost_scale_ = 1.0;
  int m_, n_, total_;
  std::vector<double> a_;
  std::vector<double> row_scale_, col_scale_;
  std::vector<double> cost_, lo_, hi_, val_;
  std::vector<int> state_, basic_, in_basis_pos_;
  std::vector<double> binv_, xb_, work_, rhs_;
  bool unbounded_ = false;
};

// Outward bound perturbation with index-distinct magnitudes. Breaking the
// bound ties removes the degenerate vertices that let a tolerance-driven
// pivot sequence revisit a basis; every point feasible for the original
// problem stays feasible.
LinearProgram perturbed(const LinearProgram& lp) {
  constexpr double base = 0x1p-46;
  LinearProgram out = lp;
  auto tiny = [&](int k, double lo, double hi) {
    double scale = 1.0;
    if (std::isfinite(lo)) scale = std::max(scale, std::fabs(lo));
    if (std::isfinite(hi)) scale = std::max(scale, std::fabs(hi));
    return base * scale * (1.0 + (k % 97));
  };
  for (int j = 0; j < out.num_vars; ++j) {
    const double e = tiny(j, out.var_lo[j], out.var_hi[j]);
    if (std::isfinite(out.var_lo[j])) out.var_lo[j] -= e;
    if (std::isfinite(out.var_hi[j])) out.var_hi[j] += e;
  }
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    Row& r = out.rows[i];
    const double e = tiny(out.num_vars + int(i), r.lo, r.hi);
    if (std::isfinite(r.lo)) r.lo -= e;
    if (std::isfinite(r.hi)) r.hi += e;
  }
  return out;
}

}  // namespace

Solution solve(const LinearProgram& lp, const SolveOptions& opts) {
  lp.validate();
  Solution sol;
  bool threw = false;
  try {
    Simplex sx(lp, opts);
    sol = sx.run(lp);
    if (sol.status != Status::iteration_limit) return sol;
  } catch (const std::runtime_error&) {
    threw = true;  // numerically singular basis; retry off the degenerate vertex
  }

  const LinearProgram relaxed = perturbed(lp);
  Simplex sx2(relaxed, opts);
  Solution retry = sx2.run(relaxed);
  if (retry.status != Status::optimal) {
    if (threw) throw std::runtime_error("lp: numerical failure, retry not optimal");
    return sol;
  }

  // Map the perturbed solution back onto the original bounds and report
  // objective and violation against the original problem.
  for (int j = 0; j < lp.num_vars; ++j)
    retry.x[j] = std::min(std::max(retry.x[j], lp.var_lo[j]), lp.var_hi[j]);
  double obj = 0.0;
  for (int j = 0; j < lp.num_vars; ++j) obj += lp.objective[j] * retry.x[j];
  retry.objective = obj;
  retry.max_violation = 0.0;
  for (const Row& r : lp.rows) {
    double act = kern::dot({r.a.data(), r.a.size()}, {retry.x.data(), retry.x.size()});
    if (act < r.lo) retry.max_violation = std::max(retry.max_violation, r.lo - act);
    if (act > r.hi) retry.max_violation = std::max(retry.max_violation, act - r.hi);
  }
  retry.iterations += sol.iterations;
  return retry;
}

}  // namespace tfqkd::lp
