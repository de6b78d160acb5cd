#pragma once

// Shared test helpers: a brute-force vertex-enumeration oracle for small
// bounded-variable linear programs, a seeded instance generator, and a
// subprocess runner for the CLI tests.

#include <sys/wait.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "tfqkd/lp.hpp"

namespace testsupport {

struct OracleResult {
  bool feasible = false;
  double objective = 0.0;
  std::vector<double> x;
};

// Brute-force LP optimum by vertex enumeration. Every variable bound must be
// finite, so a nonempty feasible region is a polytope and its optimum sits on
// a vertex defined by n active constraints; enumerating all n-subsets of
// constraint groups (each group contributes its lower or upper side) visits
// every vertex. No feasible vertex means the region is empty.
inline OracleResult brute_force_lp(const tfqkd::lp::LinearProgram& lp,
                                   double feas_tol = 1e-7) {
  const int n = lp.num_vars;
  const int m = static_cast<int>(lp.rows.size());
  const int groups = n + m;

  auto group_row = [&](int g, Eigen::VectorXd& out) {
    out.setZero(n);
    if (g < n) {
      out[g] = 1.0;
    } else {
      for (int j = 0; j < n; ++j) out[j] = lp.rows[g - n].a[j];
    }
  };
  auto group_bound = [&](int g, bool upper) {
    if (g < n) return upper ? lp.var_hi[g] : lp.var_lo[g];
    return upper ? lp.rows[g - n].hi : lp.rows[g - n].lo;
  };
  auto feasible_at = [&](const Eigen::VectorXd& x) {
    for (int j = 0; j < n; ++j)
      if (x[j] < lp.var_lo[j] - feas_tol || x[j] > lp.var_hi[j] + feas_tol) return false;
    for (const auto& row : lp.rows) {
      double v = 0.0;
      for (int j = 0; j < n; ++j) v += row.a[j] * x[j];
      if (v < row.lo - feas_tol || v > row.hi + feas_tol) return false;
    }
    return true;
  };

  const bool maximize = lp.sense == tfqkd::lp::LinearProgram::Sense::maximize;
  OracleResult best;
  std::vector<int> pick(n);
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd b(n), row(n);

  auto visit = [&]() {
    for (int mask = 0; mask < (1 << n); ++mask) {
      bool ok = true;
      for (int i = 0; i < n && ok; ++i) {
        const bool upper = (mask >> i) & 1;
        const double bound = group_bound(pick[i], upper);
        if (!std::isfinite(bound)) {
          ok = false;
          break;
        }
        group_row(pick[i], row);
        A.row(i) = row.transpose();
        b[i] = bound;
      }
      if (!ok) continue;
      Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
      if (!lu.isInvertible()) continue;
      Eigen::VectorXd x = lu.solve(b);
      if (!x.allFinite() || !feasible_at(x)) continue;
      double obj = 0.0;
      for (int j = 0; j < n; ++j) obj += lp.objective[j] * x[j];
      if (!best.feasible || (maximize ? obj > best.objective : obj < best.objective)) {
        best.feasible = true;
        best.objective = obj;
        best.x.assign(x.data(), x.data() + n);
      }
    }
  };

  // All n-subsets of the constraint groups.
  std::vector<int> stack;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(stack.size()) == n) {
      for (int i = 0; i < n; ++i) pick[i] = stack[i];
      visit();
      return;
    }
    for (int g = start; g < groups; ++g) {
      stack.push_back(g);
      self(self, g + 1);
      stack.pop_back();
    }
  };
  rec(rec, 0);
  return best;
}

// Seeded random instance: 2..6 variables with finite box bounds, 1..4 range
// rows built around an interior point so most instances are feasible; with
// probability ~1/5 a contradictory row pair makes the region provably empty.
inline tfqkd::lp::LinearProgram random_lp(std::mt19937_64& rng) {
  using tfqkd::lp::LinearProgram;
  std::uniform_int_distribution<int> nd(2, 6), md(1, 4);
  std::uniform_real_distribution<double> coef(-2.0, 2.0), unit(0.0, 1.0);

  LinearProgram lp;
  lp.sense = unit(rng) < 0.5 ? LinearProgram::Sense::maximize : LinearProgram::Sense::minimize;
  lp.num_vars = nd(rng);
  const int m = md(rng);
  lp.objective.resize(lp.num_vars);
  lp.var_lo.resize(lp.num_vars);
  lp.var_hi.resize(lp.num_vars);

  std::vector<double> x0(lp.num_vars);
  for (int j = 0; j < lp.num_vars; ++j) {
    lp.objective[j] = coef(rng);
    lp.var_lo[j] = coef(rng);
    lp.var_hi[j] = lp.var_lo[j] + 3.0 * unit(rng);
    x0[j] = lp.var_lo[j] + unit(rng) * (lp.var_hi[j] - lp.var_lo[j]);
  }
  for (int i = 0; i < m; ++i) {
    tfqkd::lp::Row row;
    row.a.resize(lp.num_vars);
    double v = 0.0;
    for (int j = 0; j < lp.num_vars; ++j) {
      row.a[j] = coef(rng);
      v += row.a[j] * x0[j];
    }
    row.lo = v - 2.0 * unit(rng);
    row.hi = v + 2.0 * unit(rng);
    lp.rows.push_back(row);
  }
  if (unit(rng) < 0.2) {
    // Same left-hand side, disjoint windows: no x satisfies both.
    tfqkd::lp::Row a = lp.rows[0], b = lp.rows[0];
    double v = 0.0;
    for (int j = 0; j < lp.num_vars; ++j) v += a.a[j] * x0[j];
    a.lo = v + 1.0;
    a.hi = v + 2.0;
    b.lo = v - 2.0;
    b.hi = v - 1.0;
    lp.rows.push_back(a);
    lp.rows.push_back(b);
  }
  return lp;
}

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr merged
};

inline CommandResult run_command(const std::string& cmd) {
  CommandResult r;
  const std::string full = cmd + " 2>&1";
  FILE* pipe = popen(full.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  size_t got = 0;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, got);
  const int status = pclose(pipe);
  if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  return r;
}

}  // namespace testsupport
