#pragma once

#include <string>
#include <vector>

// Dense bounded-variable simplex for small range-constrained linear programs
//
//   max / min  c^T x   s.t.   lo_i <= (A x)_i <= hi_i,   l_j <= x_j <= u_j.
//
// Two-phase, Bland's rule throughout (no cycling), explicit basis inverse
// with periodic refactorization, geometric-mean row/column equilibration.
// Bit-for-bit deterministic for identical inputs on one platform.

namespace tfqkd::lp {

struct Row {
  std::vector<double> a;
  double lo = 0.0;
  double hi = 0.0;
};

struct LinearProgram {
  enum class Sense { maximize, minimize };
  Sense sense = Sense::maximize;
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<double> var_lo, var_hi;
  std::vector<Row> rows;

  void validate() const;
};

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Solution {
  Status status = Status::iteration_limit;
  double objective = 0.0;
  std::vector<double> x;
  int iterations = 0;
  double max_violation = 0.0;  // worst constraint violation after clamping
};

const char* to_string(Status s);

struct SolveOptions {
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  double pivot_tol = 1e-10;
  int max_iterations = 20000;
  bool equilibrate = true;
};

Solution solve(const LinearProgram& lp, const SolveOptions& opts = {});

}  // namespace tfqkd::lp
