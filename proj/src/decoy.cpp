#include "tfqkd/decoy.hpp"

#include <cmath>
#include <stdexcept>

#include "tfqkd/math_util.hpp"
#include "tfqkd/stats.hpp"

namespace tfqkd::decoy {

namespace {

double poisson_pmf(double mu, int n) {
  if (mu == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(-mu + n * std::log(mu) - log_factorial(n));
}

// Even-total-photon mass with total photon number >= 6 for a matched pair of
// intensity mu: the total is Poisson(2*mu), restricted to even values.
double even_tail_mass(double mu) {
  const double lam = 2.0 * mu;
  double acc = 0.0;
  for (int k = 3; k < 200; ++k) {
    const double t = std::exp(-lam + 2.0 * k * std::log(lam) - log_factorial(2 * k));
    acc += t;
    if (t < 1e-22 * (acc + 1e-300)) break;
  }
  return lam > 0.0 ? acc : 0.0;
}

}  // namespace

Layout make_layout(const Options& opts) {
  Layout lay;
  for (int j = 0; j <= max_order; ++j)
    for (int m = 0; m + j <= max_order; ++m) {
      if (opts.symmetric_yields && m < j) continue;
      lay.yields.emplace_back(j, m);
    }
  lay.num_rows = opts.diagonal_only ? 4 : 16;
  lay.slack_base = int(lay.yields.size());
  return lay;
}

Options options_for(const ProtocolParams& p, bool asymptotic) {
  Options o;
  o.asymptotic = asymptotic;
  o.diagonal_only = p.decoy_diagonal_only;
  o.symmetric_yields = p.decoy_symmetric_yields;
  o.eps_each = asymptotic ? 0.0 : p.budget.epsilon_err / failure_events;
  return o;
}

lp::LinearProgram build_program(const ProtocolParams& p, const ObservedCounts& counts,
                                bool maximize_sum, const Options& opts) {
  if (!opts.asymptotic && !(opts.eps_each > 0.0 && opts.eps_each < 1.0))
    throw ConfigError("decoy estimation: bad per-event failure probability");
  const Layout lay = make_layout(opts);
  const int ny = int(lay.yields.size());
  const int nv = ny + lay.num_rows;

  lp::LinearProgram prog;
  prog.sense = maximize_sum ? lp::LinearProgram::Sense::maximize
                            : lp::LinearProgram::Sense::minimize;
  prog.num_vars = nv;
  prog.objective.assign(nv, 0.0);
  prog.var_lo.assign(nv, 0.0);
  prog.var_hi.assign(nv, 1.0);

  // Objective: even-total-photon detection count on the mean scale.
  for (int v = 0; v < ny; ++v) {
    auto [j, m] = lay.yields[v];
    if ((j + m) % 2 != 0) continue;
    double c = 0.0;
    auto add_pair = [&](int a) {
      const double mu = p.mu_test[a];
      double w = poisson_pmf(mu, j) * poisson_pmf(mu, m);
      if (opts.symmetric_yields && j != m) w += poisson_pmf(mu, m) * poisson_pmf(mu, j);
      c += counts.trials[a][a] * w;
    };
    if (maximize_sum) {
      add_pair(0);
      add_pair(1);
    } else {
      add_pair(2);
    }
    prog.objective[v] = c;
  }

  // One row per intensity pair: low-order expected count plus tail slack,
  // boxed by the statistical interval around the observation.
  int row_index = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      if (opts.diagonal_only && a != b) continue;
      lp::Row row;
      row.a.assign(nv, 0.0);
      const double mu_a = p.mu_test[a], mu_b = p.mu_test[b];
      const double trials = counts.trials[a][b];
      for (int v = 0; v < ny; ++v) {
        auto [j, m] = lay.yields[v];
        double w = poisson_pmf(mu_a, j) * poisson_pmf(mu_b, m);
        if (opts.symmetric_yields && j != m) w += poisson_pmf(mu_a, m) * poisson_pmf(mu_b, j);
        row.a[v] = trials * w;
      }
      row.a[lay.slack_base + row_index] = 1.0;

      const double tail_mean = trials * poisson_tail_above(mu_a + mu_b, max_order);
      const double cap = opts.asymptotic
                             ? tail_mean
                             : stats::chernoff_upper(tail_mean, opts.eps_each);
      prog.var_hi[lay.slack_base + row_index] = cap;

      const double g = counts.gamma[a][b];
      if (opts.asymptotic) {
        row.lo = g;
        row.hi = g;
      } else {
        row.lo = stats::chernoff_lower(g, opts.eps_each);
        row.hi = stats::chernoff_upper(g, opts.eps_each);
      }
      prog.rows.push_back(std::move(row));
      ++row_index;
    }
  return prog;
}

namespace {

lp::Solution solve_or_throw(const lp::LinearProgram& prog) {
  lp::Solution sol = lp::solve(prog);
  if (sol.status == lp::Status::infeasible)
    throw InconsistentCountsError(
        "observed counts admit no photon-pair yield assignment");
  if (sol.status != lp::Status::optimal)
    throw std::runtime_error(std::string("yield estimation solve failed: ") +
                             lp::to_string(sol.status));
  return sol;
}

}  // namespace

Bounds estimate(const ProtocolParams& p, const ObservedCounts& counts,
                const Options& opts) {
  counts.validate();
  lp::Solution up = solve_or_throw(build_program(p, counts, true, opts));
  lp::Solution dn = solve_or_throw(build_program(p, counts, false, opts));

  Bounds out;
  out.lp_max = up.objective;
  out.lp_min = dn.objective;
  out.iterations = up.iterations + dn.iterations;

  double tail = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double mean = counts.trials[i][i] * even_tail_mass(p.mu_test[i]);
    tail += opts.asymptotic ? mean : stats::chernoff_upper(mean, opts.eps_each);
  }
  if (opts.asymptotic) {
    out.gamma_sum_upper = out.lp_max + tail;
    out.gamma_2_lower = std::max(0.0, out.lp_min);
  } else {
    out.gamma_sum_upper = stats::chernoff_upper(out.lp_max, opts.eps_each) + tail;
    out.gamma_2_lower = stats::chernoff_lower(out.lp_min, opts.eps_each);
  }
  return out;
}

}  // namespace tfqkd::decoy
