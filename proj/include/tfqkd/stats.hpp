#pragma once

#include "tfqkd/types.hpp"

// Concentration bounds, the fluctuation allowance and upper bound for the
// phase-error-related count, and the security-parameter composition.

namespace tfqkd::stats {

// Binary entropy in bits on [0,1], with the convention h(x) = 1 for x > 1/2
// (the key-length formula only ever benefits from the true value below 1/2).
double binary_entropy(double x);

// Relaxed Chernoff deviation bounds for a sum of independent Bernoulli trials
// with expectation x and failure probability eps:
//   upper: x + sqrt(2 x ln(1/eps)) + ln(1/eps)
//   lower: max(0, x - sqrt(2 x ln(1/eps)))
double chernoff_upper(double x, double eps);
double chernoff_lower(double x, double eps);

// Exact Poisson-quantile inversions (bisection on the regularized gamma
// function); tighter than the relaxed forms, available where sharpness
// matters more than closed-form simplicity.
double exact_poisson_upper(double x, double eps);
double exact_poisson_lower(double x, double eps);

// Inputs to the fluctuation allowance: the dominance coefficients and the
// probabilities tied to the subtracted intensity.
struct FluctuationParams {
  double gamma = 0.0;        // subtraction coefficient
  double lambda = 0.0;       // dominance coefficient
  double p0 = 0.0;           // near-vacuum test probability
  double p2 = 0.0;           // probability of the subtracted intensity
  double p_mu2_even = 0.0;   // even-parity weight of the subtracted intensity

  void validate() const;
};

struct Fluctuation {
  double value = 0.0;      // nu
  double remainder = 0.0;  // gamma_sum - (Gamma / (p2^2 p_mu2_even)) gamma_2, clamped
  bool clamped = false;
};

// Two-term square-root fluctuation allowance entering the phase-error bound.
Fluctuation fluctuation_nu(double gamma_sum_even, double gamma_2_even,
                           const FluctuationParams& p);

struct PhaseErrorCountParams {
  FluctuationParams fl;
  double p_even = 0.0;      // even-parity weight of the code intensity
  double p_mode = 0.0;      // probability entering the prefactor (p_c or p0)
};

struct PhaseErrorCountBound {
  double f = 0.0;
  double nu = 0.0;
  bool clamped = false;
};

// Upper bound, failing with probability at most eps, on the number of
// detected even-parity code rounds:
//   f = (p_mode^2 p_even / Lambda) (remainder + nu sqrt(-ln(eps/2))).
PhaseErrorCountBound f_upper(double gamma_sum_even, double gamma_2_even,
                             const PhaseErrorCountParams& p, double eps);

// eps_sec = sqrt(2) sqrt(eps + eps_err + 2^-zeta) + 2^-zeta'.
double compose_security(const EpsilonBudget& budget);

}  // namespace tfqkd::stats
