#pragma once

#include <cstdint>

// Shared numeric helpers: log-factorials and regularized incomplete gamma
// functions (used for Poisson tail masses and exact Chernoff inversion).

namespace tfqkd {

// ln(n!) with a small cache for the range the Fock truncations use.
double log_factorial(int n);

// Regularized lower/upper incomplete gamma P(a,x), Q(a,x), a > 0, x >= 0.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// For X ~ Poisson(lambda): P(X <= n) and P(X > n).
double poisson_cdf(double lambda, int n);
double poisson_tail_above(double lambda, int n);

}  // namespace tfqkd
