#include "tfqkd/stats.hpp"

#include <cmath>
#include <stdexcept>

#include "tfqkd/math_util.hpp"

namespace tfqkd::stats {

double binary_entropy(double x) {
  if (!(x >= 0.0) || !(x <= 1.0)) throw std::domain_error("binary_entropy: argument outside [0,1]");
  if (x > 0.5) return 1.0;
  if (x == 0.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

namespace {

double check_tail_args(double x, double eps) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw std::domain_error("tail bound: x must be finite and >= 0");
  if (!(eps > 0.0) || !(eps < 1.0)) throw std::domain_error("tail bound: eps must be in (0,1)");
  return std::log(1.0 / eps);
}

}  // namespace

double chernoff_upper(double x, double eps) {
  double l = check_tail_args(x, eps);
  return x + std::sqrt(2.0 * x * l) + l;
}

double chernoff_lower(double x, double eps) {
  double l = check_tail_args(x, eps);
  return std::max(0.0, x - std::sqrt(2.0 * x * l));
}

double exact_poisson_upper(double x, double eps) {
  check_tail_args(x, eps);
  // Smallest mean lam with P(Poisson(lam) <= x) <= eps.
  int n = int(std::floor(x));
  double lo = x, hi = chernoff_upper(x, eps) + 1.0;
  while (poisson_cdf(hi, n) > eps) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (poisson_cdf(mid, n) > eps)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-12 * (1.0 + hi)) break;
  }
  return hi;
}

double exact_poisson_lower(double x, double eps) {
  check_tail_args(x, eps);
  if (x == 0.0) return 0.0;
  // Largest mean lam with P(Poisson(lam) >= ceil(x)) <= eps.
  int n = int(std::ceil(x));
  double lo = 0.0, hi = x;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (poisson_tail_above(mid, n - 1) > eps)
      hi = mid;
    else
      lo = mid;
    if (hi - lo < 1e-12 * (1.0 + hi)) break;
  }
  return lo;
}

void FluctuationParams::validate() const {
  if (!(gamma >= 0.0) || !(lambda >= 0.0))
    throw std::domain_error("fluctuation params: coefficients must be >= 0");
  if (!(p0 > 0.0) || !(p2 > 0.0) || !(p_mu2_even > 0.0) || p_mu2_even > 1.0)
    throw std::domain_error("fluctuation params: probabilities must be in (0,1]");
}

Fluctuation fluctuation_nu(double gamma_sum_even, double gamma_2_even,
                           const FluctuationParams& p) {
  p.validate();
  if (!(gamma_sum_even >= 0.0) || !(gamma_2_even >= 0.0))
    throw std::domain_error("fluctuation: counts must be >= 0");
  const double w2 = p.p2 * p.p2 * p.p_mu2_even;
  Fluctuation out;
  double rem = gamma_sum_even - (p.gamma / w2) * gamma_2_even;
  if (rem < 0.0) {
    rem = 0.0;
    out.clamped = true;
  }
  out.remainder = rem;
  double t1 = std::sqrt(2.0 * p.gamma * (w2 + p.gamma)) / w2 * std::sqrt(gamma_2_even);
  double t2 = std::sqrt(2.0 * (1.0 + p.lambda / (p.p0 * p.p0 * p.p_mu2_even))) * std::sqrt(rem);
  out.value = t1 + t2;
  return out;
}

PhaseErrorCountBound f_upper(double gamma_sum_even, double gamma_2_even,
                             const PhaseErrorCountParams& p, double eps) {
  if (!(eps > 0.0) || !(eps < 1.0)) throw std::domain_error("f_upper: eps must be in (0,1)");
  if (!(p.fl.lambda > 0.0)) throw std::domain_error("f_upper: lambda must be positive");
  if (!(p.p_even > 0.0) || !(p.p_mode > 0.0))
    throw std::domain_error("f_upper: probabilities must be positive");
  Fluctuation nu = fluctuation_nu(gamma_sum_even, gamma_2_even, p.fl);
  PhaseErrorCountBound out;
  out.nu = nu.value;
  out.clamped = nu.clamped;
  double pref = p.p_mode * p.p_mode * p.p_even / p.fl.lambda;
  out.f = pref * (nu.remainder + nu.value * std::sqrt(-std::log(eps / 2.0)));
  return out;
}

double compose_security(const EpsilonBudget& budget) {
  budget.validate();
  double inner = budget.epsilon + budget.epsilon_err + std::ldexp(1.0, -budget.zeta_bits);
  return std::sqrt(2.0) * std::sqrt(inner) + std::ldexp(1.0, -budget.zeta_prime_bits);
}

}  // namespace tfqkd::stats
