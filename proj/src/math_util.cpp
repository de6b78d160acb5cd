#include "tfqkd/math_util.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace tfqkd {

double log_factorial(int n) {
  if (n < 0) throw std::domain_error("log_factorial: negative argument");
  static const auto cache = [] {
    std::array<double, 256> t{};
    for (int i = 0; i < 256; ++i) t[i] = std::lgamma(double(i) + 1.0);
    return t;
  }();
  if (n < 256) return cache[n];
  return std::lgamma(double(n) + 1.0);
}

namespace {

// Series expansion of P(a,x), good for x < a+1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int i = 0; i < 10000; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a,x), good for x >= a+1.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    double an = -double(i) * (double(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::domain_error("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::domain_error("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double poisson_cdf(double lambda, int n) {
  if (lambda < 0.0) throw std::domain_error("poisson_cdf: negative mean");
  if (n < 0) return 0.0;
  if (lambda == 0.0) return 1.0;
  return gamma_q(double(n) + 1.0, lambda);
}

double poisson_tail_above(double lambda, int n) {
  if (lambda < 0.0) throw std::domain_error("poisson_tail_above: negative mean");
  if (n < 0) return 1.0;
  if (lambda == 0.0) return 0.0;
  return gamma_p(double(n) + 1.0, lambda);
}

}  // namespace tfqkd
