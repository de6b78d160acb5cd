#include "tfqkd/dominance.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <vector>

#include "tfqkd/fock.hpp"
#include "tfqkd/kernels.hpp"
#include "tfqkd/math_util.hpp"
#include "tfqkd/types.hpp"

namespace tfqkd::dominance {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_config(const IntensityConfig& c) {
  if (!(c.p0 > 0.0) || !(c.p1 > 0.0)) throw ConfigError("test probabilities must be positive");
  if (!(c.mu0 >= 0.0) || !(c.mu2 > 0.0) || !(c.mu1 > c.mu2))
    throw ConfigError("intensities must satisfy mu0 >= 0, mu1 > mu2 > 0");
  if (!(c.mu >= 0.0)) throw ConfigError("code intensity must be >= 0");
}

double q_with_gamma(int n, const IntensityConfig& c, double gamma) {
  if (n < 0) throw std::domain_error("photon number must be >= 0");
  if (n % 2 == 1) return 0.0;
  double t0 = c.p0 * c.p0 * std::exp(-2.0 * c.mu0) * std::pow(c.mu0, n);
  double t1 = c.p1 * c.p1 * std::exp(-2.0 * c.mu1) * std::pow(c.mu1, n);
  double t2 = gamma * std::exp(-2.0 * c.mu2) * std::pow(c.mu2, n);
  return t0 + t1 - t2;
}

}  // namespace

ValidityCheck check_validity(const IntensityConfig& c) {
  check_config(c);
  ValidityCheck v;
  v.ratio = (c.mu1 - c.mu2) / c.mu2;
  v.bound = (c.p0 * c.p0 * std::exp(-2.0 * c.mu0)) / (c.p1 * c.p1 * std::exp(-2.0 * c.mu1));
  v.valid = v.ratio > 0.0 && v.ratio < v.bound;
  return v;
}

double gamma_coefficient(double p1, double mu1, double mu2) {
  if (!(p1 > 0.0) || !(mu2 > 0.0) || !(mu1 > mu2))
    throw ConfigError("gamma coefficient requires p1 > 0 and mu1 > mu2 > 0");
  return p1 * p1 * mu1 * std::exp(-2.0 * mu1) / (mu2 * std::exp(-2.0 * mu2));
}

double q_coefficient(int n, const IntensityConfig& c) {
  check_config(c);
  return q_with_gamma(n, c, gamma_coefficient(c.p1, c.mu1, c.mu2));
}

double q_lower(int n, const IntensityConfig& c) {
  check_config(c);
  if (n < 0) throw std::domain_error("photon number must be >= 0");
  if (n % 2 == 1) return 0.0;
  if (n == 0) return q_coefficient(0, c);
  // With Gamma at its chosen value the mu2 term cancels against the mu1 term:
  // q'_n = p1^2 mu1 e^{-2 mu1} (mu1^{n-1} - mu2^{n-1}).
  return c.p1 * c.p1 * c.mu1 * std::exp(-2.0 * c.mu1) *
         (std::pow(c.mu1, n - 1) - std::pow(c.mu2, n - 1));
}

Coefficients compute_coefficients(const IntensityConfig& c, double rel_tol) {
  ValidityCheck v = check_validity(c);
  if (!v.valid)
    throw ConfigError("intensity configuration violates the dominance validity window");
  if (c.mu >= c.mu1)
    throw SeriesDivergence("code intensity must stay below mu1 for the series to converge");

  Coefficients out;
  out.gamma = gamma_coefficient(c.p1, c.mu1, c.mu2);
  out.q0 = q_lower(0, c);

  const double log_mu = c.mu > 0.0 ? std::log(c.mu) : -kInf;
  const double log_base = std::log(c.p1 * c.p1 * c.mu1) - 2.0 * c.mu1;
  const double r21 = c.mu2 / c.mu1;
  const double rho = (c.mu * c.mu) / (c.mu1 * c.mu1);

  // S = 1/q0 + sum_{k>=1} (k+1) mu^{2k} / q'_{2k}, with a certified geometric
  // remainder from q'_{2k} >= p1^2 e^{-2mu1} mu1^{2k} (1 - mu2/mu1).
  double partial = 1.0 / out.q0;
  int terms = 1;
  double remainder = kInf;
  if (c.mu > 0.0) {
    const double tail_scale = 1.0 / (c.p1 * c.p1 * std::exp(-2.0 * c.mu1) * (1.0 - r21));
    for (int k = 1; k <= 100000; ++k) {
      double log_q = log_base + (2.0 * k - 1.0) * std::log(c.mu1) +
                     std::log1p(-std::pow(r21, 2 * k - 1));
      double term = (k + 1.0) * std::exp(2.0 * k * log_mu - log_q);
      partial += term;
      ++terms;
      remainder = tail_scale * std::pow(rho, k + 1) *
                  ((k + 2.0) - (k + 1.0) * rho) / ((1.0 - rho) * (1.0 - rho));
      if (remainder < rel_tol * partial) break;
    }
    if (!(remainder < rel_tol * partial))
      throw SeriesDivergence("coefficient series failed to converge");
    partial += remainder;  // upper bound on the series keeps Lambda admissible
  } else {
    remainder = 0.0;
  }
  out.series_value = partial;
  out.series_terms = terms;
  out.lambda = fock::p_even(c.mu) / partial;

  // Alternative closed form for the same quantity; evaluated for the
  // consistency diagnostic only.
  {
    double s15 = std::exp(-2.0 * c.mu) / out.q0;
    if (c.mu > 0.0) {
      double pref = std::exp(-2.0 * c.mu) / (c.p1 * c.p1 * c.mu1 * std::exp(-2.0 * c.mu1));
      for (int k = 1; k <= 100000; ++k) {
        double log_d = 2.0 * k * std::log(c.mu1) + std::log1p(-std::pow(r21, 2 * k));
        double term = pref * (k + 1.0) * std::exp(2.0 * k * log_mu - log_d);
        s15 += term;
        if (term < 1e-16 * s15 && k > 4) break;
      }
    }
    double lambda_alt = fock::p_even(c.mu) / s15;
    out.alt_form_mismatch = std::fabs(lambda_alt - out.lambda) / out.lambda;
    out.alt_form_flagged = out.alt_form_mismatch > 1e-8;
  }
  return out;
}

namespace {

enum class Sector { even_even, odd_odd };

SectorResult verify_sector(const IntensityConfig& c, const Coefficients& coeffs, int cutoff,
                           Sector sector) {
  // Basis: photon pairs (k, k') of equal parity with k + k' <= cutoff.
  std::vector<std::pair<int, int>> basis;
  int start = sector == Sector::even_even ? 0 : 1;
  for (int k = start; k <= cutoff; k += 2)
    for (int m = start; k + m <= cutoff; m += 2) basis.emplace_back(k, m);

  const int dim = int(basis.size());
  SectorResult res;
  res.dim = dim;
  if (dim == 0) {
    res.pass = true;
    return res;
  }

  const double pe = fock::p_even(c.mu);
  std::vector<double> v(dim, 0.0), diag(dim, 0.0);
  for (int i = 0; i < dim; ++i) {
    auto [k, m] = basis[i];
    double lf = log_factorial(k) + log_factorial(m);
    diag[i] = q_with_gamma(k + m, c, coeffs.gamma) * std::exp(-lf);
    if (c.mu > 0.0)
      v[i] = std::exp(-c.mu + 0.5 * (k + m) * std::log(c.mu) - 0.5 * lf);
    else
      v[i] = (k + m == 0) ? 1.0 : 0.0;
  }

  // M = p_even * diag(q_n / (k! k'!)) - Lambda v v^T, assembled row by row.
  std::vector<double> mat(std::size_t(dim) * dim, 0.0);
  for (int i = 0; i < dim; ++i) {
    std::span<double> row(mat.data() + std::size_t(i) * dim, dim);
    kern::axpy(-coeffs.lambda * v[i], v, row);
    row[i] += pe * diag[i];
  }

  Eigen::Map<Eigen::MatrixXd> m_map(mat.data(), dim, dim);
  Eigen::MatrixXd sym = 0.5 * (m_map + m_map.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  res.min_eigenvalue = es.eigenvalues().minCoeff();

  // Mass of |sqrt(mu),sqrt(mu)> beyond the truncation, used to bound the
  // effect of the discarded rows/columns of the rank-one part.
  double tail_p = c.mu > 0.0 ? poisson_tail_above(2.0 * c.mu, cutoff) : 0.0;
  res.tail_bound = coeffs.lambda * (tail_p + 2.0 * std::sqrt(tail_p));
  res.pass = res.min_eigenvalue >= -(res.tail_bound + 1e-12);
  return res;
}

}  // namespace

DominanceReport verify_dominance(const IntensityConfig& c, int cutoff,
                                 std::optional<Coefficients> override_coeffs) {
  check_config(c);
  if (cutoff < 4 || cutoff % 2 != 0)
    throw std::invalid_argument("cutoff must be an even integer >= 4");

  DominanceReport rep;
  rep.cutoff = cutoff;
  rep.coeffs = override_coeffs ? *override_coeffs : compute_coefficients(c);

  rep.even_even = verify_sector(c, rep.coeffs, cutoff, Sector::even_even);
  rep.odd_odd = verify_sector(c, rep.coeffs, cutoff, Sector::odd_odd);

  rep.q_min = kInf;
  for (int n = 0; n <= cutoff; n += 2)
    rep.q_min = std::min(rep.q_min, q_with_gamma(n, c, rep.coeffs.gamma));
  rep.q_nonnegative = rep.q_min >= -1e-18;

  // Scalar route: the sector blocks are diagonal-plus-rank-one, so positivity
  // is equivalent to the norm series staying below p_even / Lambda.
  const double pe = fock::p_even(c.mu);
  double s_ee = 0.0, s_oo = 0.0;
  bool series_ok = true;
  if (c.mu > 0.0) {
    const double log_mu2 = 2.0 * std::log(c.mu);
    double prev = kInf;
    int k = 0;
    for (; k <= 100000; ++k) {
      double q = q_with_gamma(2 * k, c, rep.coeffs.gamma);
      if (!(q > 0.0)) {
        series_ok = false;
        break;
      }
      double kern_term = std::exp(-2.0 * c.mu + k * log_mu2 - std::log(q));
      s_ee += (k + 1.0) * kern_term;
      s_oo += double(k) * kern_term;
      if (k > 20 && (k + 1.0) * kern_term < 1e-16 * s_ee && prev < 1e-16 * s_ee) break;
      prev = (k + 1.0) * kern_term;
    }
    if (k > 100000) series_ok = false;
  } else {
    double q0v = q_with_gamma(0, c, rep.coeffs.gamma);
    if (q0v > 0.0)
      s_ee = 1.0 / q0v;
    else
      series_ok = false;
  }
  rep.series_even = s_ee;
  rep.series_odd = s_oo;
  rep.series_limit = rep.coeffs.lambda > 0.0 ? pe / rep.coeffs.lambda : kInf;
  rep.series_pass = series_ok && s_ee < rep.series_limit && s_oo < rep.series_limit;

  rep.eigen_pass = rep.even_even.pass && rep.odd_odd.pass;
  rep.pass = rep.eigen_pass && rep.series_pass && rep.q_nonnegative;
  return rep;
}

}  // namespace tfqkd::dominance
