#include "tfqkd/fock.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tfqkd/math_util.hpp"

namespace tfqkd::fock {

namespace {

void check_mu(double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw std::domain_error("intensity must be finite and >= 0");
}

void check_cutoff(int cutoff) {
  if (cutoff < 2 || cutoff % 2 != 0)
    throw std::invalid_argument("cutoff must be an even integer >= 2");
}

}  // namespace

double p_even(double mu) {
  check_mu(mu);
  // e^{-2mu} cosh(2mu) = (1 + e^{-4mu}) / 2, stable for all mu.
  return 0.5 * (1.0 + std::exp(-4.0 * mu));
}

double p_odd(double mu) {
  check_mu(mu);
  return 0.5 * (1.0 - std::exp(-4.0 * mu));
}

double log_coherent_pair_weight(double mu_a, double mu_b, int j, int m) {
  check_mu(mu_a);
  check_mu(mu_b);
  if (j < 0 || m < 0) throw std::domain_error("photon numbers must be >= 0");
  // 0^0 = 1 convention for vacuum intensities.
  if (mu_a == 0.0 && j > 0) return -std::numeric_limits<double>::infinity();
  if (mu_b == 0.0 && m > 0) return -std::numeric_limits<double>::infinity();
  double lt = -(mu_a + mu_b);
  if (j > 0) lt += j * std::log(mu_a);
  if (m > 0) lt += m * std::log(mu_b);
  return lt - log_factorial(j) - log_factorial(m);
}

double coherent_pair_weight(double mu_a, double mu_b, int j, int m) {
  return std::exp(log_coherent_pair_weight(mu_a, mu_b, j, m));
}

double FockDiagonal::total() const {
  double s = 0.0;
  for (const auto& [jm, w] : entries) s += w;
  return s;
}

double FockDiagonal::at(int j, int m) const {
  auto it = entries.find({j, m});
  return it == entries.end() ? 0.0 : it->second;
}

ParitySplit split_even_odd(double mu, int cutoff) {
  check_mu(mu);
  check_cutoff(cutoff);
  ParitySplit out;
  out.even.cutoff = cutoff;
  out.odd.cutoff = cutoff;
  out.p_even = p_even(mu);
  out.p_odd = p_odd(mu);
  double kept_even = 0.0, kept_odd = 0.0;
  for (int n = 0; n <= cutoff; ++n) {
    for (int j = 0; j <= n; ++j) {
      double w = coherent_pair_weight(mu, mu, j, n - j);
      if (n % 2 == 0) {
        out.even.entries[{j, n - j}] = w;
        kept_even += w;
      } else {
        out.odd.entries[{j, n - j}] = w;
        kept_odd += w;
      }
    }
  }
  out.even.tail_mass = std::max(0.0, out.p_even - kept_even);
  out.odd.tail_mass = std::max(0.0, out.p_odd - kept_odd);
  return out;
}

std::vector<std::pair<int, int>> even_basis(int cutoff) {
  check_cutoff(cutoff);
  std::vector<std::pair<int, int>> basis;
  for (int j = 0; j <= cutoff; ++j)
    for (int m = (j % 2 == 0) ? 0 : 1; j + m <= cutoff; m += 2) basis.emplace_back(j, m);
  return basis;
}

EvenSectorState rho_even(double mu, int cutoff) {
  check_mu(mu);
  check_cutoff(cutoff);
  EvenSectorState st;
  st.mu = mu;
  st.cutoff = cutoff;
  st.p_even = p_even(mu);
  st.basis = even_basis(cutoff);
  const int dim = int(st.basis.size());

  // Amplitudes <j,m|sqrt(mu),sqrt(mu)> on the even-total basis. Projecting the
  // pure product state onto the both-even and both-odd photon sectors and
  // summing the two outer products gives the unnormalized even-parity state,
  // which has rank <= 2.
  Eigen::VectorXd v_ee = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd v_oo = Eigen::VectorXd::Zero(dim);
  for (int i = 0; i < dim; ++i) {
    auto [j, m] = st.basis[i];
    double la = -mu - 0.5 * (log_factorial(j) + log_factorial(m));
    if (j + m > 0) {
      if (mu == 0.0) continue;
      la += 0.5 * (j + m) * std::log(mu);
    }
    double amp = std::exp(la);
    if (j % 2 == 0 && m % 2 == 0)
      v_ee[i] = amp;
    else if (j % 2 == 1 && m % 2 == 1)
      v_oo[i] = amp;
  }
  st.weighted = v_ee * v_ee.transpose() + v_oo * v_oo.transpose();
  st.trace_deficit = st.p_even - st.weighted.trace();
  st.truncation_warning = st.trace_deficit > 1e-12;
  return st;
}

}  // namespace tfqkd::fock
