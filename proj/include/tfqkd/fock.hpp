#pragma once

#include <Eigen/Dense>
#include <map>
#include <utility>
#include <vector>

// Photon-number-pair decompositions of phase-randomized two-arm coherent
// sources, restricted to even total photon number, and the rank-2 even-sector
// state of the unrandomized source.

namespace tfqkd::fock {

// Probability that a pair of independent intensity-mu coherent pulses carries
// an even / odd total photon number: e^{-2mu} cosh(2mu), e^{-2mu} sinh(2mu).
double p_even(double mu);
double p_odd(double mu);

// log of the joint photon-number weight e^{-(mu_a+mu_b)} mu_a^j mu_b^m /(j! m!).
double log_coherent_pair_weight(double mu_a, double mu_b, int j, int m);
double coherent_pair_weight(double mu_a, double mu_b, int j, int m);

// Diagonal operator in the photon-pair basis, truncated at j+m <= cutoff.
// tail_mass is the probability weight dropped by the truncation.
struct FockDiagonal {
  std::map<std::pair<int, int>, double> entries;
  int cutoff = 0;
  double tail_mass = 0.0;

  double total() const;
  double at(int j, int m) const;  // 0 for absent entries
};

struct ParitySplit {
  FockDiagonal even;
  FockDiagonal odd;
  double p_even = 0.0;  // exact closed-form, not the truncated sum
  double p_odd = 0.0;
};

// Splits the intensity-mu pair source by total-photon parity.
ParitySplit split_even_odd(double mu, int cutoff);

// Photon pairs (j, m) with j+m even and j+m <= cutoff, lexicographic.
std::vector<std::pair<int, int>> even_basis(int cutoff);

// Unnormalized even-parity component of the joint source state, expressed in
// the even_basis ordering. The matrix is p_even * rho_even: a sum of two
// outer products (both-even and both-odd photon-number sectors), trace equal
// to p_even up to the truncation deficit.
struct EvenSectorState {
  double mu = 0.0;
  int cutoff = 0;
  double p_even = 0.0;
  std::vector<std::pair<int, int>> basis;
  Eigen::MatrixXd weighted;    // p_even * rho_even on the truncated basis
  double trace_deficit = 0.0;  // p_even - trace(weighted)
  bool truncation_warning = false;  // deficit above 1e-12
};

EvenSectorState rho_even(double mu, int cutoff);

}  // namespace tfqkd::fock
