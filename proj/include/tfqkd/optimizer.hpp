#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "tfqkd/keyrate.hpp"
#include "tfqkd/types.hpp"

namespace tfqkd::optimizer {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Search coordinates, in order: mu, mu1, mu2, mu3, p_c, p0, p1, p2, p3.
inline constexpr int num_dims = 9;

struct SearchSpace {
  Interval mu{0.005, 0.2};
  Interval mu1{0.02, 0.6};
  Interval mu2{0.005, 0.3};
  Interval mu3{0.05, 0.8};
  Interval p_c{0.1, 0.95};
  Interval p0{0.005, 0.4};
  Interval p1{0.005, 0.4};
  Interval p2{0.005, 0.4};
  Interval p3{0.005, 0.4};
  double mu0 = 5e-4;

  std::array<Interval, num_dims> intervals() const {
    return {mu, mu1, mu2, mu3, p_c, p0, p1, p2, p3};
  }
  bool collapsed() const;
  void validate() const;
};

struct Options {
  int restarts = 8;
  int max_evaluations = 2000;
  std::uint64_t seed = 1;
  EpsilonBudget budget{};
  Prefactor prefactor = Prefactor::code_mode;
  double f_ec = 1.1;
  bool decoy_diagonal_only = false;
  bool decoy_symmetric_yields = false;
};

struct SearchFailureError : std::runtime_error {
  explicit SearchFailureError(const std::string& what, int attempted_evals)
      : std::runtime_error(what), attempted(attempted_evals) {}
  int attempted = 0;
};

struct Result {
  ProtocolParams params;
  keyrate::KeyRateResult rate;
  int evaluations = 0;
};

// Clamps a raw point into the box, rescales the five probabilities onto the
// simplex, enforces mu1 > mu2 (swap then separate by 1e-6), and shrinks the
// mu1-mu2 gap until the intensity validity window holds.
std::array<double, num_dims> feasible_projection(std::array<double, num_dims> x,
                                                 const SearchSpace& space);

// Multi-start downhill simplex over the search space, maximizing
// rate_per_pulse at the given distance and pulse count. n_tot may be
// infinity, selecting the asymptotic pipeline. Deterministic for a fixed
// options.seed.
Result optimize(const SearchSpace& space, const ChannelParams& channel, double n_tot,
                const Options& options = {});

}  // namespace tfqkd::optimizer
