#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace tfqkd {

// Thrown for invalid parameters, malformed config files and malformed count
// tables. The CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when the yield estimation LP has an empty feasible region, i.e. the
// observed counts are inconsistent with the photon-number model at the
// configured failure budget. CLI exit code 3.
struct InconsistentCountsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Failure-probability budget for one protocol evaluation.
//
//   epsilon      : failure probability of the phase-error count bound f
//   epsilon_err  : total failure probability of the count estimation layer
//   zeta_bits    : hash-comparison cost, contributes 2^-zeta to secrecy
//   zeta_prime_bits : correctness cost, contributes 2^-zeta' to eps_sec
struct EpsilonBudget {
  double epsilon = std::ldexp(1.0, -69);
  double epsilon_err = 2.60e-20;
  int zeta_bits = 69;
  int zeta_prime_bits = 32;

  void validate() const {
    if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw ConfigError("epsilon must be in (0,1)");
    if (!(epsilon_err > 0.0) || !(epsilon_err < 1.0))
      throw ConfigError("epsilon_err must be in (0,1)");
    if (zeta_bits < 1 || zeta_prime_bits < 1)
      throw ConfigError("zeta and zeta_prime must be positive bit counts");
  }
};

// Which mode probability multiplies the phase-error count bound: the signal
// (code) mode probability p_c, or the near-vacuum test probability p0.
enum class Prefactor { code_mode, vacuum_test };

// Source-side protocol parameters. Intensity index 0 is the near-vacuum test
// state; indices 1 and 2 are the pair entering the dominance coefficients
// (mu1 > mu2 required); index 3 is a free extra decoy.
struct ProtocolParams {
  double mu = 0.02;                                // code-mode intensity
  std::array<double, 4> mu_test{5e-4, 0.075, 0.05, 0.2};
  double p_c = 0.5;                                // per-party code probability
  std::array<double, 4> p_test{0.18, 0.12, 0.1, 0.1};
  double n_tot = 1e12;                             // total rounds; +inf = asymptotic
  EpsilonBudget budget{};
  Prefactor prefactor = Prefactor::code_mode;
  bool decoy_diagonal_only = false;                // restrict LP to matched pairs
  bool decoy_symmetric_yields = false;             // tie Y_jm = Y_mj in the LP

  bool asymptotic() const { return std::isinf(n_tot); }

  void validate() const {
    budget.validate();
    if (!(mu >= 0.0)) throw ConfigError("mu must be >= 0");
    for (double m : mu_test)
      if (!(m >= 0.0)) throw ConfigError("test intensities must be >= 0");
    if (!(mu_test[1] > mu_test[2]))
      throw ConfigError("mu1 must exceed mu2");
    if (!(p_c > 0.0) || p_c > 1.0) throw ConfigError("p_c must be in (0,1]");
    double psum = p_c;
    for (double p : p_test) {
      if (!(p >= 0.0) || p > 1.0) throw ConfigError("test probabilities must be in [0,1]");
      psum += p;
    }
    if (psum > 1.0 + 1e-9) throw ConfigError("mode probabilities exceed 1");
    if (!(n_tot >= 0.0)) throw ConfigError("n_tot must be >= 0");
  }
};

// Physical-layer model parameters. The measurement node sits midway, so each
// arm spans distance_km / 2.
struct ChannelParams {
  double distance_km = 0.0;
  double loss_db_per_km = 0.2;
  double detector_efficiency = 0.3;
  double dark_count_prob = 1e-8;
  double misalignment = 0.03;
  double error_correction_efficiency = 1.1;

  void validate() const {
    if (!(distance_km >= 0.0)) throw ConfigError("distance must be >= 0");
    if (!(loss_db_per_km >= 0.0)) throw ConfigError("loss coefficient must be >= 0");
    if (!(detector_efficiency > 0.0) || detector_efficiency > 1.0)
      throw ConfigError("detector efficiency must be in (0,1]");
    if (!(dark_count_prob >= 0.0) || dark_count_prob >= 1.0)
      throw ConfigError("dark count probability must be in [0,1)");
    if (!(misalignment >= 0.0) || misalignment > 0.5)
      throw ConfigError("misalignment must be in [0,0.5]");
    if (!(error_correction_efficiency >= 1.0))
      throw ConfigError("error correction efficiency must be >= 1");
  }
};

enum class CountProvenance { expected, sampled };

// One experiment's worth of counts. gamma[a][b] is the number of detected
// rounds in which the first party sent test intensity a and the second sent
// b. Trial counts are kept so sampled replicas can be drawn without re-running
// the channel model. Counts are whole numbers stored in doubles (exact up to
// 2^53).
struct ObservedCounts {
  double n_tot = 0.0;
  double gamma_c = 0.0;        // detected code-mode rounds
  double error_count_c = 0.0;  // bit errors among them
  std::array<std::array<double, 4>, 4> gamma{};
  double trials_c = 0.0;
  std::array<std::array<double, 4>, 4> trials{};
  CountProvenance provenance = CountProvenance::expected;
  std::uint64_t seed = 0;

  void validate() const {
    auto chk = [](double v, const char* what) {
      if (!std::isfinite(v) || v < 0.0) throw ConfigError(std::string("count table: bad ") + what);
    };
    chk(n_tot, "n_tot");
    chk(gamma_c, "code count");
    chk(error_count_c, "error count");
    chk(trials_c, "code trials");
    if (error_count_c > gamma_c) throw ConfigError("count table: errors exceed detections");
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        chk(gamma[a][b], "pair count");
        chk(trials[a][b], "pair trials");
      }
  }
};

}  // namespace tfqkd
