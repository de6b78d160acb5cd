#pragma once

#include <cstdint>

#include "tfqkd/types.hpp"

// Sampling world for coverage experiments. Rounds are split multinomially
// over the mode choices, every test and code round is assigned an explicit
// photon pair, and detections are Bernoulli per pair class. Because the
// photon assignment is realized, the simulator can report ground truths the
// aggregate count table hides: how many detections came from even photon
// pairs. Those truths are what the phase-error bound and the yield-LP
// sandwich claim to cover.

namespace tfqkd::sim {

// Detection probability of a (j, m) photon pair: independent single-photon
// arm losses with dark counts, no interference structure.
double world_yield(int j, int m, const ChannelParams& ch);

struct Truth {
  double code_even = 0.0;   // code detections from even photon pairs
  double sum_even = 0.0;    // even-pair detections in intensity pairs (0,0), (1,1)
  double pair2_even = 0.0;  // even-pair detections in intensity pair (2,2)
};

struct Trial {
  ObservedCounts counts;
  Truth truth;
};

// One experiment of p.n_tot rounds. Identical seed, identical trial.
Trial run_trial(const ProtocolParams& p, const ChannelParams& ch,
                std::uint64_t seed);

struct CoverageReport {
  long long trials = 0;
  long long decoy_infeasible = 0;     // trials whose sampled table the LP rejected
  long long f_violations_code = 0;    // truth.code_even above the code-mode bound
  long long f_violations_vacuum = 0;  // same for the vacuum-test prefactor
  long long sum_violations = 0;       // truth.sum_even above the LP upper bound
  long long pair2_violations = 0;     // truth.pair2_even below the LP lower bound
  double eps_f = 0.0;        // failure budget claimed per f bound
  double eps_err_total = 0.0;  // failure budget shared by the LP dressing
};

// Runs `trials` independent experiments and tallies how often each claimed
// bound failed against the simulator's ground truth.
CoverageReport run_coverage(const ProtocolParams& p, const ChannelParams& ch,
                            int trials, std::uint64_t base_seed);

}  // namespace tfqkd::sim
