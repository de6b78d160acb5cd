#pragma once

#include "tfqkd/types.hpp"

// Secret-key length assembly: dominance coefficients, yield-LP bounds and the
// phase-error count bound combine into
//
//   G = gamma_c - gamma_c h(f / gamma_c) - H_EC - zeta - zeta'
//
// clamped at zero, with the asymptotic variant dropping every finite-size
// allowance except the error-correction leak.

namespace tfqkd::keyrate {

// Error-correction leak in bits: f_ec * gamma_c * h(bit_error_rate).
double h_ec(double gamma_c, double bit_error_rate, double f_ec);

struct KeyRateResult {
  double key_length = 0.0;         // G, clamped at 0
  double rate = 0.0;               // key_length / n_tot (0 when n_tot = 0)
  double phase_error_bound = 0.0;  // min(f / gamma_c, 1)
  double h_ec_bits = 0.0;
  double eps_sec = 0.0;            // 0 in the asymptotic variant

  // Diagnostics.
  double gamma_c = 0.0;
  double bit_error_rate = 0.0;
  double f = 0.0;                  // phase-error count bound
  double nu = 0.0;                 // fluctuation allowance inside f
  double gamma_sum_upper = 0.0;    // yield-LP outputs
  double gamma_2_lower = 0.0;
  double lambda = 0.0;             // dominance coefficients used
  double gamma_coeff = 0.0;
  bool zero_clamped = false;       // raw G was negative
  bool remainder_clamped = false;  // LP remainder clamped at 0 inside f
};

// Finite-size key length from an observed count table. The error-correction
// efficiency is the only physical-layer input needed here.
KeyRateResult key_length(const ObservedCounts& observed, const ProtocolParams& params,
                         double f_ec = 1.1);

// Rounds used to evaluate the asymptotic rate; the result is independent of
// this choice because every term scales linearly with it.
inline constexpr double asymptotic_reference_rounds = 1e12;

// Per-pulse rate in the limit of infinitely many rounds: exact expected
// counts, exact yield LP, no fluctuation allowances, no hash costs.
KeyRateResult asymptotic_rate(const ProtocolParams& params, const ChannelParams& channel);

// Repeaterless secret-key capacity -log2(1 - eta_tot) for the end-to-end
// transmittance implied by the channel (detector efficiency folded in).
double plob_bound(const ChannelParams& channel);

}  // namespace tfqkd::keyrate
