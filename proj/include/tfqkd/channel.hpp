#pragma once

#include <cstdint>
#include <string>

#include "tfqkd/types.hpp"

// Single-photon-interference channel model: two coherent pulses meet on a
// beamsplitter at the midpoint, threshold detectors with dark counts and a
// polarization/phase misalignment behind it. Produces expected or sampled
// count tables and (de)serializes them.

namespace tfqkd::channel {

// Transmittance of one arm (source to midpoint), detector efficiency folded in.
double arm_transmittance(const ChannelParams& ch);

struct CodeModeStats {
  double gain = 0.0;        // P(exactly one detector clicks)
  double error_rate = 0.0;  // P(wrong detector | exactly one click)
};

// Code mode: both parties send intensity mu with locked phases, so the
// interference is deterministic up to misalignment.
CodeModeStats code_mode_stats(double mu, double eta, double dark_count_prob,
                              double misalignment);

// Test mode: intensities mu_a, mu_b with independent uniform phases. Returns
// the phase-averaged probability of exactly one click, integrated with a
// periodic trapezoid rule (exact-to-roundoff for this analytic integrand at
// modest point counts; n_points is clamped up to 64).
double test_gain(double mu_a, double mu_b, double eta, double dark_count_prob,
                 double misalignment, int n_points = 64);

// Deterministic expected-count table: every count is the trial count times the
// model probability, rounded to the nearest whole number.
ObservedCounts expected_counts(const ProtocolParams& p, const ChannelParams& ch);

// Same table without rounding. The asymptotic evaluation pins its equality
// constraints to these, so they must be exact expectations, not integers.
ObservedCounts expected_counts_exact(const ProtocolParams& p, const ChannelParams& ch);

// Binomial resampling of an expected table: each count is redrawn as
// Binomial(trials, count/trials) with a fixed draw order, so a given seed
// always yields the same table.
ObservedCounts sample_counts(const ObservedCounts& expected, std::uint64_t seed);

// CSV with header "label_a,label_b,count". One row per observable: the
// code-mode detection count, the code-mode error count, then the sixteen test
// intensity pairs.
std::string serialize_counts(const ObservedCounts& counts);

// Inverse of serialize_counts. Trial counts are reconstructed from the
// protocol parameters; inconsistent or malformed tables raise ConfigError.
ObservedCounts parse_counts(const std::string& csv, const ProtocolParams& p);

}  // namespace tfqkd::channel
