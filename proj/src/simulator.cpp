#include "tfqkd/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "tfqkd/channel.hpp"
#include "tfqkd/decoy.hpp"
#include "tfqkd/dominance.hpp"
#include "tfqkd/fock.hpp"
#include "tfqkd/stats.hpp"

namespace tfqkd::sim {

namespace {

// Photon pairs are enumerated up to this order per arm; the leftover Poisson
// mass rides in the top class. For intensities below one photon the leftover
// is far beyond the sampling resolution of any realistic trial count.
constexpr int class_cutoff = 16;

struct PairClass {
  int j = 0, m = 0;
  double prob = 0.0;
};

std::vector<PairClass> pair_classes(double mu_a, double mu_b) {
  std::vector<PairClass> classes;
  classes.reserve((class_cutoff + 1) * (class_cutoff + 1));
  double total = 0.0;
  for (int j = 0; j <= class_cutoff; ++j) {
    for (int m = 0; m <= class_cutoff; ++m) {
      const double q = fock::coherent_pair_weight(mu_a, mu_b, j, m);
      classes.push_back({j, m, q});
      total += q;
    }
  }
  classes.back().prob += std::max(0.0, 1.0 - total);
  return classes;
}

long long draw_binomial(std::mt19937_64& rng, long long n, double p) {
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  std::binomial_distribution<long long> dist(n, p);
  return dist(rng);
}

// Multinomial split by sequential conditional binomials, fixed class order.
std::vector<long long> split_multinomial(std::mt19937_64& rng, long long n,
                                         const std::vector<double>& probs) {
  std::vector<long long> out(probs.size(), 0);
  double rem_mass = 1.0;
  long long remaining = n;
  for (std::size_t k = 0; k < probs.size() && remaining > 0; ++k) {
    const double p = rem_mass > 0.0 ? std::clamp(probs[k] / rem_mass, 0.0, 1.0) : 1.0;
    out[k] = draw_binomial(rng, remaining, p);
    remaining -= out[k];
    rem_mass -= probs[k];
  }
  return out;
}

}  // namespace

double world_yield(int j, int m, const ChannelParams& ch) {
  const double eta = channel::arm_transmittance(ch);
  const double miss = std::pow(1.0 - eta, double(j + m));
  return 1.0 - (1.0 - ch.dark_count_prob) * miss;
}

Trial run_trial(const ProtocolParams& p, const ChannelParams& ch,
                std::uint64_t seed) {
  p.validate();
  ch.validate();
  std::mt19937_64 rng(seed);

  Trial trial;
  trial.counts.n_tot = p.n_tot;
  trial.counts.provenance = CountProvenance::sampled;
  trial.counts.seed = seed;

  const long long n_rounds = static_cast<long long>(p.n_tot);

  // Mode split: code first, then the sixteen test intensity pairs row-major.
  std::vector<double> mode_probs;
  mode_probs.push_back(p.p_c * p.p_c);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) mode_probs.push_back(p.p_test[a] * p.p_test[b]);
  const auto mode_counts = split_multinomial(rng, n_rounds, mode_probs);

  // One detection experiment for a category: realize the photon classes, then
  // the detections per class; returns total detections and the even-pair part.
  auto run_category = [&](long long n_cat, double mu_a, double mu_b,
                          double& even_out) {
    long long detections = 0;
    double even = 0.0;
    const auto classes = pair_classes(mu_a, mu_b);
    std::vector<double> probs(classes.size());
    for (std::size_t k = 0; k < classes.size(); ++k) probs[k] = classes[k].prob;
    const auto counts = split_multinomial(rng, n_cat, probs);
    for (std::size_t k = 0; k < classes.size(); ++k) {
      if (counts[k] == 0) continue;
      const long long d = draw_binomial(
          rng, counts[k], world_yield(classes[k].j, classes[k].m, ch));
      detections += d;
      if ((classes[k].j + classes[k].m) % 2 == 0) even += double(d);
    }
    even_out = even;
    return detections;
  };

  trial.counts.trials_c = double(mode_counts[0]);
  double code_even = 0.0;
  const long long gamma_c = run_category(mode_counts[0], p.mu, p.mu, code_even);
  trial.counts.gamma_c = double(gamma_c);
  trial.counts.error_count_c =
      double(draw_binomial(rng, gamma_c, ch.misalignment));
  trial.truth.code_even = code_even;

  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const long long n_ab = mode_counts[1 + a * 4 + b];
      trial.counts.trials[a][b] = double(n_ab);
      double even = 0.0;
      trial.counts.gamma[a][b] =
          double(run_category(n_ab, p.mu_test[a], p.mu_test[b], even));
      if (a == b && (a == 0 || a == 1)) trial.truth.sum_even += even;
      if (a == 2 && b == 2) trial.truth.pair2_even = even;
    }
  }
  return trial;
}

CoverageReport run_coverage(const ProtocolParams& p, const ChannelParams& ch,
                            int trials, std::uint64_t base_seed) {
  CoverageReport report;
  report.eps_f = p.budget.epsilon;
  report.eps_err_total = p.budget.epsilon_err;

  dominance::IntensityConfig cfg;
  cfg.p0 = p.p_test[0];
  cfg.p1 = p.p_test[1];
  cfg.mu = p.mu;
  cfg.mu0 = p.mu_test[0];
  cfg.mu1 = p.mu_test[1];
  cfg.mu2 = p.mu_test[2];
  const auto coeffs = dominance::compute_coefficients(cfg);

  stats::PhaseErrorCountParams pp;
  pp.fl.gamma = coeffs.gamma;
  pp.fl.lambda = coeffs.lambda;
  pp.fl.p0 = p.p_test[0];
  pp.fl.p2 = p.p_test[2];
  pp.fl.p_mu2_even = fock::p_even(p.mu_test[2]);
  pp.p_even = fock::p_even(p.mu);

  const auto decoy_opts = decoy::options_for(p, false);

  for (int t = 0; t < trials; ++t) {
    const std::uint64_t seed = base_seed + 0x9E3779B97F4A7C15ull * std::uint64_t(t);
    const Trial trial = run_trial(p, ch, seed);
    ++report.trials;

    decoy::Bounds bounds;
    try {
      bounds = decoy::estimate(p, trial.counts, decoy_opts);
    } catch (const InconsistentCountsError&) {
      ++report.decoy_infeasible;
      continue;
    }

    if (trial.truth.sum_even > bounds.gamma_sum_upper) ++report.sum_violations;
    if (trial.truth.pair2_even < bounds.gamma_2_lower) ++report.pair2_violations;

    pp.p_mode = p.p_c;
    const double f_code =
        stats::f_upper(bounds.gamma_sum_upper, bounds.gamma_2_lower, pp,
                       p.budget.epsilon).f;
    pp.p_mode = p.p_test[0];
    const double f_vacuum =
        stats::f_upper(bounds.gamma_sum_upper, bounds.gamma_2_lower, pp,
                       p.budget.epsilon).f;
    if (trial.truth.code_even > f_code) ++report.f_violations_code;
    if (trial.truth.code_even > f_vacuum) ++report.f_violations_vacuum;
  }
  return report;
}

}  // namespace tfqkd::sim
