#include "tfqkd/keyrate.hpp"

#include <algorithm>
#include <cmath>

#include "tfqkd/channel.hpp"
#include "tfqkd/decoy.hpp"
#include "tfqkd/dominance.hpp"
#include "tfqkd/fock.hpp"
#include "tfqkd/stats.hpp"

namespace tfqkd::keyrate {

double h_ec(double gamma_c, double bit_error_rate, double f_ec) {
  if (!(gamma_c >= 0.0) || !(f_ec >= 1.0))
    throw ConfigError("h_ec: bad inputs");
  return f_ec * gamma_c * stats::binary_entropy(bit_error_rate);
}

namespace {

dominance::Coefficients dominance_coefficients(const ProtocolParams& p) {
  dominance::IntensityConfig c;
  c.p0 = p.p_test[0];
  c.p1 = p.p_test[1];
  c.mu = p.mu;
  c.mu0 = p.mu_test[0];
  c.mu1 = p.mu_test[1];
  c.mu2 = p.mu_test[2];
  try {
    return dominance::compute_coefficients(c);
  } catch (const dominance::SeriesDivergence& e) {
    throw ConfigError(std::string("dominance coefficients unavailable: ") + e.what());
  }
}

stats::PhaseErrorCountParams phase_error_params(const ProtocolParams& p,
                                               const dominance::Coefficients& co) {
  stats::PhaseErrorCountParams pp;
  pp.fl.gamma = co.gamma;
  pp.fl.lambda = co.lambda;
  pp.fl.p0 = p.p_test[0];
  pp.fl.p2 = p.p_test[2];
  pp.fl.p_mu2_even = fock::p_even(p.mu_test[2]);
  pp.p_even = fock::p_even(p.mu);
  pp.p_mode = p.prefactor == Prefactor::code_mode ? p.p_c : p.p_test[0];
  return pp;
}

KeyRateResult zero_result(const ProtocolParams& p, bool asymptotic) {
  KeyRateResult r;
  r.eps_sec = asymptotic ? 0.0 : stats::compose_security(p.budget);
  return r;
}

KeyRateResult assemble(const ObservedCounts& observed, const ProtocolParams& params,
                       double f_ec, bool asymptotic) {
  params.validate();
  observed.validate();
  if (observed.gamma_c <= 0.0 || observed.n_tot <= 0.0)
    return zero_result(params, asymptotic);

  const dominance::Coefficients co = dominance_coefficients(params);
  const decoy::Options opts = decoy::options_for(params, asymptotic);
  const decoy::Bounds bounds = decoy::estimate(params, observed, opts);
  const stats::PhaseErrorCountParams pp = phase_error_params(params, co);

  KeyRateResult r;
  r.gamma_c = observed.gamma_c;
  r.bit_error_rate = observed.error_count_c / observed.gamma_c;
  r.gamma_sum_upper = bounds.gamma_sum_upper;
  r.gamma_2_lower = bounds.gamma_2_lower;
  r.lambda = co.lambda;
  r.gamma_coeff = co.gamma;

  if (asymptotic) {
    const stats::Fluctuation fl =
        stats::fluctuation_nu(bounds.gamma_sum_upper, bounds.gamma_2_lower, pp.fl);
    r.f = pp.p_mode * pp.p_mode * pp.p_even / pp.fl.lambda * fl.remainder;
    r.nu = 0.0;
    r.remainder_clamped = fl.clamped;
    r.eps_sec = 0.0;
  } else {
    const stats::PhaseErrorCountBound fb = stats::f_upper(
        bounds.gamma_sum_upper, bounds.gamma_2_lower, pp, params.budget.epsilon);
    r.f = fb.f;
    r.nu = fb.nu;
    r.remainder_clamped = fb.clamped;
    r.eps_sec = stats::compose_security(params.budget);
  }

  r.phase_error_bound = std::min(r.f / r.gamma_c, 1.0);
  r.h_ec_bits = h_ec(r.gamma_c, r.bit_error_rate, f_ec);
  double g = r.gamma_c - r.gamma_c * stats::binary_entropy(r.phase_error_bound) -
             r.h_ec_bits;
  if (!asymptotic) g -= params.budget.zeta_bits + params.budget.zeta_prime_bits;
  r.zero_clamped = g < 0.0;
  r.key_length = std::max(g, 0.0);
  r.rate = observed.n_tot > 0.0 ? r.key_length / observed.n_tot : 0.0;
  return r;
}

}  // namespace

KeyRateResult key_length(const ObservedCounts& observed, const ProtocolParams& params,
                         double f_ec) {
  return assemble(observed, params, f_ec, false);
}

KeyRateResult asymptotic_rate(const ProtocolParams& params, const ChannelParams& channel) {
  ProtocolParams p = params;
  p.n_tot = asymptotic_reference_rounds;
  p.validate();
  channel.validate();
  const ObservedCounts counts = channel::expected_counts_exact(p, channel);
  return assemble(counts, p, channel.error_correction_efficiency, true);
}

double plob_bound(const ChannelParams& channel) {
  channel.validate();
  const double eta_tot = channel.detector_efficiency * channel.detector_efficiency *
                         std::pow(10.0, -channel.loss_db_per_km * channel.distance_km / 10.0);
  return -std::log1p(-eta_tot) / std::log(2.0);
}

}  // namespace tfqkd::keyrate
