#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tfqkd/channel.hpp"
#include "tfqkd/config.hpp"
#include "tfqkd/decoy.hpp"
#include "tfqkd/dominance.hpp"
#include "tfqkd/fock.hpp"
#include "tfqkd/keyrate.hpp"
#include "tfqkd/optimizer.hpp"
#include "tfqkd/simulator.hpp"
#include "tfqkd/stats.hpp"

namespace {

using namespace tfqkd;

struct CliArgs {
  std::optional<std::string> config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> distance_km;
  std::optional<std::string> n_tot;
  std::optional<int> trials;
  std::optional<int> max_evals;
  std::optional<int> restarts;
  double lambda_scale = 1.0;
  double gamma_scale = 1.0;
  int cutoff = 40;
};

double parse_rounds(const std::string& text) {
  if (text == "inf" || text == "Inf" || text == "infinity") {
    return std::numeric_limits<double>::infinity();
  }
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("--n-tot expects a number or \"inf\", got '" + text + "'");
  }
  if (used != text.size()) {
    throw ConfigError("--n-tot expects a number or \"inf\", got '" + text + "'");
  }
  return value;
}

config::RunConfig resolve(const CliArgs& args) {
  config::RunConfig cfg;
  if (args.config_path) cfg = config::load_file(*args.config_path);
  if (args.out) cfg.out = *args.out;
  if (args.seed) cfg.seed = *args.seed;
  if (args.distance_km) cfg.channel.distance_km = *args.distance_km;
  if (args.n_tot) cfg.protocol.n_tot = parse_rounds(*args.n_tot);
  return cfg;
}

std::string format_rounds(double n) {
  if (std::isinf(n)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", n);
  return buf;
}

const char* csv_header() {
  return "L_km,N_tot,mu,mu1,mu2,mu3,p_c,p0,p1,p2,p3,rate_per_pulse,"
         "phase_error_bound,eps_sec\n";
}

std::string csv_row(double distance_km, const ProtocolParams& p,
                    const keyrate::KeyRateResult& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%.17g,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                "%.17g,%.17g,%.17g,%.17g\n",
                distance_km, format_rounds(p.n_tot).c_str(), p.mu,
                p.mu_test[1], p.mu_test[2], p.mu_test[3], p.p_c, p.p_test[0],
                p.p_test[1], p.p_test[2], p.p_test[3], r.rate,
                r.phase_error_bound, r.eps_sec);
  return buf;
}

void write_output(const std::optional<std::string>& path, const std::string& text) {
  if (!path) {
    std::fputs(text.c_str(), stdout);
    return;
  }
  std::ofstream out(*path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + *path + "'");
  out << text;
}

keyrate::KeyRateResult evaluate(const ProtocolParams& p, const ChannelParams& ch,
                                double f_ec) {
  if (p.asymptotic()) return keyrate::asymptotic_rate(p, ch);
  const ObservedCounts counts = channel::expected_counts(p, ch);
  return keyrate::key_length(counts, p, f_ec);
}

// Key rate recomputed with the second fluctuation term paired against the
// even-parity weight of the test-sum state instead of the near-vacuum one.
// Reported as a sensitivity diagnostic next to the headline number.
double pairing_sensitivity_rate(const ProtocolParams& p,
                                const keyrate::KeyRateResult& r, double f_ec) {
  if (p.asymptotic() || r.gamma_c <= 0.0) return r.rate;
  const double w2 = p.p_test[2] * p.p_test[2] * fock::p_even(p.mu_test[2]);
  if (w2 <= 0.0 || r.lambda <= 0.0) return r.rate;
  const double rem = std::max(
      0.0, r.gamma_sum_upper - r.gamma_coeff / w2 * r.gamma_2_lower);
  const double w_sum =
      p.p_test[0] * p.p_test[0] * fock::p_even(p.mu_test[0]) +
      p.p_test[1] * p.p_test[1] * fock::p_even(p.mu_test[1]);
  if (w_sum <= 0.0) return r.rate;
  const double nu_alt =
      std::sqrt(2.0 * r.gamma_coeff * (w2 + r.gamma_coeff)) / w2 *
          std::sqrt(std::max(r.gamma_2_lower, 0.0)) +
      std::sqrt(2.0 * (1.0 + r.lambda / w_sum)) * std::sqrt(rem);
  const double p_mode =
      p.prefactor == Prefactor::code_mode ? p.p_c : p.p_test[0];
  const double pref = p_mode * p_mode * fock::p_even(p.mu) / r.lambda;
  const double f_alt =
      pref * (rem + nu_alt * std::sqrt(-std::log(p.budget.epsilon / 2.0)));
  const double peb = std::min(f_alt / r.gamma_c, 1.0);
  const double g = r.gamma_c * (1.0 - stats::binary_entropy(peb)) -
                   f_ec * r.gamma_c * stats::binary_entropy(r.bit_error_rate) -
                   p.budget.zeta_bits - p.budget.zeta_prime_bits;
  return std::max(g, 0.0) / p.n_tot;
}

int cmd_rate(const CliArgs& args) {
  const config::RunConfig cfg = resolve(args);
  cfg.protocol.validate();
  cfg.channel.validate();
  const double f_ec = cfg.channel.error_correction_efficiency;
  const auto r = evaluate(cfg.protocol, cfg.channel, f_ec);

  std::ostringstream text;
  char line[256];
  auto put = [&](const char* key, const char* fmt, auto value) {
    std::snprintf(line, sizeof line, fmt, value);
    text << key << ": " << line << "\n";
  };
  put("distance_km", "%g", cfg.channel.distance_km);
  text << "n_tot: " << format_rounds(cfg.protocol.n_tot) << "\n";
  put("rate_per_pulse", "%.10g", r.rate);
  put("key_length_bits", "%.10g", r.key_length);
  put("phase_error_bound", "%.10g", r.phase_error_bound);
  put("bit_error_rate", "%.10g", r.bit_error_rate);
  put("eps_sec", "%.10g", r.eps_sec);
  put("gamma_c", "%.10g", r.gamma_c);
  put("f", "%.10g", r.f);
  put("nu", "%.10g", r.nu);
  put("gamma_sum_upper", "%.10g", r.gamma_sum_upper);
  put("gamma_2_lower", "%.10g", r.gamma_2_lower);
  text << "remainder_clamped: " << (r.remainder_clamped ? "true" : "false") << "\n";
  text << "zero_clamped: " << (r.zero_clamped ? "true" : "false") << "\n";
  put("pairing_sensitivity_rate", "%.10g",
      pairing_sensitivity_rate(cfg.protocol, r, f_ec));
  std::fputs(text.str().c_str(), stdout);

  if (cfg.out) {
    write_output(cfg.out, csv_header() + csv_row(cfg.channel.distance_km,
                                                 cfg.protocol, r));
  }
  return 0;
}

int cmd_optimize(const CliArgs& args) {
  const config::RunConfig cfg = resolve(args);
  cfg.channel.validate();
  optimizer::Options opts;
  opts.seed = cfg.seed;
  opts.budget = cfg.protocol.budget;
  opts.prefactor = cfg.protocol.prefactor;
  opts.f_ec = cfg.channel.error_correction_efficiency;
  opts.decoy_diagonal_only = cfg.protocol.decoy_diagonal_only;
  opts.decoy_symmetric_yields = cfg.protocol.decoy_symmetric_yields;
  if (args.max_evals) opts.max_evaluations = *args.max_evals;
  if (args.restarts) opts.restarts = *args.restarts;

  const auto result = optimizer::optimize(cfg.space, cfg.channel,
                                          cfg.protocol.n_tot, opts);
  std::printf("distance_km: %g\n", cfg.channel.distance_km);
  std::printf("n_tot: %s\n", format_rounds(cfg.protocol.n_tot).c_str());
  std::printf("rate_per_pulse: %.10g\n", result.rate.rate);
  std::printf("phase_error_bound: %.10g\n", result.rate.phase_error_bound);
  std::printf("evaluations: %d\n", result.evaluations);
  std::printf("mu: %.10g\nmu1: %.10g\nmu2: %.10g\nmu3: %.10g\n",
              result.params.mu, result.params.mu_test[1],
              result.params.mu_test[2], result.params.mu_test[3]);
  std::printf("p_c: %.10g\np0: %.10g\np1: %.10g\np2: %.10g\np3: %.10g\n",
              result.params.p_c, result.params.p_test[0],
              result.params.p_test[1], result.params.p_test[2],
              result.params.p_test[3]);
  if (cfg.out) {
    write_output(cfg.out, csv_header() + csv_row(cfg.channel.distance_km,
                                                 result.params, result.rate));
  }
  return 0;
}

int cmd_table(const CliArgs& args) {
  const config::RunConfig cfg = resolve(args);
  cfg.channel.validate();
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<double> n_grid{1e11, 1e12, 1e13, 1e14, inf};
  const std::vector<double> l_grid{0.0, 100.0, 200.0, 300.0, 350.0, 400.0};

  struct Cell {
    double n = 0.0, l = 0.0;
    std::string row;
  };
  std::vector<std::future<Cell>> futures;
  for (double n : n_grid) {
    for (double l : l_grid) {
      futures.push_back(std::async(std::launch::async, [&, n, l] {
        ChannelParams ch = cfg.channel;
        ch.distance_km = l;
        optimizer::Options opts;
        // cell-specific deterministic seed, independent of evaluation order
        opts.seed = cfg.seed ^ (std::uint64_t(std::llround(l) + 1) * 1000003u) ^
                    std::uint64_t(std::isinf(n) ? 99 : std::llround(std::log10(n)));
        opts.budget = cfg.protocol.budget;
        opts.prefactor = cfg.protocol.prefactor;
        opts.f_ec = ch.error_correction_efficiency;
        opts.decoy_diagonal_only = cfg.protocol.decoy_diagonal_only;
        opts.decoy_symmetric_yields = cfg.protocol.decoy_symmetric_yields;
        if (args.max_evals) opts.max_evaluations = *args.max_evals;
        if (args.restarts) opts.restarts = *args.restarts;
        Cell cell{n, l, {}};
        try {
          const auto res = optimizer::optimize(cfg.space, ch, n, opts);
          cell.row = csv_row(l, res.params, res.rate);
        } catch (const optimizer::SearchFailureError&) {
          ProtocolParams p = cfg.protocol;
          p.n_tot = n;
          keyrate::KeyRateResult zero;
          zero.eps_sec = std::isinf(n) ? 0.0
                                       : stats::compose_security(p.budget);
          cell.row = csv_row(l, p, zero);
        }
        return cell;
      }));
    }
  }
  std::string csv = csv_header();
  for (auto& f : futures) csv += f.get().row;
  write_output(cfg.out, csv);
  return 0;
}

int cmd_verify_dominance(const CliArgs& args) {
  const config::RunConfig cfg = resolve(args);
  cfg.protocol.validate();
  dominance::IntensityConfig ic;
  ic.p0 = cfg.protocol.p_test[0];
  ic.p1 = cfg.protocol.p_test[1];
  ic.mu = cfg.protocol.mu;
  ic.mu0 = cfg.protocol.mu_test[0];
  ic.mu1 = cfg.protocol.mu_test[1];
  ic.mu2 = cfg.protocol.mu_test[2];

  std::optional<dominance::Coefficients> override_coeffs;
  if (args.lambda_scale != 1.0 || args.gamma_scale != 1.0) {
    dominance::Coefficients c = dominance::compute_coefficients(ic);
    c.lambda *= args.lambda_scale;
    c.gamma *= args.gamma_scale;
    override_coeffs = c;
  }
  const auto report = dominance::verify_dominance(ic, args.cutoff, override_coeffs);
  std::printf("gamma: %.10g\nlambda: %.10g\ncutoff: %d\n", report.coeffs.gamma,
              report.coeffs.lambda, report.cutoff);
  std::printf("even_sector: dim=%d min_eigenvalue=%.6g tail=%.3g %s\n",
              report.even_even.dim, report.even_even.min_eigenvalue,
              report.even_even.tail_bound,
              report.even_even.pass ? "pass" : "FAIL");
  std::printf("odd_sector: dim=%d min_eigenvalue=%.6g tail=%.3g %s\n",
              report.odd_odd.dim, report.odd_odd.min_eigenvalue,
              report.odd_odd.tail_bound, report.odd_odd.pass ? "pass" : "FAIL");
  std::printf("series: even=%.10g odd=%.10g limit=%.10g %s\n",
              report.series_even, report.series_odd, report.series_limit,
              report.series_pass ? "pass" : "FAIL");
  std::printf("q_min: %.6g %s\n", report.q_min,
              report.q_nonnegative ? "pass" : "FAIL");
  std::printf("dominance: %s\n", report.pass ? "pass" : "FAIL");
  return report.pass ? 0 : 4;
}

int cmd_montecarlo(const CliArgs& args) {
  const config::RunConfig cfg = resolve(args);
  cfg.protocol.validate();
  cfg.channel.validate();
  const int trials = args.trials.value_or(1000);
  if (trials < 1) throw ConfigError("--trials must be at least 1");
  if (cfg.protocol.asymptotic())
    throw ConfigError("montecarlo needs a finite n_tot");

  const auto rep = sim::run_coverage(cfg.protocol, cfg.channel, trials, cfg.seed);
  const auto line = [&](const char* name, long long violations, double budget) {
    const double rate = double(violations) / double(rep.trials);
    const double se = std::sqrt(std::max(rate * (1.0 - rate), 0.0) /
                                double(rep.trials));
    const bool ok = rate <= budget + 3.0 * se;
    std::printf("%s: violations=%lld rate=%.3g budget=%.3g threshold=%.3g %s\n",
                name, violations, rate, budget, budget + 3.0 * se,
                ok ? "ok" : "FAILED");
    return ok;
  };
  std::printf("trials: %lld\nn_tot: %s\ndecoy_infeasible: %lld\n", rep.trials,
              format_rounds(cfg.protocol.n_tot).c_str(), rep.decoy_infeasible);
  const bool code_ok = line("f_bound_code", rep.f_violations_code, rep.eps_f);
  const bool vac_ok = line("f_bound_vacuum", rep.f_violations_vacuum, rep.eps_f);
  line("lp_sum_upper", rep.sum_violations, rep.eps_err_total);
  line("lp_pair2_lower", rep.pair2_violations, rep.eps_err_total);
  std::printf("prefactor_code: %s\n",
              code_ok ? "coverage ok" : "coverage FAILED, mode rejected");
  std::printf("prefactor_vacuum: %s\n",
              vac_ok ? "coverage ok" : "coverage FAILED, mode rejected");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-key rates for no-postselection twin-field QKD"};
  app.require_subcommand(1);
  CliArgs args;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", args.config_path, "JSON config file");
    cmd->add_option("--out", args.out, "output file (CSV where applicable)");
    cmd->add_option("--seed", args.seed, "RNG seed");
    cmd->add_option("--distance-km", args.distance_km, "fiber length in km");
    cmd->add_option("--n-tot", args.n_tot, "total rounds, number or 'inf'");
  };

  CLI::App* rate = app.add_subcommand("rate", "key rate at fixed parameters");
  add_common(rate);
  CLI::App* table =
      app.add_subcommand("table", "optimized rates over the N x distance grid");
  add_common(table);
  table->add_option("--max-evals", args.max_evals, "objective evaluations per cell");
  table->add_option("--restarts", args.restarts, "search restarts per cell");
  CLI::App* optimize =
      app.add_subcommand("optimize", "search the parameter space at one point");
  add_common(optimize);
  optimize->add_option("--max-evals", args.max_evals, "objective evaluations");
  optimize->add_option("--restarts", args.restarts, "search restarts");
  CLI::App* verify = app.add_subcommand(
      "verify-dominance", "certify the operator inequality at the configured point");
  add_common(verify);
  verify->add_option("--lambda-scale", args.lambda_scale,
                     "scale factor applied to lambda before verification");
  verify->add_option("--gamma-scale", args.gamma_scale,
                     "scale factor applied to gamma before verification");
  verify->add_option("--cutoff", args.cutoff, "photon-number cutoff");
  CLI::App* mc = app.add_subcommand(
      "montecarlo", "sampled-world coverage check of the claimed bounds");
  add_common(mc);
  mc->add_option("--trials", args.trials, "number of simulated experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (rate->parsed()) return cmd_rate(args);
    if (table->parsed()) return cmd_table(args);
    if (optimize->parsed()) return cmd_optimize(args);
    if (verify->parsed()) return cmd_verify_dominance(args);
    if (mc->parsed()) return cmd_montecarlo(args);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const InconsistentCountsError& e) {
    std::fprintf(stderr, "inconsistent counts: %s\n", e.what());
    return 3;
  } catch (const optimizer::SearchFailureError& e) {
    std::fprintf(stderr, "search failed: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
