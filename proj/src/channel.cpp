#include "tfqkd/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <vector>

namespace tfqkd::channel {

double arm_transmittance(const ChannelParams& ch) {
  ch.validate();
  return ch.detector_efficiency *
         std::pow(10.0, -ch.loss_db_per_km * (ch.distance_km / 2.0) / 10.0);
}

CodeModeStats code_mode_stats(double mu, double eta, double dark_count_prob,
                              double misalignment) {
  const double no_dark = 1.0 - dark_count_prob;
  // Total flux 2*mu*eta interferes; misalignment leaks a fraction into the
  // destructive port.
  const double a = 1.0 - no_dark * std::exp(-2.0 * mu * eta * (1.0 - misalignment));
  const double b = 1.0 - no_dark * std::exp(-2.0 * mu * eta * misalignment);
  CodeModeStats out;
  out.gain = a * (1.0 - b) + b * (1.0 - a);
  out.error_rate = out.gain > 0.0 ? b * (1.0 - a) / out.gain : 0.0;
  return out;
}

double test_gain(double mu_a, double mu_b, double eta, double dark_count_prob,
                 double misalignment, int n_points) {
  const int n = std::max(n_points, 64);
  const double no_dark = 1.0 - dark_count_prob;
  const double mean = eta * (mu_a + mu_b) / 2.0;
  const double swing = eta * std::sqrt(mu_a * mu_b) * (1.0 - 2.0 * misalignment);
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const double theta = 2.0 * M_PI * (k + 0.5) / n;
    const double mp = mean + swing * std::cos(theta);
    const double mm = mean - swing * std::cos(theta);
    const double pp = 1.0 - no_dark * std::exp(-mp);
    const double pm = 1.0 - no_dark * std::exp(-mm);
    acc += pp * (1.0 - pm) + pm * (1.0 - pp);
  }
  return acc / n;
}

ObservedCounts expected_counts_exact(const ProtocolParams& p, const ChannelParams& ch) {
  p.validate();
  ch.validate();
  if (!std::isfinite(p.n_tot))
    throw ConfigError("expected_counts needs a finite round count");
  const double eta = arm_transmittance(ch);
  ObservedCounts out;
  out.n_tot = p.n_tot;
  out.provenance = CountProvenance::expected;

  out.trials_c = p.n_tot * p.p_c * p.p_c;
  const CodeModeStats cs =
      code_mode_stats(p.mu, eta, ch.dark_count_prob, ch.misalignment);
  out.gamma_c = out.trials_c * cs.gain;
  out.error_count_c = out.gamma_c * cs.error_rate;

  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      out.trials[a][b] = p.n_tot * p.p_test[a] * p.p_test[b];
      const double g = test_gain(p.mu_test[a], p.mu_test[b], eta,
                                 ch.dark_count_prob, ch.misalignment);
      out.gamma[a][b] = out.trials[a][b] * g;
    }
  out.validate();
  return out;
}

ObservedCounts expected_counts(const ProtocolParams& p, const ChannelParams& ch) {
  ObservedCounts out = expected_counts_exact(p, ch);
  out.trials_c = std::round(out.trials_c);
  out.gamma_c = std::round(std::min(out.gamma_c, out.trials_c));
  out.error_count_c = std::min(std::round(out.error_count_c), out.gamma_c);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      out.trials[a][b] = std::round(out.trials[a][b]);
      out.gamma[a][b] = std::round(std::min(out.gamma[a][b], out.trials[a][b]));
    }
  out.validate();
  return out;
}

namespace {

double draw_binomial(std::mt19937_64& rng, double trials, double count) {
  if (trials <= 0.0 || count <= 0.0) return 0.0;
  const double prob = std::min(count / trials, 1.0);
  std::binomial_distribution<long long> dist(static_cast<long long>(trials), prob);
  return static_cast<double>(dist(rng));
}

}  // namespace

ObservedCounts sample_counts(const ObservedCounts& expected, std::uint64_t seed) {
  expected.validate();
  std::mt19937_64 rng(seed);
  ObservedCounts out = expected;
  out.provenance = CountProvenance::sampled;
  out.seed = seed;

  out.gamma_c = draw_binomial(rng, expected.trials_c, expected.gamma_c);
  // Errors are drawn against the realized detection count with the model's
  // conditional error rate.
  const double ber =
      expected.gamma_c > 0.0 ? expected.error_count_c / expected.gamma_c : 0.0;
  out.error_count_c = draw_binomial(rng, out.gamma_c, ber * out.gamma_c);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      out.gamma[a][b] = draw_binomial(rng, expected.trials[a][b], expected.gamma[a][b]);
  out.validate();
  return out;
}

std::string serialize_counts(const ObservedCounts& counts) {
  counts.validate();
  std::ostringstream os;
  char buf[64];
  auto put = [&](const std::string& la, const std::string& lb, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << la << ',' << lb << ',' << buf << '\n';
  };
  os << "label_a,label_b,count\n";
  put("code", "code", counts.gamma_c);
  put("code", "error", counts.error_count_c);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      put("mu" + std::to_string(a), "mu" + std::to_string(b), counts.gamma[a][b]);
  return os.str();
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

int mu_index(const std::string& label) {
  if (label.size() == 3 && label[0] == 'm' && label[1] == 'u' && label[2] >= '0' &&
      label[2] <= '3')
    return label[2] - '0';
  return -1;
}

}  // namespace

ObservedCounts parse_counts(const std::string& csv, const ProtocolParams& p) {
  p.validate();
  if (!std::isfinite(p.n_tot))
    throw ConfigError("count tables require a finite round count");

  ObservedCounts out;
  out.n_tot = p.n_tot;
  out.provenance = CountProvenance::sampled;
  out.trials_c = std::round(p.n_tot * p.p_c * p.p_c);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      out.trials[a][b] = std::round(p.n_tot * p.p_test[a] * p.p_test[b]);

  bool seen[18] = {};
  auto mark = [&](int slot) {
    if (seen[slot]) throw ConfigError("count table: duplicate row");
    seen[slot] = true;
  };

  std::istringstream is(csv);
  std::string line;
  bool header_done = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_done) {
      if (line != "label_a,label_b,count")
        throw ConfigError("count table: expected header label_a,label_b,count");
      header_done = true;
      continue;
    }
    std::vector<std::string> f = split_fields(line);
    if (f.size() != 3) throw ConfigError("count table: row needs 3 fields");
    char* end = nullptr;
    const double v = std::strtod(f[2].c_str(), &end);
    if (end == f[2].c_str() || *end != '\0' || !std::isfinite(v) || v < 0.0 ||
        v != std::floor(v))
      throw ConfigError("count table: count must be a non-negative integer");
    if (f[0] == "code" && f[1] == "code") {
      mark(0);
      out.gamma_c = v;
    } else if (f[0] == "code" && f[1] == "error") {
      mark(1);
      out.error_count_c = v;
    } else {
      const int a = mu_index(f[0]), b = mu_index(f[1]);
      if (a < 0 || b < 0) throw ConfigError("count table: unknown label pair");
      mark(2 + a * 4 + b);
      out.gamma[a][b] = v;
    }
  }
  if (!header_done) throw ConfigError("count table: empty input");
  for (bool s : seen)
    if (!s) throw ConfigError("count table: missing rows");

  if (out.gamma_c > out.trials_c) throw ConfigError("count table: code count exceeds trials");
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      if (out.gamma[a][b] > out.trials[a][b])
        throw ConfigError("count table: pair count exceeds trials");
  out.validate();
  return out;
}

}  // namespace tfqkd::channel
