#include "tfqkd/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace tfqkd::config {

namespace {

using nlohmann::json;

double as_number(const json& value, const std::string& key) {
  if (!value.is_number()) {
    throw ConfigError("config key '" + key + "' must be a number");
  }
  return value.get<double>();
}

double as_rounds(const json& value, const std::string& key) {
  if (value.is_string()) {
    const auto text = value.get<std::string>();
    if (text == "inf" || text == "Inf" || text == "infinity") {
      return std::numeric_limits<double>::infinity();
    }
    throw ConfigError("config key '" + key + "' must be a number or \"inf\"");
  }
  return as_number(value, key);
}

int as_int(const json& value, const std::string& key) {
  if (!value.is_number_integer()) {
    throw ConfigError("config key '" + key + "' must be an integer");
  }
  return value.get<int>();
}

bool as_bool(const json& value, const std::string& key) {
  if (!value.is_boolean()) {
    throw ConfigError("config key '" + key + "' must be a boolean");
  }
  return value.get<bool>();
}

optimizer::Interval as_interval(const json& value, const std::string& key) {
  if (!value.is_array() || value.size() != 2 || !value[0].is_number() ||
      !value[1].is_number()) {
    throw ConfigError("config key '" + key + "' must be a [lo, hi] pair");
  }
  return {value[0].get<double>(), value[1].get<double>()};
}

Prefactor as_prefactor(const json& value, const std::string& key) {
  if (value.is_string()) {
    const auto text = value.get<std::string>();
    if (text == "code") return Prefactor::code_mode;
    if (text == "vacuum") return Prefactor::vacuum_test;
  }
  throw ConfigError("config key '" + key + "' must be \"code\" or \"vacuum\"");
}

}  // namespace

RunConfig parse(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string("config is not valid JSON: ") + err.what());
  }
  if (!root.is_object()) {
    throw ConfigError("config root must be a JSON object");
  }

  RunConfig cfg;
  for (const auto& [key, value] : root.items()) {
    if (key == "mu") {
      cfg.protocol.mu = as_number(value, key);
    } else if (key == "mu0") {
      cfg.protocol.mu_test[0] = as_number(value, key);
      cfg.space.mu0 = cfg.protocol.mu_test[0];
    } else if (key == "mu1") {
      cfg.protocol.mu_test[1] = as_number(value, key);
    } else if (key == "mu2") {
      cfg.protocol.mu_test[2] = as_number(value, key);
    } else if (key == "mu3") {
      cfg.protocol.mu_test[3] = as_number(value, key);
    } else if (key == "p_c") {
      cfg.protocol.p_c = as_number(value, key);
    } else if (key == "p0") {
      cfg.protocol.p_test[0] = as_number(value, key);
    } else if (key == "p1") {
      cfg.protocol.p_test[1] = as_number(value, key);
    } else if (key == "p2") {
      cfg.protocol.p_test[2] = as_number(value, key);
    } else if (key == "p3") {
      cfg.protocol.p_test[3] = as_number(value, key);
    } else if (key == "n_tot") {
      cfg.protocol.n_tot = as_rounds(value, key);
    } else if (key == "epsilon") {
      cfg.protocol.budget.epsilon = as_number(value, key);
    } else if (key == "epsilon_err") {
      cfg.protocol.budget.epsilon_err = as_number(value, key);
    } else if (key == "zeta_bits") {
      cfg.protocol.budget.zeta_bits = as_int(value, key);
    } else if (key == "zeta_prime_bits") {
      cfg.protocol.budget.zeta_prime_bits = as_int(value, key);
    } else if (key == "prefactor") {
      cfg.protocol.prefactor = as_prefactor(value, key);
    } else if (key == "decoy_diagonal_only") {
      cfg.protocol.decoy_diagonal_only = as_bool(value, key);
    } else if (key == "decoy_symmetric_yields") {
      cfg.protocol.decoy_symmetric_yields = as_bool(value, key);
    } else if (key == "distance_km") {
      cfg.channel.distance_km = as_number(value, key);
    } else if (key == "loss_db_per_km") {
      cfg.channel.loss_db_per_km = as_number(value, key);
    } else if (key == "detector_efficiency") {
      cfg.channel.detector_efficiency = as_number(value, key);
    } else if (key == "dark_count_prob") {
      cfg.channel.dark_count_prob = as_number(value, key);
    } else if (key == "misalignment") {
      cfg.channel.misalignment = as_number(value, key);
    } else if (key == "error_correction_efficiency") {
      cfg.channel.error_correction_efficiency = as_number(value, key);
    } else if (key == "search_mu") {
      cfg.space.mu = as_interval(value, key);
    } else if (key == "search_mu1") {
      cfg.space.mu1 = as_interval(value, key);
    } else if (key == "search_mu2") {
      cfg.space.mu2 = as_interval(value, key);
    } else if (key == "search_mu3") {
      cfg.space.mu3 = as_interval(value, key);
    } else if (key == "search_p_c") {
      cfg.space.p_c = as_interval(value, key);
    } else if (key == "search_p0") {
      cfg.space.p0 = as_interval(value, key);
    } else if (key == "search_p1") {
      cfg.space.p1 = as_interval(value, key);
    } else if (key == "search_p2") {
      cfg.space.p2 = as_interval(value, key);
    } else if (key == "search_p3") {
      cfg.space.p3 = as_interval(value, key);
    } else if (key == "seed") {
      if (!value.is_number_unsigned()) {
        throw ConfigError("config key 'seed' must be a non-negative integer");
      }
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "out") {
      if (!value.is_string()) {
        throw ConfigError("config key 'out' must be a string");
      }
      cfg.out = value.get<std::string>();
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  return cfg;
}

RunConfig load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string serialize(const RunConfig& cfg) {
  json root;
  root["mu"] = cfg.protocol.mu;
  root["mu0"] = cfg.protocol.mu_test[0];
  root["mu1"] = cfg.protocol.mu_test[1];
  root["mu2"] = cfg.protocol.mu_test[2];
  root["mu3"] = cfg.protocol.mu_test[3];
  root["p_c"] = cfg.protocol.p_c;
  root["p0"] = cfg.protocol.p_test[0];
  root["p1"] = cfg.protocol.p_test[1];
  root["p2"] = cfg.protocol.p_test[2];
  root["p3"] = cfg.protocol.p_test[3];
  if (std::isinf(cfg.protocol.n_tot)) {
    root["n_tot"] = "inf";
  } else {
    root["n_tot"] = cfg.protocol.n_tot;
  }
  root["epsilon"] = cfg.protocol.budget.epsilon;
  root["epsilon_err"] = cfg.protocol.budget.epsilon_err;
  root["zeta_bits"] = cfg.protocol.budget.zeta_bits;
  root["zeta_prime_bits"] = cfg.protocol.budget.zeta_prime_bits;
  root["prefactor"] =
      cfg.protocol.prefactor == Prefactor::code_mode ? "code" : "vacuum";
  root["decoy_diagonal_only"] = cfg.protocol.decoy_diagonal_only;
  root["decoy_symmetric_yields"] = cfg.protocol.decoy_symmetric_yields;
  root["distance_km"] = cfg.channel.distance_km;
  root["loss_db_per_km"] = cfg.channel.loss_db_per_km;
  root["detector_efficiency"] = cfg.channel.detector_efficiency;
  root["dark_count_prob"] = cfg.channel.dark_count_prob;
  root["misalignment"] = cfg.channel.misalignment;
  root["error_correction_efficiency"] =
      cfg.channel.error_correction_efficiency;
  const auto pair = [](const optimizer::Interval& iv) {
    return json::array({iv.lo, iv.hi});
  };
  root["search_mu"] = pair(cfg.space.mu);
  root["search_mu1"] = pair(cfg.space.mu1);
  root["search_mu2"] = pair(cfg.space.mu2);
  root["search_mu3"] = pair(cfg.space.mu3);
  root["search_p_c"] = pair(cfg.space.p_c);
  root["search_p0"] = pair(cfg.space.p0);
  root["search_p1"] = pair(cfg.space.p1);
  root["search_p2"] = pair(cfg.space.p2);
  root["search_p3"] = pair(cfg.space.p3);
  root["seed"] = cfg.seed;
  if (cfg.out) {
    root["out"] = *cfg.out;
  }
  return root.dump(2) + "\n";
}

}  // namespace tfqkd::config
