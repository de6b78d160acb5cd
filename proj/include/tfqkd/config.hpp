#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "tfqkd/optimizer.hpp"
#include "tfqkd/types.hpp"

namespace tfqkd::config {

// Everything a CLI run needs: protocol and channel parameters, the optimizer
// search space, output path and RNG seed. Loaded from a flat-key JSON file;
// absent keys keep their defaults, unknown keys are rejected.
struct RunConfig {
  ProtocolParams protocol{};
  ChannelParams channel{};
  optimizer::SearchSpace space{};
  std::uint64_t seed = 1;
  std::optional<std::string> out;
};

RunConfig load_file(const std::string& path);
RunConfig parse(const std::string& json_text);

// Round-trip helper used by tests and --dump-config.
std::string serialize(const RunConfig& config);

}  // namespace tfqkd::config
