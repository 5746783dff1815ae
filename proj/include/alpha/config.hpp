#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "alpha/ppo.hpp"

namespace alpha {

enum class AgentKind {
  kAlpha,    // adaptive model selection
  kHier1,    // fixed schedule lf1 -> lf2 -> hf
  kHier2,    // fixed schedule lf2 -> lf1 -> hf
  kHfOnly,
  kLf1Only,
  kLf2Only,
};

std::string_view to_string(AgentKind k);
std::optional<AgentKind> agent_from_string(std::string_view s);

struct RunConfig {
  AgentKind agent = AgentKind::kAlpha;
  int episode_count = 300;
  int episode_length = 20;
  int seed_count = 300;
  uint64_t rng_seed = 0;
  int hidden_width = 1024;
  double epsilon = 0.1;
  int checkpoint_interval = 20;
  double learning_rate = 1e-3;
  double value_learning_rate = 3e-3;
  PpoHyperparams ppo;

  void validate() const;  // throws ConfigError
};

struct CliConfig {
  RunConfig run;
  // analysis knobs
  int grid_resolution = 10;
  double bandwidth = 1.5;  // in cell widths
  int n_permutations = 9999;
  int usage_window = 10;  // episodes per usage-over-time window

  void validate() const;
};

// flat "key = value" lines; '#' starts a comment; unknown or duplicate keys
// are rejected; parse(serialize(c)) == c
CliConfig parse_config_text(std::string_view text);
CliConfig parse_config_file(const std::filesystem::path& path);
std::string serialize_config(const CliConfig& cfg);

}  // namespace alpha
