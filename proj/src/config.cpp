#include "alpha/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "alpha/errors.hpp"
#include "alpha/logs.hpp"

namespace alpha {

std::string_view to_string(AgentKind k) {
  switch (k) {
    case AgentKind::kAlpha: return "alpha";
    case AgentKind::kHier1: return "hier1";
    case AgentKind::kHier2: return "hier2";
    case AgentKind::kHfOnly: return "hf_only";
    case AgentKind::kLf1Only: return "lf1_only";
    case AgentKind::kLf2Only: return "lf2_only";
  }
  return "?";
}

std::optional<AgentKind> agent_from_string(std::string_view s) {
  if (s == "alpha") return AgentKind::kAlpha;
  if (s == "hier1") return AgentKind::kHier1;
  if (s == "hier2") return AgentKind::kHier2;
  if (s == "hf_only") return AgentKind::kHfOnly;
  if (s == "lf1_only") return AgentKind::kLf1Only;
  if (s == "lf2_only") return AgentKind::kLf2Only;
  return std::nullopt;
}

void RunConfig::validate() const {
  if (episode_count < 1) throw ConfigError("episodes must be >= 1");
  if (episode_length < 1) throw ConfigError("episode_length must be >= 1");
  if (seed_count != episode_count)
    throw ConfigError("seed_count must equal episodes (one seed per episode)");
  if (hidden_width < 1) throw ConfigError("hidden_width must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0 / 3.0))
    throw ConfigError("epsilon must be in (0, 1/3)");
  if (checkpoint_interval < 1)
    throw ConfigError("checkpoint_interval must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(value_learning_rate > 0.0))
    throw ConfigError("value_learning_rate must be > 0");
  if (!(ppo.gamma > 0.0 && ppo.gamma <= 1.0))
    throw ConfigError("gamma must be in (0, 1]");
  if (!(ppo.lambda >= 0.0 && ppo.lambda <= 1.0))
    throw ConfigError("lambda must be in [0, 1]");
  if (!(ppo.clip_eps > 0.0)) throw ConfigError("clip_eps must be > 0");
  if (ppo.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (ppo.minibatch_size < 1) throw ConfigError("minibatch_size must be >= 1");
  if (!(ppo.entropy_coef >= 0.0)) throw ConfigError("entropy_coef must be >= 0");
  if (!(ppo.value_coef >= 0.0)) throw ConfigError("value_coef must be >= 0");
  if (ppo.batch_threshold < 1) throw ConfigError("batch_threshold must be >= 1");
}

void CliConfig::validate() const {
  run.validate();
  if (grid_resolution < 2) throw ConfigError("grid_resolution must be >= 2");
  if (!(bandwidth > 0.0)) throw ConfigError("bandwidth must be > 0");
  if (n_permutations < 0) throw ConfigError("n_perm must be >= 0");
  if (usage_window < 1) throw ConfigError("usage_window must be >= 1");
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

int64_t to_int(std::string_view v, const std::string& key, int line) {
  int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError("bad integer for '" + key + "' on line " +
                      std::to_string(line));
  return out;
}

double to_double(std::string_view v, const std::string& key, int line) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError("bad number for '" + key + "' on line " +
                      std::to_string(line));
  return out;
}

}  // namespace

CliConfig parse_config_text(std::string_view text) {
  CliConfig cfg;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line{raw};
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("expected 'key = value' on line " + std::to_string(line_no));
    const std::string key{trim(line.substr(0, eq))};
    const std::string_view val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError("empty key or value on line " + std::to_string(line_no));
    if (!seen.insert(key).second)
      throw ConfigError("duplicate key '" + key + "' on line " +
                        std::to_string(line_no));

    if (key == "agent") {
      auto a = agent_from_string(val);
      if (!a)
        throw ConfigError("unknown agent '" + std::string(val) + "' on line " +
                          std::to_string(line_no));
      cfg.run.agent = *a;
    } else if (key == "episodes") {
      cfg.run.episode_count = static_cast<int>(to_int(val, key, line_no));
    } else if (key == "episode_length") {
      cfg.run.episode_length = static_cast<int>(to_int(val, key, line_no));
    } else if (key == "seed_count") {
      cfg.run.seed_count = static_cast<int>(to_int(val, key, line_no));
    } else if (key == "rng_seed") {
      cfg.run.rng_seed = static_cast<uint64_t>(to_int(val, key, line_no));
    } else if (key == "hidden_width") {
      cfg.run.hidden_width = static_cast<int>(to_int(val, key, line_no));
    } else if (key == "epsilon") {
      cfg.run.epsilon = to_double(val, key, line_no);
    } else if (key == "checkpoint_interval") {
      cfg.run.checkpoint_interval = static_cast<int>(to_int(val, key, line_no));
    } else if (key == "learning_rate") {
      cfg.run.learning_rate = to_double(val, key, line_no);
    } else if (key == "value_learning_rate") {
      cfg.run.value_learning_rate = to_double(val, key, line_no);
    } else if (key == "gamma") {
      cfg.run.ppo.gamma = to_double(val, key, line_no);
    } else if (key == "lambda") {
      cfg.run.ppo.lambda = to_double(val, key, line_no);
    } else if (key == "clip_eps") {
      cfg.run.ppo.clip_eps = to_double(val, key, line_no);
    } else if (key == "epochs") {
      cfg.run.ppo.epochs = static_cast<int>(to_int(val, key, line_no));
    } else if (key == "minibatch_size") {
      cfg.run.ppo.minibatch_size = static_cast<int>(to_int(val, key, line_no));
    } else if (key == "entropy_coef") {
      cfg.run.ppo.entropy_coef = to_double(val, key, line_no);
    } else if (key == "value_coef") {
      cfg.run.ppo.value_coef = to_double(val, key, line_no);
    } else if (key == "batch_threshold") {
      cfg.run.ppo.batch_threshold = static_cast<int>(to_int(val, key, line_no));
    } else if (key == "grid_resolution") {
      cfg.grid_resolution = static_cast<int>(to_int(val, key, line_no));
    } else if (key == "bandwidth") {
      cfg.bandwidth = to_double(val, key, line_no);
    } else if (key == "n_perm") {
      cfg.n_permutations = static_cast<int>(to_int(val, key, line_no));
    } else if (key == "usage_window") {
      cfg.usage_window = static_cast<int>(to_int(val, key, line_no));
    } else {
      throw ConfigError("unknown key '" + key + "' on line " +
                        std::to_string(line_no));
    }
  }
  cfg.validate();
  return cfg;
}

CliConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const CliConfig& cfg) {
  std::string out;
  auto kv = [&out](std::string_view k, const std::string& v) {
    out += std::string(k) + " = " + v + "\n";
  };
  kv("agent", std::string(to_string(cfg.run.agent)));
  kv("episodes", std::to_string(cfg.run.episode_count));
  kv("episode_length", std::to_string(cfg.run.episode_length));
  kv("seed_count", std::to_string(cfg.run.seed_count));
  kv("rng_seed", std::to_string(cfg.run.rng_seed));
  kv("hidden_width", std::to_string(cfg.run.hidden_width));
  kv("epsilon", format_double(cfg.run.epsilon));
  kv("checkpoint_interval", std::to_string(cfg.run.checkpoint_interval));
  kv("learning_rate", format_double(cfg.run.learning_rate));
  kv("value_learning_rate", format_double(cfg.run.value_learning_rate));
  kv("gamma", format_double(cfg.run.ppo.gamma));
  kv("lambda", format_double(cfg.run.ppo.lambda));
  kv("clip_eps", format_double(cfg.run.ppo.clip_eps));
  kv("epochs", std::to_string(cfg.run.ppo.epochs));
  kv("minibatch_size", std::to_string(cfg.run.ppo.minibatch_size));
  kv("entropy_coef", format_double(cfg.run.ppo.entropy_coef));
  kv("value_coef", format_double(cfg.run.ppo.value_coef));
  kv("batch_threshold", std::to_string(cfg.run.ppo.batch_threshold));
  kv("grid_resolution", std::to_string(cfg.grid_resolution));
  kv("bandwidth", format_double(cfg.bandwidth));
  kv("n_perm", std::to_string(cfg.n_permutations));
  kv("usage_window", std::to_string(cfg.usage_window));
  return out;
}

}  // namespace alpha
