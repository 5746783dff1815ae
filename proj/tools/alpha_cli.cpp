#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "alpha/analysis.hpp"
#include "alpha/config.hpp"
#include "alpha/errors.hpp"
#include "alpha/orchestrator.hpp"

namespace fs = std::filesystem;

namespace {

alpha::CliConfig load_run_config(const fs::path& run_dir) {
  const fs::path cfg = run_dir / "config.cfg";
  if (!fs::exists(cfg))
    throw alpha::IoError("run directory " + run_dir.string() + " has no config.cfg");
  return alpha::parse_config_file(cfg);
}

fs::path default_checkpoint(const fs::path& run_dir, const alpha::CliConfig& cfg) {
  const char* tag = cfg.run.agent == alpha::AgentKind::kAlpha ? "hf" : "policy";
  return run_dir / "checkpoints" /
         ("ep" + std::to_string(cfg.run.episode_count) + "_" + tag + ".alphann");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive multi-fidelity reinforcement learning for design search"};
  app.require_subcommand(1);

  // train
  std::string train_config, train_agent, train_out;
  uint64_t train_seed = 0;
  auto* train = app.add_subcommand("train", "train an agent and write run artifacts");
  train->add_option("--config", train_config, "config file")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--agent", train_agent,
                    "agent kind (alpha|hier1|hier2|hf_only|lf1_only|lf2_only); "
                    "overrides the config");
  auto* train_seed_opt =
      train->add_option("--seed", train_seed, "rng seed; overrides the config");
  train->add_option("--out", train_out, "output run directory")->required();

  // evaluate
  std::string eval_run, eval_checkpoint;
  auto* evaluate =
      app.add_subcommand("evaluate", "roll out a checkpoint from the run's seeds");
  evaluate->add_option("--run", eval_run, "run directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  evaluate->add_option("--checkpoint", eval_checkpoint,
                       "checkpoint file (default: final checkpoint)");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "post-process run artifacts");
  analyze->require_subcommand(1);

  std::string usage_run;
  int usage_window = 0;
  auto* usage = analyze->add_subcommand("usage", "model usage over time");
  usage->add_option("--run", usage_run, "run directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  usage->add_option("--window", usage_window, "episodes per window");

  std::string spatial_run, spatial_model;
  uint64_t spatial_seed = 0;
  auto* spatial =
      analyze->add_subcommand("spatial", "spatial clustering of model usage");
  spatial->add_option("--run", spatial_run, "run directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  spatial->add_option("--model", spatial_model, "lf1|lf2|hf")->required();
  auto* spatial_seed_opt = spatial->add_option(
      "--seed", spatial_seed, "permutation rng seed (default: run rng_seed)");

  std::string field_checkpoint, field_out = "policy_field.csv";
  int field_resolution = 10;
  auto* field = analyze->add_subcommand("field", "mean-action map of a checkpoint");
  field->add_option("--checkpoint", field_checkpoint, "checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);
  field->add_option("--resolution", field_resolution, "grid resolution");
  field->add_option("--out", field_out, "output csv");

  // report
  std::vector<std::string> report_runs;
  std::string report_out = "report.csv";
  auto* report = app.add_subcommand("report", "efficiency comparison across runs");
  report->add_option("--runs", report_runs, "run directories")
      ->required()
      ->expected(-1);
  report->add_option("--out", report_out, "output csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      alpha::CliConfig cfg = alpha::parse_config_file(train_config);
      if (!train_agent.empty()) {
        auto kind = alpha::agent_from_string(train_agent);
        if (!kind) throw alpha::ConfigError("unknown agent '" + train_agent + "'");
        cfg.run.agent = *kind;
      }
      if (train_seed_opt->count() > 0) cfg.run.rng_seed = train_seed;
      cfg.validate();
      alpha::run_training(cfg, train_out);
      std::printf("run written to %s\n", train_out.c_str());
    } else if (*evaluate) {
      const alpha::CliConfig cfg = load_run_config(eval_run);
      const fs::path ckpt = eval_checkpoint.empty()
                                ? default_checkpoint(eval_run, cfg)
                                : fs::path(eval_checkpoint);
      if (!fs::exists(ckpt))
        throw alpha::IoError("checkpoint not found: " + ckpt.string());
      const alpha::LearnerNets nets = alpha::checkpoint_load(ckpt);
      const auto seeds =
          alpha::make_seeds(cfg.run.rng_seed, cfg.run.seed_count);
      alpha::write_eval_csv(
          fs::path(eval_run) / "eval.csv",
          alpha::evaluate_policy(nets.policy, seeds, cfg.run.episode_length));
      std::printf("eval.csv written for %s\n", ckpt.string().c_str());
    } else if (*usage) {
      const alpha::CliConfig cfg = load_run_config(usage_run);
      const auto rows = alpha::read_usage_csv(fs::path(usage_run) / "usage.csv");
      const int window = usage_window > 0 ? usage_window : cfg.usage_window;
      alpha::write_usage_time_csv(fs::path(usage_run) / "usage_time.csv",
                                  alpha::usage_over_time(rows, window));
      std::printf("usage_time.csv written to %s\n", usage_run.c_str());
    } else if (*spatial) {
      const auto model = alpha::model_from_string(spatial_model);
      if (!model)
        throw alpha::ConfigError("unknown model '" + spatial_model + "'");
      const alpha::CliConfig cfg = load_run_config(spatial_run);
      const auto rows = alpha::read_usage_csv(fs::path(spatial_run) / "usage.csv");
      const uint64_t seed = spatial_seed_opt->count() > 0 ? spatial_seed
                                                          : cfg.run.rng_seed;
      alpha::Rng rng(alpha::Rng::mix(seed, 3));
      const alpha::MoranResult result = alpha::moran_for_model(
          rows, *model, cfg.grid_resolution, cfg.bandwidth, cfg.n_permutations,
          rng);
      const std::string tag{alpha::to_string(*model)};
      alpha::write_moran_csv(fs::path(spatial_run) / ("moran_" + tag + ".csv"),
                             result);
      alpha::write_grid_csv(fs::path(spatial_run) / ("grid_" + tag + ".csv"),
                            alpha::grid_usage(rows, cfg.grid_resolution),
                            cfg.grid_resolution);
      std::printf("moran_%s.csv: I = %.6f, p = %.6f (%d cells)\n", tag.c_str(),
                  result.i_value, result.p_value, result.n_cells_used);
    } else if (*field) {
      const alpha::LearnerNets nets = alpha::checkpoint_load(field_checkpoint);
      alpha::write_field_csv(
          field_out, alpha::policy_field_map(nets.policy, field_resolution));
      std::printf("field map written to %s\n", field_out.c_str());
    } else if (*report) {
      std::vector<alpha::RunSummary> summaries;
      for (const std::string& run : report_runs) {
        if (!fs::is_directory(run))
          throw alpha::IoError("run directory not found: " + run);
        summaries.push_back(alpha::summarize_run(run));
      }
      alpha::write_report_csv(report_out, summaries);
      std::printf("report written to %s\n", report_out.c_str());
    }
  } catch (const alpha::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
