#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "alpha/alignment.hpp"
#include "alpha/config.hpp"
#include "alpha/logs.hpp"
#include "alpha/ppo.hpp"

namespace alpha {

// seed designs are a dedicated stream so every agent kind sees the same
// seeds for the same rng_seed
std::vector<DesignPoint> make_seeds(uint64_t rng_seed, int count);

// fixed per-step model for the scheduled baselines (35% / 35% / 30% split,
// e.g. 7 / 7 / 6 steps of a 20-step episode); throws for the adaptive agent
ModelId scheduled_model(AgentKind agent, int step, int episode_length);

// per-model experience, grouped into contiguous same-model sequences
struct ExperienceBuffers {
  std::vector<Sequence> lf1;
  std::vector<Sequence> lf2;
  std::vector<Sequence> hf;
  // first sequence index belonging to the current episode
  size_t mark_lf1 = 0;
  size_t mark_lf2 = 0;

  std::vector<Sequence>& of(ModelId m);
  const std::vector<Sequence>& of(ModelId m) const;
  size_t transition_count(ModelId m) const;
  void begin_episode();
};

// copies every maximal aligned run out of this episode's low-fidelity
// sequences into the high-fidelity buffer; returns transitions copied
int64_t augment_hf_buffer(ExperienceBuffers& buffers);

// deterministic rollout of the mean policy from each seed; iteration 0 is
// the seed itself; quality is measured against the high-fidelity model
// without charging any ledger
std::vector<EvalRow> evaluate_policy(const Mlp& policy,
                                     std::span<const DesignPoint> seeds,
                                     int episode_length);

// trains the configured agent and writes the run artifacts:
//   config.cfg, usage.csv, training.csv, ledger.csv, eval.csv,
//   checkpoints/ep{N}_{net}.alphann
void run_training(const CliConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace alpha
