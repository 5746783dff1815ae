#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "alpha/errors.hpp"
#include "alpha/orchestrator.hpp"

using namespace alpha;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("alpha_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Transition tagged(int step, bool aligned) {
  Transition t;
  t.s = {0.01 * step, -0.01 * step};
  t.a = {0.1, -0.1};
  t.reward = 0.5 * step;
  t.s_next = {0.01 * (step + 1), -0.01 * (step + 1)};
  t.behavior_log_prob = -1.0 - step;
  t.model = ModelId::kLf1;
  t.aligned = aligned;
  t.episode = 0;
  t.step = step;
  return t;
}

CliConfig small_config(AgentKind agent, uint64_t seed) {
  CliConfig cli;
  cli.run.agent = agent;
  cli.run.episode_count = 4;
  cli.run.episode_length = 5;
  cli.run.seed_count = 4;
  cli.run.rng_seed = seed;
  cli.run.hidden_width = 8;
  cli.run.checkpoint_interval = 2;
  cli.run.ppo.batch_threshold = 8;
  cli.run.ppo.minibatch_size = 8;
  cli.run.ppo.epochs = 2;
  return cli;
}

}  // namespace

TEST_CASE("seed designs are deterministic and in-domain") {
  const auto a = make_seeds(7, 100);
  const auto b = make_seeds(7, 100);
  const auto c = make_seeds(8, 100);
  REQUIRE(a.size() == 100);
  bool any_diff = false;
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x1 == b[i].x1);
    CHECK(a[i].x2 == b[i].x2);
    CHECK(a[i].x1 >= -1.0);
    CHECK(a[i].x1 < 1.0);
    CHECK(a[i].x2 >= -1.0);
    CHECK(a[i].x2 < 1.0);
    any_diff = any_diff || a[i].x1 != c[i].x1;
  }
  CHECK(any_diff);
}

TEST_CASE("scheduled baselines follow their fixed splits") {
  for (int t = 0; t < 20; ++t) {
    CHECK(scheduled_model(AgentKind::kHfOnly, t, 20) == ModelId::kHf);
    CHECK(scheduled_model(AgentKind::kLf1Only, t, 20) == ModelId::kLf1);
    CHECK(scheduled_model(AgentKind::kLf2Only, t, 20) == ModelId::kLf2);
  }
  // 20 steps split 7 / 7 / 6
  for (int t = 0; t < 7; ++t)
    CHECK(scheduled_model(AgentKind::kHier1, t, 20) == ModelId::kLf1);
  for (int t = 7; t < 14; ++t)
    CHECK(scheduled_model(AgentKind::kHier1, t, 20) == ModelId::kLf2);
  for (int t = 14; t < 20; ++t)
    CHECK(scheduled_model(AgentKind::kHier1, t, 20) == ModelId::kHf);
  // mirrored order
  CHECK(scheduled_model(AgentKind::kHier2, 0, 20) == ModelId::kLf2);
  CHECK(scheduled_model(AgentKind::kHier2, 7, 20) == ModelId::kLf1);
  CHECK(scheduled_model(AgentKind::kHier2, 14, 20) == ModelId::kHf);
  CHECK_THROWS_AS(scheduled_model(AgentKind::kAlpha, 0, 20), Error);
}

TEST_CASE("augmentation copies maximal aligned runs") {
  ExperienceBuffers buf;
  buf.begin_episode();
  Sequence seq;
  seq.transitions = {tagged(0, true), tagged(1, true), tagged(2, false),
                     tagged(3, true)};
  seq.terminal = true;
  buf.lf1.push_back(seq);

  const int64_t copied = augment_hf_buffer(buf);
  CHECK(copied == 3);
  REQUIRE(buf.hf.size() == 2);
  CHECK(buf.hf[0].size() == 2);
  CHECK(buf.hf[0].terminal == false);  // run stops before the sequence end
  CHECK(buf.hf[1].size() == 1);
  CHECK(buf.hf[1].terminal == true);  // run reaches the terminal end
  CHECK(buf.hf[1].transitions[0].step == 3);
  // payload fields survive the copy
  CHECK(buf.hf[0].transitions[1].behavior_log_prob == -2.0);
  CHECK(buf.hf[0].transitions[1].reward == 0.5);
  CHECK(buf.hf[0].transitions[1].model == ModelId::kLf1);
}

TEST_CASE("augmentation edge cases") {
  ExperienceBuffers buf;
  buf.begin_episode();
  Sequence none;
  none.transitions = {tagged(0, false), tagged(1, false)};
  none.terminal = true;
  buf.lf1.push_back(none);
  CHECK(augment_hf_buffer(buf) == 0);
  CHECK(buf.hf.empty());

  ExperienceBuffers buf2;
  buf2.begin_episode();
  Sequence all;
  all.transitions = {tagged(0, true), tagged(1, true)};
  all.terminal = false;  // model switched before the episode ended
  buf2.lf2.push_back(all);
  CHECK(augment_hf_buffer(buf2) == 2);
  REQUIRE(buf2.hf.size() == 1);
  CHECK(buf2.hf[0].terminal == false);
}

TEST_CASE("augmentation ignores sequences from earlier episodes") {
  ExperienceBuffers buf;
  Sequence old;
  old.transitions = {tagged(0, true)};
  old.terminal = true;
  buf.lf1.push_back(old);
  buf.begin_episode();  // old sequence now sits behind the mark
  Sequence fresh;
  fresh.transitions = {tagged(1, true)};
  fresh.terminal = true;
  buf.lf1.push_back(fresh);
  CHECK(augment_hf_buffer(buf) == 1);
  REQUIRE(buf.hf.size() == 1);
  CHECK(buf.hf[0].transitions[0].step == 1);
}

TEST_CASE("augmentation conserves aligned transitions on random fixtures") {
  Rng rng(501);
  for (int trial = 0; trial < 100; ++trial) {
    ExperienceBuffers buf;
    buf.begin_episode();
    int64_t aligned_total = 0;
    for (int s = 0; s < 3; ++s) {
      Sequence seq;
      const int n = 1 + static_cast<int>(rng.below(8));
      for (int t = 0; t < n; ++t) {
        const bool al = rng.uniform() < 0.5;
        aligned_total += al ? 1 : 0;
        seq.transitions.push_back(tagged(t, al));
      }
      seq.terminal = rng.uniform() < 0.5;
      buf.of(rng.uniform() < 0.5 ? ModelId::kLf1 : ModelId::kLf2).push_back(seq);
    }
    CHECK(augment_hf_buffer(buf) == aligned_total);
    int64_t in_hf = 0;
    for (const Sequence& s : buf.hf) {
      REQUIRE(s.size() > 0);
      for (const Transition& t : s.transitions) {
        CHECK(t.aligned);
        ++in_hf;
      }
    }
    CHECK(in_hf == aligned_total);
  }
}

TEST_CASE("evaluating a silent policy leaves every seed in place") {
  Layer l;
  l.in = 2;
  l.out = 4;
  l.w.assign(8, 0.0);
  l.b.assign(4, 0.0);
  Mlp quiet;
  quiet.layers.push_back(l);

  const auto seeds = make_seeds(3, 5);
  const auto rows = evaluate_policy(quiet, seeds, 4);
  REQUIRE(rows.size() == 5 * 5);
  for (const EvalRow& r : rows) {
    const DesignPoint& seed = seeds[static_cast<size_t>(r.seed_index)];
    CHECK(r.s.x1 == seed.x1);
    CHECK(r.s.x2 == seed.x2);
    CHECK(r.q_hf == quality(ModelId::kHf, r.s));
  }
}

TEST_CASE("training run writes the full artifact set") {
  const fs::path dir = fresh_dir("alpha_smoke");
  run_training(small_config(AgentKind::kAlpha, 3), dir);

  CHECK(fs::exists(dir / "config.cfg"));
  CHECK(fs::exists(dir / "training.csv"));
  CHECK(fs::exists(dir / "checkpoints/ep2_lf1.alphann"));
  CHECK(fs::exists(dir / "checkpoints/ep2_lf2.alphann"));
  CHECK(fs::exists(dir / "checkpoints/ep2_hf.alphann"));
  CHECK(fs::exists(dir / "checkpoints/ep4_hf.alphann"));

  const auto usage = read_usage_csv(dir / "usage.csv");
  REQUIRE(usage.size() == 20);
  const CostLedger ledger = read_ledger_csv(dir / "ledger.csv");
  CHECK(ledger.total_count() == 20);

  // decision states chain correctly within an episode
  const auto seeds = make_seeds(3, 4);
  for (const UsageRow& row : usage) {
    if (row.step == 0) {
      CHECK(row.s.x1 == seeds[static_cast<size_t>(row.episode)].x1);
      CHECK(row.s.x2 == seeds[static_cast<size_t>(row.episode)].x2);
    }
    // adaptive rows carry a normalized choice distribution
    CHECK(row.p_lf1 + row.p_lf2 + row.p_hf == doctest::Approx(1.0).epsilon(1e-12));
  }

  const auto eval = read_eval_csv(dir / "eval.csv");
  REQUIRE(eval.size() == 4 * 6);
  for (const EvalRow& r : eval) {
    if (r.iteration == 0) {
      CHECK(r.s.x1 == seeds[static_cast<size_t>(r.seed_index)].x1);
      CHECK(r.s.x2 == seeds[static_cast<size_t>(r.seed_index)].x2);
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("training runs are byte-identical for a fixed seed") {
  const fs::path d1 = fresh_dir("det_1");
  const fs::path d2 = fresh_dir("det_2");
  run_training(small_config(AgentKind::kAlpha, 11), d1);
  run_training(small_config(AgentKind::kAlpha, 11), d2);
  CHECK(slurp(d1 / "usage.csv") == slurp(d2 / "usage.csv"));
  CHECK(slurp(d1 / "training.csv") == slurp(d2 / "training.csv"));
  CHECK(slurp(d1 / "eval.csv") == slurp(d2 / "eval.csv"));
  CHECK(slurp(d1 / "checkpoints/ep4_hf.alphann") ==
        slurp(d2 / "checkpoints/ep4_hf.alphann"));
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("single-model baseline only ever charges its own model") {
  const fs::path dir = fresh_dir("lf2_only");
  run_training(small_config(AgentKind::kLf2Only, 5), dir);
  const CostLedger ledger = read_ledger_csv(dir / "ledger.csv");
  CHECK(ledger.count_lf1 == 0);
  CHECK(ledger.count_lf2 == 20);
  CHECK(ledger.count_hf == 0);
  CHECK(fs::exists(dir / "checkpoints/ep4_policy.alphann"));

  const auto usage = read_usage_csv(dir / "usage.csv");
  for (const UsageRow& row : usage) {
    CHECK(row.model == ModelId::kLf2);
    CHECK(row.aligned);
    CHECK(row.p_lf2 == 1.0);
    CHECK(row.p_lf1 == 0.0);
    CHECK(row.p_hf == 0.0);
    CHECK(row.theta == 0.0);
  }
  fs::remove_all(dir);
}

TEST_CASE("scheduled baseline usage follows its schedule exactly") {
  const fs::path dir = fresh_dir("hier1");
  run_training(small_config(AgentKind::kHier1, 5), dir);
  const auto usage = read_usage_csv(dir / "usage.csv");
  REQUIRE(usage.size() == 20);
  for (const UsageRow& row : usage)
    CHECK(row.model == scheduled_model(AgentKind::kHier1, row.step, 5));

  // 5 steps split 2 / 2 / 1 -> ledger counts 8 / 8 / 4 over 4 episodes
  const CostLedger ledger = read_ledger_csv(dir / "ledger.csv");
  CHECK(ledger.count_lf1 == 8);
  CHECK(ledger.count_lf2 == 8);
  CHECK(ledger.count_hf == 4);
  CHECK(ledger.total_seconds() ==
        8 * kMeanCostLf + 8 * kMeanCostLf + 4 * kMeanCostHf);
  fs::remove_all(dir);
}

TEST_CASE("saved config reloads to the run's exact settings") {
  const fs::path dir = fresh_dir("cfg_roundtrip");
  const CliConfig cfg = small_config(AgentKind::kHier2, 9);
  run_training(cfg, dir);
  const CliConfig back = parse_config_file(dir / "config.cfg");
  CHECK(back.run.agent == AgentKind::kHier2);
  CHECK(back.run.rng_seed == 9);
  CHECK(back.run.episode_count == 4);
  CHECK(back.run.hidden_width == 8);
  CHECK(back.run.ppo.batch_threshold == 8);
  fs::remove_all(dir);
}
