#include "alpha/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "alpha/errors.hpp"

namespace alpha {

namespace fs = std::filesystem;

std::vector<DesignPoint> make_seeds(uint64_t rng_seed, int count) {
  Rng rng(Rng::mix(rng_seed, 0));
  std::vector<DesignPoint> seeds;
  seeds.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) seeds.push_back(sample_seed(rng));
  return seeds;
}

ModelId scheduled_model(AgentKind agent, int step, int episode_length) {
  switch (agent) {
    case AgentKind::kHfOnly: return ModelId::kHf;
    case AgentKind::kLf1Only: return ModelId::kLf1;
    case AgentKind::kLf2Only: return ModelId::kLf2;
    case AgentKind::kHier1:
    case AgentKind::kHier2: {
      const int n = static_cast<int>(
          std::llround(0.35 * static_cast<double>(episode_length)));
      const ModelId first =
          agent == AgentKind::kHier1 ? ModelId::kLf1 : ModelId::kLf2;
      const ModelId second =
          agent == AgentKind::kHier1 ? ModelId::kLf2 : ModelId::kLf1;
      if (step < n) return first;
      if (step < 2 * n) return second;
      return ModelId::kHf;
    }
    case AgentKind::kAlpha: break;
  }
  throw Error("scheduled_model: adaptive agent has no fixed schedule");
}

std::vector<Sequence>& ExperienceBuffers::of(ModelId m) {
  switch (m) {
    case ModelId::kLf1: return lf1;
    case ModelId::kLf2: return lf2;
    case ModelId::kHf: return hf;
  }
  throw Error("ExperienceBuffers::of: bad model id");
}

const std::vector<Sequence>& ExperienceBuffers::of(ModelId m) const {
  return const_cast<ExperienceBuffers*>(this)->of(m);
}

size_t ExperienceBuffers::transition_count(ModelId m) const {
  size_t n = 0;
  for (const Sequence& s : of(m)) n += s.size();
  return n;
}

void ExperienceBuffers::begin_episode() {
  mark_lf1 = lf1.size();
  mark_lf2 = lf2.size();
}

namespace {

int64_t augment_from(const std::vector<Sequence>& source, size_t mark,
                     std::vector<Sequence>& hf) {
  int64_t copied = 0;
  for (size_t si = mark; si < source.size(); ++si) {
    const Sequence& seq = source[si];
    size_t t = 0;
    while (t < seq.size()) {
      if (!seq.transitions[t].aligned) {
        ++t;
        continue;
      }
      size_t end = t;
      while (end < seq.size() && seq.transitions[end].aligned) ++end;
      Sequence sub;
      sub.transitions.assign(seq.transitions.begin() + static_cast<ptrdiff_t>(t),
                             seq.transitions.begin() + static_cast<ptrdiff_t>(end));
      // the copy ends the episode only if it reaches the end of a run that did
      sub.terminal = seq.terminal && end == seq.size();
      copied += static_cast<int64_t>(sub.size());
      hf.push_back(std::move(sub));
      t = end;
    }
  }
  return copied;
}

}  // namespace

int64_t augment_hf_buffer(ExperienceBuffers& buffers) {
  int64_t copied = augment_from(buffers.lf1, buffers.mark_lf1, buffers.hf);
  copied += augment_from(buffers.lf2, buffers.mark_lf2, buffers.hf);
  return copied;
}

std::vector<EvalRow> evaluate_policy(const Mlp& policy,
                                     std::span<const DesignPoint> seeds,
                                     int episode_length) {
  std::vector<EvalRow> rows;
  rows.reserve(seeds.size() * static_cast<size_t>(episode_length + 1));
  for (size_t i = 0; i < seeds.size(); ++i) {
    DesignPoint s = seeds[i];
    rows.push_back({static_cast<int>(i), 0, s, quality(ModelId::kHf, s)});
    for (int t = 1; t <= episode_length; ++t) {
      const PolicyOutput out = policy_forward(policy, s);
      s.x1 = std::clamp(s.x1 + kActionScale * out.mean[0], -1.0, 1.0);
      s.x2 = std::clamp(s.x2 + kActionScale * out.mean[1], -1.0, 1.0);
      rows.push_back({static_cast<int>(i), t, s, quality(ModelId::kHf, s)});
    }
  }
  return rows;
}

namespace {

struct RunState {
  CostLedger ledger;
  std::vector<UsageRow> usage;
  std::vector<TrainingRow> training;
};

void train_if_ready(ModelId m, std::vector<Sequence>& seqs, Learner& learner,
                    const PpoHyperparams& hp, int episode, Rng& rng,
                    RunState& st) {
  size_t count = 0;
  for (const Sequence& s : seqs) count += s.size();
  if (count < static_cast<size_t>(hp.batch_threshold)) return;

  const ValueFn vf = [&learner](DesignPoint p) {
    return value_forward(learner.value, p);
  };
  const TrainingBatch batch = make_batch(seqs, vf, vf, hp);
  try {
    const LossReport rep = ppo_update(learner, batch, hp, rng);
    st.training.push_back({episode, m, rep.policy_loss, rep.value_loss,
                           rep.entropy, rep.batch_size});
    seqs.clear();
  } catch (const NumericError& e) {
    // keep the buffer; the next episode retries with more data
    std::fprintf(stderr, "warning: update for %s skipped at episode %d: %s\n",
                 std::string(to_string(m)).c_str(), episode, e.what());
  }
}

void append_transition(std::vector<Sequence>& seqs, bool extend,
                       const Transition& tr, bool episode_end) {
  if (!extend || seqs.empty()) seqs.emplace_back();
  seqs.back().transitions.push_back(tr);
  if (episode_end) seqs.back().terminal = true;
}

void save_checkpoints(const fs::path& dir, int episodes_done, AgentKind agent,
                      const Learner* lf1, const Learner* lf2,
                      const Learner* hf, const Learner* single) {
  auto name = [&](const char* tag) {
    return dir / ("ep" + std::to_string(episodes_done) + "_" + tag + ".alphann");
  };
  if (agent == AgentKind::kAlpha) {
    checkpoint_save(name("lf1"), lf1->policy, lf1->value);
    checkpoint_save(name("lf2"), lf2->policy, lf2->value);
    checkpoint_save(name("hf"), hf->policy, hf->value);
  } else {
    checkpoint_save(name("policy"), single->policy, single->value);
  }
}

}  // namespace

void run_training(const CliConfig& cli, const fs::path& out_dir) {
  cli.validate();
  const RunConfig& cfg = cli.run;
  const PpoHyperparams& hp = cfg.ppo;
  fs::create_directories(out_dir / "checkpoints");

  const std::vector<DesignPoint> seeds = make_seeds(cfg.rng_seed, cfg.seed_count);
  Rng init_rng(Rng::mix(cfg.rng_seed, 1));
  Rng train_rng(Rng::mix(cfg.rng_seed, 2));

  // one shared initialization: the adaptive agent needs its three policies
  // to coincide at the start (maximal alignment), and reusing the same
  // stream keeps every agent kind comparable under one rng_seed
  const Learner proto = make_learner(cfg.hidden_width, cfg.learning_rate,
                                     cfg.value_learning_rate, init_rng);

  RunState st;
  st.usage.reserve(static_cast<size_t>(cfg.episode_count) * cfg.episode_length);

  const bool adaptive = cfg.agent == AgentKind::kAlpha;
  Learner lf1 = proto, lf2 = proto, hf = proto;  // adaptive trio
  Learner single = proto;                        // scheduled baselines
  ExperienceBuffers buffers;
  std::vector<Sequence> single_buffer;

  auto learner_of = [&](ModelId m) -> Learner& {
    switch (m) {
      case ModelId::kLf1: return lf1;
      case ModelId::kLf2: return lf2;
      case ModelId::kHf: return hf;
    }
    throw Error("run_training: bad model id");
  };

  for (int e = 0; e < cfg.episode_count; ++e) {
    DesignPoint s = seeds[static_cast<size_t>(e)];
    buffers.begin_episode();
    double q_cache = 0.0;
    ModelId prev_model = ModelId::kHf;

    for (int t = 0; t < cfg.episode_length; ++t) {
      UsageRow row;
      row.episode = e;
      row.step = t;
      row.s = s;

      ModelId m;
      bool aligned;
      if (adaptive) {
        const AlignmentDecision dec =
            select_model(lf1.policy, lf2.policy, hf.policy, s, e,
                         cfg.episode_count, cfg.epsilon, train_rng);
        m = dec.model;
        aligned = dec.aligned;
        row.s_cos_1 = dec.s_cos_1;
        row.s_cos_2 = dec.s_cos_2;
        row.theta = dec.theta;
        row.p_lf1 = dec.probs.p_lf1;
        row.p_lf2 = dec.probs.p_lf2;
        row.p_hf = dec.probs.p_hf;
      } else {
        m = scheduled_model(cfg.agent, t, cfg.episode_length);
        aligned = true;  // degenerate one-point distribution
        row.p_lf1 = m == ModelId::kLf1 ? 1.0 : 0.0;
        row.p_lf2 = m == ModelId::kLf2 ? 1.0 : 0.0;
        row.p_hf = m == ModelId::kHf ? 1.0 : 0.0;
      }
      row.model = m;
      row.aligned = aligned;

      // prime the quality cache so each step charges exactly one evaluation
      if (t == 0) q_cache = quality(m, s);

      Learner& actor = adaptive ? learner_of(m) : single;
      const PolicyOutput out = policy_forward(actor.policy, s);
      const Action a = gaussian_sample(out, train_rng);

      Transition tr;
      tr.s = s;
      tr.a = a;
      tr.behavior_log_prob = gaussian_log_prob(out, a);
      tr.model = m;
      tr.aligned = aligned;
      tr.episode = e;
      tr.step = t;

      const StepResult sr = env_step(s, a, m, q_cache, st.ledger);
      tr.reward = sr.reward;
      tr.s_next = sr.next;

      const bool extend = t > 0 && m == prev_model;
      const bool episode_end = t + 1 == cfg.episode_length;
      if (adaptive) {
        append_transition(buffers.of(m), extend, tr, episode_end);
      } else {
        append_transition(single_buffer, extend, tr, episode_end);
      }

      st.usage.push_back(row);
      s = sr.next;
      q_cache = sr.quality_next;
      prev_model = m;
    }

    if (adaptive) {
      augment_hf_buffer(buffers);
      train_if_ready(ModelId::kLf1, buffers.lf1, lf1, hp, e, train_rng, st);
      train_if_ready(ModelId::kLf2, buffers.lf2, lf2, hp, e, train_rng, st);
      train_if_ready(ModelId::kHf, buffers.hf, hf, hp, e, train_rng, st);
    } else {
      // single learner trained on every step; sequences are still split per
      // model so value bootstraps respect the contiguity rule
      ModelId tag = ModelId::kHf;
      if (cfg.agent == AgentKind::kLf1Only) tag = ModelId::kLf1;
      if (cfg.agent == AgentKind::kLf2Only) tag = ModelId::kLf2;
      train_if_ready(tag, single_buffer, single, hp, e, train_rng, st);
    }

    const int done = e + 1;
    if (done % cfg.checkpoint_interval == 0 || done == cfg.episode_count) {
      save_checkpoints(out_dir / "checkpoints", done, cfg.agent, &lf1, &lf2,
                       &hf, &single);
    }
  }

  atomic_write_text(out_dir / "config.cfg", serialize_config(cli));
  write_usage_csv(out_dir / "usage.csv", st.usage);
  write_training_csv(out_dir / "training.csv", st.training);
  write_ledger_csv(out_dir / "ledger.csv", st.ledger);

  const Mlp& eval_policy_net = adaptive ? hf.policy : single.policy;
  write_eval_csv(out_dir / "eval.csv",
                 evaluate_policy(eval_policy_net, seeds, cfg.episode_length));
}

}  // namespace alpha
