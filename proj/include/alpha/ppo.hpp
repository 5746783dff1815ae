#pragma once

#include <functional>
#include <span>
#include <vector>

#include "alpha/fidelity.hpp"
#include "alpha/net.hpp"

namespace alpha {

struct PpoHyperparams {
  double gamma = 0.99;
  double lambda = 0.95;
  double clip_eps = 0.2;
  int epochs = 10;
  int minibatch_size = 128;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  int batch_threshold = 512;
};

struct Transition {
  DesignPoint s;
  Action a{};
  double reward = 0.0;
  DesignPoint s_next;
  double behavior_log_prob = 0.0;
  ModelId model = ModelId::kHf;
  bool aligned = false;
  int episode = 0;
  int step = 0;
};

// contiguous same-model run of transitions; terminal iff the last
// transition ended its episode
struct Sequence {
  std::vector<Transition> transitions;
  bool terminal = false;
  size_t size() const { return transitions.size(); }
};

using ValueFn = std::function<double(DesignPoint)>;

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantage + V(s)
};

// generalized advantage estimation over one sequence; non-terminal tails
// bootstrap with bootstrap_value_fn(s_next of the last transition)
GaeResult compute_gae(const Sequence& seq, const ValueFn& value_fn,
                      const ValueFn& bootstrap_value_fn,
                      const PpoHyperparams& hp);

struct TrainingBatch {
  std::vector<DesignPoint> s;
  std::vector<Action> a;
  std::vector<double> behavior_log_prob;
  std::vector<double> advantage;
  std::vector<double> ret;
  size_t size() const { return s.size(); }
};

// flattens sequences, computes advantages/returns, and normalizes the
// advantages to zero mean / unit population std (skipped for batches
// smaller than 2 or std below 1e-8)
TrainingBatch make_batch(std::span<const Sequence> sequences,
                         const ValueFn& value_fn,
                         const ValueFn& bootstrap_value_fn,
                         const PpoHyperparams& hp);

struct PolicyGrad {
  double loss = 0.0;     // clipped surrogate only (entropy reported apart)
  double entropy = 0.0;  // mean gaussian entropy over the minibatch
  GradBuffer grad;       // d(loss - entropy_coef * entropy)/dparams
};

PolicyGrad policy_loss_grad(const Mlp& policy, const TrainingBatch& batch,
                            std::span<const size_t> idx,
                            const PpoHyperparams& hp);

struct ValueGrad {
  double loss = 0.0;  // mse against returns
  GradBuffer grad;
};

ValueGrad value_loss_grad(const Mlp& value, const TrainingBatch& batch,
                          std::span<const size_t> idx);

struct Learner {
  Mlp policy;
  Mlp value;
  AdamState policy_opt;
  AdamState value_opt;
  AdamConfig policy_adam;
  AdamConfig value_adam;
};

Learner make_learner(int hidden_width, double policy_lr, double value_lr,
                     Rng& rng);
// single-rate convenience: both optimizers share one learning rate
Learner make_learner(int hidden_width, double learning_rate, Rng& rng);

struct LossReport {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  int64_t batch_size = 0;
};

// clipped-surrogate ppo with per-minibatch adam steps; a non-finite loss or
// gradient restores the learner to its entry state and throws NumericError
LossReport ppo_update(Learner& learner, const TrainingBatch& batch,
                      const PpoHyperparams& hp, Rng& rng);

}  // namespace alpha
