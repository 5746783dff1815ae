#include "alpha/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "alpha/errors.hpp"

namespace alpha {

GaeResult compute_gae(const Sequence& seq, const ValueFn& value_fn,
                      const ValueFn& bootstrap_value_fn,
                      const PpoHyperparams& hp) {
  const size_t n = seq.size();
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  if (n == 0) return out;

  std::vector<double> v(n);
  for (size_t t = 0; t < n; ++t) v[t] = value_fn(seq.transitions[t].s);
  const double v_tail =
      seq.terminal ? 0.0 : bootstrap_value_fn(seq.transitions[n - 1].s_next);

  double gae = 0.0;
  for (size_t t = n; t-- > 0;) {
    const bool last = (t + 1 == n);
    const double v_next = last ? v_tail : v[t + 1];
    // terminal cut only applies to the final transition of a terminal run
    const double mask = (last && seq.terminal) ? 0.0 : 1.0;
    const double delta = seq.transitions[t].reward + hp.gamma * v_next * mask - v[t];
    gae = delta + hp.gamma * hp.lambda * gae;
    out.advantages[t] = gae;
    out.returns[t] = gae + v[t];
  }
  return out;
}

TrainingBatch make_batch(std::span<const Sequence> sequences,
                         const ValueFn& value_fn,
                         const ValueFn& bootstrap_value_fn,
                         const PpoHyperparams& hp) {
  TrainingBatch batch;
  for (const Sequence& seq : sequences) {
    const GaeResult gae = compute_gae(seq, value_fn, bootstrap_value_fn, hp);
    for (size_t t = 0; t < seq.size(); ++t) {
      const Transition& tr = seq.transitions[t];
      batch.s.push_back(tr.s);
      batch.a.push_back(tr.a);
      batch.behavior_log_prob.push_back(tr.behavior_log_prob);
      batch.advantage.push_back(gae.advantages[t]);
      batch.ret.push_back(gae.returns[t]);
    }
  }
  const size_t n = batch.size();
  if (n >= 2) {
    double mean = std::accumulate(batch.advantage.begin(), batch.advantage.end(), 0.0) /
                  static_cast<double>(n);
    double var = 0.0;
    for (double a : batch.advantage) var += (a - mean) * (a - mean);
    double sd = std::sqrt(var / static_cast<double>(n));
    if (sd >= 1e-8) {
      for (double& a : batch.advantage) a = (a - mean) / sd;
    }
  }
  return batch;
}

PolicyGrad policy_loss_grad(const Mlp& policy, const TrainingBatch& batch,
                            std::span<const size_t> idx,
                            const PpoHyperparams& hp) {
  PolicyGrad out;
  out.grad = GradBuffer::zeros_like(policy);
  const double n = static_cast<double>(idx.size());
  if (idx.empty()) return out;

  ForwardCache cache;
  for (size_t k : idx) {
    const std::array<double, 2> x{batch.s[k].x1, batch.s[k].x2};
    auto o = forward_cached(policy, x, cache);

    std::array<double, 2> mean, sig;
    for (int d = 0; d < 2; ++d) {
      mean[d] = std::tanh(o[d]);
      sig[d] = std::log1p(std::exp(-std::abs(o[2 + d]))) + std::max(o[2 + d], 0.0) +
               kStdFloor;
    }

    double logp = -1.8378770664093453;  // -ln(2 pi), two dims
    for (int d = 0; d < 2; ++d) {
      const double z = (batch.a[k][d] - mean[d]) / sig[d];
      logp += -0.5 * z * z - std::log(sig[d]);
    }
    const double ratio = std::exp(logp - batch.behavior_log_prob[k]);
    const double adv = batch.advantage[k];
    const double clipped = std::clamp(ratio, 1.0 - hp.clip_eps, 1.0 + hp.clip_eps);
    const double s1 = ratio * adv;
    const double s2 = clipped * adv;
    out.loss += -std::min(s1, s2) / n;

    double entropy = 1.0 + 1.8378770664093453;
    for (int d = 0; d < 2; ++d) entropy += std::log(sig[d]);
    out.entropy += entropy / n;

    // d(-min)/dratio: unclipped branch when it is the min (ties included),
    // otherwise only if the clip is inactive
    double dratio;
    if (s1 <= s2) {
      dratio = -adv / n;
    } else {
      const bool inside = ratio > 1.0 - hp.clip_eps && ratio < 1.0 + hp.clip_eps;
      dratio = inside ? -adv / n : 0.0;
    }
    const double dlogp = dratio * ratio;

    std::array<double, 4> dout{};
    for (int d = 0; d < 2; ++d) {
      const double diff = batch.a[k][d] - mean[d];
      const double dmean = dlogp * diff / (sig[d] * sig[d]);
      double dsig = dlogp * (diff * diff / (sig[d] * sig[d] * sig[d]) - 1.0 / sig[d]);
      dsig += -hp.entropy_coef / (n * sig[d]);  // entropy bonus
      dout[d] = dmean * (1.0 - mean[d] * mean[d]);            // tanh'
      dout[2 + d] = dsig / (1.0 + std::exp(-o[2 + d]));       // softplus'
    }
    backward(policy, cache, dout, out.grad);
  }
  return out;
}

ValueGrad value_loss_grad(const Mlp& value, const TrainingBatch& batch,
                          std::span<const size_t> idx) {
  ValueGrad out;
  out.grad = GradBuffer::zeros_like(value);
  const double n = static_cast<double>(idx.size());
  if (idx.empty()) return out;

  ForwardCache cache;
  for (size_t k : idx) {
    const std::array<double, 2> x{batch.s[k].x1, batch.s[k].x2};
    auto o = forward_cached(value, x, cache);
    const double err = o[0] - batch.ret[k];
    out.loss += err * err / n;
    const std::array<double, 1> dout{2.0 * err / n};
    backward(value, cache, dout, out.grad);
  }
  return out;
}

// initial action stddev; the softplus head at zero bias would give
// ln 2 ~= 0.69, wide enough that rollouts are nearly pure random walks,
// so the stddev-head biases are shifted to start exploration tighter
inline constexpr double kSigmaInit = 0.4;

// the mean-head rows start wider than the generic head init: alignment
// cosines compare mean fields, and a near-zero shared field would be
// rotated arbitrarily by the first update, destabilizing early alignment
inline constexpr double kMeanHeadInitScale = 2.5;

Learner make_learner(int hidden_width, double policy_lr, double value_lr,
                     Rng& rng) {
  Learner l;
  const std::array<int, 4> psizes{2, hidden_width, hidden_width, 4};
  const std::array<int, 4> vsizes{2, hidden_width, hidden_width, 1};
  l.policy = make_mlp(psizes, rng);
  l.value = make_mlp(vsizes, rng);
  Layer& head = l.policy.layers.back();
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < head.in; ++c) head.w[r * head.in + c] *= kMeanHeadInitScale;
  const double pre = std::log(std::exp(kSigmaInit - kStdFloor) - 1.0);
  head.b[2] = pre;
  head.b[3] = pre;
  l.policy_opt = AdamState::zeros_like(l.policy);
  l.value_opt = AdamState::zeros_like(l.value);
  l.policy_adam.lr = policy_lr;
  l.value_adam.lr = value_lr;
  return l;
}

Learner make_learner(int hidden_width, double learning_rate, Rng& rng) {
  return make_learner(hidden_width, learning_rate, learning_rate, rng);
}

LossReport ppo_update(Learner& learner, const TrainingBatch& batch,
                      const PpoHyperparams& hp, Rng& rng) {
  LossReport report;
  report.batch_size = static_cast<int64_t>(batch.size());
  if (batch.size() == 0) return report;

  // snapshot so a numeric fault leaves the learner untouched
  const Learner snapshot = learner;

  std::vector<size_t> order(batch.size());
  std::iota(order.begin(), order.end(), size_t{0});
  const size_t mb = std::max<size_t>(1, static_cast<size_t>(hp.minibatch_size));

  int64_t steps = 0;
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    rng.shuffle(std::span<size_t>(order));
    for (size_t start = 0; start < order.size(); start += mb) {
      const size_t len = std::min(mb, order.size() - start);
      const std::span<const size_t> idx(order.data() + start, len);

      PolicyGrad pg = policy_loss_grad(learner.policy, batch, idx, hp);
      ValueGrad vg = value_loss_grad(learner.value, batch, idx);
      if (!std::isfinite(pg.loss) || !std::isfinite(pg.entropy) ||
          !std::isfinite(vg.loss) || !pg.grad.all_finite() ||
          !vg.grad.all_finite()) {
        learner = snapshot;
        throw NumericError("ppo_update: non-finite loss or gradient");
      }
      adam_step(learner.policy, pg.grad, learner.policy_opt,
                learner.policy_adam);
      adam_step(learner.value, vg.grad, learner.value_opt, learner.value_adam);

      report.policy_loss += pg.loss;
      report.value_loss += vg.loss;
      report.entropy += pg.entropy;
      ++steps;
    }
  }
  if (steps > 0) {
    report.policy_loss /= static_cast<double>(steps);
    report.value_loss /= static_cast<double>(steps);
    report.entropy /= static_cast<double>(steps);
  }
  return report;
}

}  // namespace alpha
