#include "alpha/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace alpha {

double cosine_similarity(const std::array<double, 2>& u,
                         const std::array<double, 2>& v) {
  const double nu = std::sqrt(u[0] * u[0] + u[1] * u[1]);
  const double nv = std::sqrt(v[0] * v[0] + v[1] * v[1]);
  if (nu < 1e-12 || nv < 1e-12) return 0.0;
  const double c = (u[0] * v[0] + u[1] * v[1]) / (nu * nv);
  return std::clamp(c, -1.0, 1.0);
}

double alignment_threshold(int episode, int episode_count) {
  const double knee = 0.9 * static_cast<double>(episode_count);
  if (static_cast<double>(episode) >= knee) return 1.0;
  const double phase = std::numbers::pi * static_cast<double>(episode) / knee;
  return std::cos(std::numbers::pi / 4.0 * (1.0 + std::cos(phase)));
}

ChoiceProbs choice_probabilities(double s_cos_1, double s_cos_2, double theta,
                                 double epsilon) {
  const bool a1 = s_cos_1 > theta;
  const bool a2 = s_cos_2 > theta;
  if (a1 && a2) return {(1.0 - epsilon) / 2.0, (1.0 - epsilon) / 2.0, epsilon};
  if (a1) return {1.0 - epsilon, epsilon / 2.0, epsilon / 2.0};
  if (a2) return {epsilon / 2.0, 1.0 - epsilon, epsilon / 2.0};
  return {epsilon / 2.0, epsilon / 2.0, 1.0 - epsilon};
}

AlignmentDecision select_model(const Mlp& policy_lf1, const Mlp& policy_lf2,
                               const Mlp& policy_hf, DesignPoint s, int episode,
                               int episode_count, double epsilon, Rng& rng) {
  AlignmentDecision d;
  const auto mean_lf1 = policy_forward(policy_lf1, s).mean;
  const auto mean_lf2 = policy_forward(policy_lf2, s).mean;
  const auto mean_hf = policy_forward(policy_hf, s).mean;
  d.s_cos_1 = cosine_similarity(mean_lf1, mean_hf);
  d.s_cos_2 = cosine_similarity(mean_lf2, mean_hf);
  d.theta = alignment_threshold(episode, episode_count);
  d.probs = choice_probabilities(d.s_cos_1, d.s_cos_2, d.theta, epsilon);

  const double u = rng.uniform();
  double p_drawn;
  if (u < d.probs.p_lf1) {
    d.model = ModelId::kLf1;
    p_drawn = d.probs.p_lf1;
  } else if (u < d.probs.p_lf1 + d.probs.p_lf2) {
    d.model = ModelId::kLf2;
    p_drawn = d.probs.p_lf2;
  } else {
    d.model = ModelId::kHf;
    p_drawn = d.probs.p_hf;
  }
  const double p_max =
      std::max({d.probs.p_lf1, d.probs.p_lf2, d.probs.p_hf});
  d.aligned = (p_drawn == p_max);
  return d;
}

}  // namespace alpha
