#pragma once

#include <array>

#include "alpha/fidelity.hpp"
#include "alpha/net.hpp"
#include "alpha/rng.hpp"

namespace alpha {

// cosine of the angle between two mean-action vectors; 0 if either norm
// falls below 1e-12
double cosine_similarity(const std::array<double, 2>& u,
                         const std::array<double, 2>& v);

// cosine-annealed alignment bar: starts at 0, reaches 1 at 90% of the run
// and stays pinned there so the final phase is pure high-fidelity
double alignment_threshold(int episode, int episode_count);

struct ChoiceProbs {
  double p_lf1 = 0.0;
  double p_lf2 = 0.0;
  double p_hf = 0.0;
};

// epsilon-greedy table over the four (aligned-lf1, aligned-lf2) cases;
// alignment means strictly exceeding the threshold
ChoiceProbs choice_probabilities(double s_cos_1, double s_cos_2, double theta,
                                 double epsilon);

struct AlignmentDecision {
  double s_cos_1 = 0.0;
  double s_cos_2 = 0.0;
  double theta = 0.0;
  ChoiceProbs probs;
  ModelId model = ModelId::kHf;
  bool aligned = false;  // drew a model whose probability is maximal
};

// draws lf1 / lf2 / hf in that order from the case probabilities
AlignmentDecision select_model(const Mlp& policy_lf1, const Mlp& policy_lf2,
                               const Mlp& policy_hf, DesignPoint s, int episode,
                               int episode_count, double epsilon, Rng& rng);

}  // namespace alpha
