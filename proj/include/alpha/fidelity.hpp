#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "alpha/rng.hpp"

namespace alpha {

// design domain is [-1,1]^2 in scaled coordinates; model formulas live on
// the physical domain [-d, d]^2
inline constexpr double kDomainScale = 32.768;
inline constexpr double kFNorm = 50.0;         // quality = 1 - f / kFNorm
inline constexpr double kActionScale = 0.2;    // s' = clip(s + 0.2 a)
inline constexpr double kMeanCostHf = 275e-6;  // seconds per evaluation
inline constexpr double kMeanCostLf = 32e-6;

enum class ModelId : int { kLf1 = 0, kLf2 = 1, kHf = 2 };

std::string_view to_string(ModelId m);
std::optional<ModelId> model_from_string(std::string_view s);

struct DesignPoint {
  double x1 = 0.0;
  double x2 = 0.0;
};

using Action = std::array<double, 2>;

// evaluation counts per model; costs are fixed per-model means, so total
// time is exactly the count/cost dot product
struct CostLedger {
  int64_t count_lf1 = 0;
  int64_t count_lf2 = 0;
  int64_t count_hf = 0;

  void charge(ModelId m);
  int64_t count(ModelId m) const;
  int64_t total_count() const { return count_lf1 + count_lf2 + count_hf; }
  static double mean_cost(ModelId m);
  double total_seconds() const;
};

// attraction term: 20 - 20 a exp(-0.2 sqrt(0.5 ((x1-c1)^2 + (x2-c2)^2)))
double eval_g(double x1, double x2, double c1, double c2, double alpha);

// oscillation term: e - exp(0.5 (cos 2pi(x1-c1) + cos 2pi(x2-c2)))
double eval_h(double x1, double x2, double c1, double c2);

// mean oscillation level used by the low-fidelity surrogates
inline const double kHMean = 0.5 * (std::exp(1.0) - std::exp(-1.0));

// model response at a scaled design point; charges the ledger
double eval_model(ModelId m, DesignPoint s, CostLedger& ledger);

// 1 - f / kFNorm without touching the ledger (analysis helper)
double quality(ModelId m, DesignPoint s);

// uniform seed design in [-1,1)^2
DesignPoint sample_seed(Rng& rng);

struct StepResult {
  DesignPoint next;
  double reward = 0.0;
  double quality_next = 0.0;  // feed back in as cached_quality next step
};

// one environment transition; costs exactly one ledgered evaluation thanks
// to the caller-supplied cached quality of the current state
StepResult env_step(DesignPoint s, Action a, ModelId m, double cached_quality,
                    CostLedger& ledger);

}  // namespace alpha
