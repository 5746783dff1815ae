#include "alpha/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "alpha/errors.hpp"

namespace alpha {

namespace {

constexpr double kE = std::numbers::e;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double clip01(double x) { return std::clamp(x, -1.0, 1.0); }

// physical-domain responses; s arrives scaled and is blown up by d here
double raw_eval(ModelId m, DesignPoint s) {
  const double d = kDomainScale;
  const double x1 = s.x1 * d;
  const double x2 = s.x2 * d;
  switch (m) {
    case ModelId::kHf:
      // two full components: deep basin at (0.5, 0.5) d, shallow at -(0.5, 0.5) d
      return eval_g(x1, x2, -0.5 * d, -0.5 * d, 1.0) +
             eval_h(x1, x2, -0.5 * d, -0.5 * d) +
             eval_g(x1, x2, 0.5 * d, 0.5 * d, 1.5) +
             eval_h(x1, x2, 0.5 * d, 0.5 * d);
    case ModelId::kLf1:
      // keeps only the shallow attraction, centers pulled in to 0.3 d,
      // oscillations replaced by their mean level
      return eval_g(x1, x2, -0.3 * d, -0.3 * d, 1.0) + kHMean +
             eval_g(x1, x2, 0.3 * d, 0.3 * d, 0.0) + kHMean;
    case ModelId::kLf2:
      return eval_g(x1, x2, -0.3 * d, -0.3 * d, 0.0) + kHMean +
             eval_g(x1, x2, 0.3 * d, 0.3 * d, 1.5) + kHMean;
  }
  throw NumericError("raw_eval: bad model id");
}

}  // namespace

std::string_view to_string(ModelId m) {
  switch (m) {
    case ModelId::kLf1: return "lf1";
    case ModelId::kLf2: return "lf2";
    case ModelId::kHf: return "hf";
  }
  return "?";
}

std::optional<ModelId> model_from_string(std::string_view s) {
  if (s == "lf1") return ModelId::kLf1;
  if (s == "lf2") return ModelId::kLf2;
  if (s == "hf") return ModelId::kHf;
  return std::nullopt;
}

void CostLedger::charge(ModelId m) {
  switch (m) {
    case ModelId::kLf1: ++count_lf1; break;
    case ModelId::kLf2: ++count_lf2; break;
    case ModelId::kHf: ++count_hf; break;
  }
}

int64_t CostLedger::count(ModelId m) const {
  switch (m) {
    case ModelId::kLf1: return count_lf1;
    case ModelId::kLf2: return count_lf2;
    case ModelId::kHf: return count_hf;
  }
  return 0;
}

double CostLedger::mean_cost(ModelId m) {
  return m == ModelId::kHf ? kMeanCostHf : kMeanCostLf;
}

double CostLedger::total_seconds() const {
  return static_cast<double>(count_lf1) * kMeanCostLf +
         static_cast<double>(count_lf2) * kMeanCostLf +
         static_cast<double>(count_hf) * kMeanCostHf;
}

double eval_g(double x1, double x2, double c1, double c2, double alpha) {
  const double dx1 = x1 - c1;
  const double dx2 = x2 - c2;
  const double r = std::sqrt(0.5 * (dx1 * dx1 + dx2 * dx2));
  return 20.0 - 20.0 * alpha * std::exp(-0.2 * r);
}

double eval_h(double x1, double x2, double c1, double c2) {
  return kE - std::exp(0.5 * (std::cos(kTwoPi * (x1 - c1)) +
                              std::cos(kTwoPi * (x2 - c2))));
}

double eval_model(ModelId m, DesignPoint s, CostLedger& ledger) {
  ledger.charge(m);
  return raw_eval(m, s);
}

double quality(ModelId m, DesignPoint s) {
  return 1.0 - raw_eval(m, s) / kFNorm;
}

DesignPoint sample_seed(Rng& rng) {
  DesignPoint p;
  p.x1 = rng.uniform(-1.0, 1.0);
  p.x2 = rng.uniform(-1.0, 1.0);
  return p;
}

StepResult env_step(DesignPoint s, Action a, ModelId m, double cached_quality,
                    CostLedger& ledger) {
  if (!std::isfinite(s.x1) || !std::isfinite(s.x2) || !std::isfinite(a[0]) ||
      !std::isfinite(a[1]) || !std::isfinite(cached_quality)) {
    throw NumericError("env_step: non-finite state, action, or cached quality");
  }
  StepResult out;
  out.next.x1 = clip01(s.x1 + kActionScale * a[0]);
  out.next.x2 = clip01(s.x2 + kActionScale * a[1]);
  out.quality_next = 1.0 - eval_model(m, out.next, ledger) / kFNorm;
  out.reward = out.quality_next - cached_quality;
  return out;
}

}  // namespace alpha
