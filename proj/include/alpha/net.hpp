#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "alpha/fidelity.hpp"
#include "alpha/rng.hpp"

namespace alpha {

enum class Activation { kRelu, kTanh, kSoftplus, kLinear };

struct Layer {
  int in = 0;
  int out = 0;
  std::vector<double> w;  // out x in, row-major
  std::vector<double> b;  // out
  Activation act = Activation::kLinear;
};

struct Mlp {
  std::vector<Layer> layers;
  int input_dim() const { return layers.front().in; }
  int output_dim() const { return layers.back().out; }
};

// relu trunk + linear output; hidden weights N(0, sqrt(2/fan_in)), output
// head N(0, 0.01), all biases zero
Mlp make_mlp(std::span<const int> sizes, Rng& rng);

std::vector<double> forward(const Mlp& net, std::span<const double> x);

// per-layer activations kept for backprop; act[0] is the input
struct ForwardCache {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> act;
};

std::span<const double> forward_cached(const Mlp& net, std::span<const double> x,
                                       ForwardCache& cache);

struct GradBuffer {
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> b;
  static GradBuffer zeros_like(const Mlp& net);
  void clear();
  bool all_finite() const;
};

// accumulates dL/dparams given dL/doutput for the sample in `cache`
void backward(const Mlp& net, const ForwardCache& cache,
              std::span<const double> dout, GradBuffer& grad);

inline constexpr double kStdFloor = 1e-3;

struct PolicyOutput {
  std::array<double, 2> mean{};
  std::array<double, 2> stddev{};
};

// 2 -> hidden -> hidden -> 4 trunk; first two outputs squash through tanh
// into the mean, last two through softplus (+ floor) into the stddev
PolicyOutput policy_forward(const Mlp& policy, DesignPoint s);
double value_forward(const Mlp& value, DesignPoint s);

double gaussian_log_prob(const PolicyOutput& out, const Action& a);
double gaussian_entropy(const PolicyOutput& out);
// mean + stddev * z, clamped into the action box [-1,1]^2
Action gaussian_sample(const PolicyOutput& out, Rng& rng);

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<std::vector<double>> mw, vw, mb, vb;
  int64_t t = 0;
  static AdamState zeros_like(const Mlp& net);
};

void adam_step(Mlp& net, const GradBuffer& grad, AdamState& state,
               const AdamConfig& cfg);

// ---- checkpoint file format ------------------------------------------------
// magic "ALPHANN1" | u32 tensor count | per tensor:
//   u32 name length, name bytes, u32 rank, u64 dims..., f64 row-major data
// all integers and doubles little-endian

struct NamedTensor {
  std::string name;
  std::vector<uint64_t> dims;
  std::vector<double> data;
};

void save_tensors(const std::filesystem::path& path,
                  std::span<const NamedTensor> tensors);
std::vector<NamedTensor> load_tensors(const std::filesystem::path& path);

// a checkpoint holds one learner: tensors policy.layer{i}.{w,b} and
// value.layer{i}.{w,b}; architecture is recovered from the shapes
void checkpoint_save(const std::filesystem::path& path, const Mlp& policy,
                     const Mlp& value);
struct LearnerNets {
  Mlp policy;
  Mlp value;
};
LearnerNets checkpoint_load(const std::filesystem::path& path);

}  // namespace alpha
