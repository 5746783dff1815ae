#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <doctest.h>

#include "alpha/errors.hpp"
#include "alpha/net.hpp"
#include "alpha/ppo.hpp"

using namespace alpha;
namespace fs = std::filesystem;

namespace {

Mlp zero_policy(int width) {
  Rng rng(0);
  const std::array<int, 4> sizes{2, width, width, 4};
  Mlp net = make_mlp(sizes, rng);
  for (Layer& l : net.layers) {
    std::fill(l.w.begin(), l.w.end(), 0.0);
    std::fill(l.b.begin(), l.b.end(), 0.0);
  }
  return net;
}

fs::path temp_file(const char* name) {
  return fs::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("zero-parameter policy: centered mean, softplus(0) stddev") {
  const Mlp net = zero_policy(8);
  const PolicyOutput out = policy_forward(net, {0.37, -0.81});
  CHECK(out.mean[0] == 0.0);
  CHECK(out.mean[1] == 0.0);
  CHECK(out.stddev[0] == doctest::Approx(std::log(2.0) + 1e-3).epsilon(1e-15));
  CHECK(out.stddev[1] == doctest::Approx(std::log(2.0) + 1e-3).epsilon(1e-15));
}

TEST_CASE("initialization shapes and scales") {
  Rng rng(5);
  const std::array<int, 4> sizes{2, 64, 64, 4};
  const Mlp net = make_mlp(sizes, rng);
  REQUIRE(net.layers.size() == 3);
  CHECK(net.layers[0].act == Activation::kRelu);
  CHECK(net.layers[1].act == Activation::kRelu);
  CHECK(net.layers[2].act == Activation::kLinear);
  for (const Layer& l : net.layers)
    for (double b : l.b) CHECK(b == 0.0);

  // sample std of the head should sit near 0.01
  double ss = 0.0;
  for (double w : net.layers[2].w) ss += w * w;
  const double head_std = std::sqrt(ss / static_cast<double>(net.layers[2].w.size()));
  CHECK(head_std > 0.005);
  CHECK(head_std < 0.02);

  // hidden layer near sqrt(2/64) = 0.177
  ss = 0.0;
  for (double w : net.layers[1].w) ss += w * w;
  const double hid_std = std::sqrt(ss / static_cast<double>(net.layers[1].w.size()));
  CHECK(hid_std > 0.14);
  CHECK(hid_std < 0.22);
}

TEST_CASE("forward is deterministic and finite") {
  Rng rng(9);
  const std::array<int, 4> sizes{2, 32, 32, 4};
  const Mlp net = make_mlp(sizes, rng);
  Rng points(10);
  for (int i = 0; i < 1000; ++i) {
    const DesignPoint s{points.uniform(-1.0, 1.0), points.uniform(-1.0, 1.0)};
    const PolicyOutput a = policy_forward(net, s);
    const PolicyOutput b = policy_forward(net, s);
    CHECK(a.mean == b.mean);
    CHECK(a.stddev == b.stddev);
    for (int d = 0; d < 2; ++d) {
      CHECK(std::isfinite(a.mean[d]));
      CHECK(a.stddev[d] >= kStdFloor);
      CHECK(std::abs(a.mean[d]) <= 1.0);
    }
  }
}

TEST_CASE("gaussian log density spot values") {
  PolicyOutput out;
  out.mean = {0.2, -0.4};
  out.stddev = {1.0, 1.0};
  const double log_two_pi = std::log(2.0 * std::numbers::pi);
  CHECK(gaussian_log_prob(out, {0.2, -0.4}) ==
        doctest::Approx(-log_two_pi).epsilon(1e-15));
  CHECK(gaussian_log_prob(out, {1.2, -0.4}) ==
        doctest::Approx(-log_two_pi - 0.5).epsilon(1e-14));
}

TEST_CASE("gaussian density integrates to one") {
  PolicyOutput out;
  out.mean = {0.2, -0.3};
  out.stddev = {0.7, 1.3};
  // tensor-product trapezoid over +-8 sigma
  const int n = 400;
  double integral = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double a0 = out.mean[0] + (i * 2.0 / n - 1.0) * 8.0 * out.stddev[0];
    const double w0 = (i == 0 || i == n) ? 0.5 : 1.0;
    for (int j = 0; j <= n; ++j) {
      const double a1 = out.mean[1] + (j * 2.0 / n - 1.0) * 8.0 * out.stddev[1];
      const double w1 = (j == 0 || j == n) ? 0.5 : 1.0;
      integral += w0 * w1 * std::exp(gaussian_log_prob(out, {a0, a1}));
    }
  }
  integral *= (16.0 * out.stddev[0] / n) * (16.0 * out.stddev[1] / n);
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("entropy matches the closed form") {
  PolicyOutput out;
  out.mean = {0.0, 0.0};
  out.stddev = {0.5, 2.0};
  const double expected = std::log(2.0 * std::numbers::pi * std::numbers::e) +
                          std::log(0.5) + std::log(2.0);
  CHECK(gaussian_entropy(out) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("sampling at the stddev floor hugs the mean") {
  PolicyOutput out;
  out.mean = {0.5, -0.5};
  out.stddev = {kStdFloor, kStdFloor};
  Rng rng(3);
  int close = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const Action a = gaussian_sample(out, rng);
    CHECK(a[0] >= -1.0);
    CHECK(a[0] <= 1.0);
    if (std::abs(a[0] - 0.5) < 0.01 && std::abs(a[1] + 0.5) < 0.01) ++close;
  }
  CHECK(static_cast<double>(close) / n >= 0.999);
}

TEST_CASE("samples are clamped into the action box") {
  PolicyOutput out;
  out.mean = {0.99, -0.99};
  out.stddev = {2.0, 2.0};
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Action a = gaussian_sample(out, rng);
    CHECK(a[0] <= 1.0);
    CHECK(a[0] >= -1.0);
    CHECK(a[1] <= 1.0);
    CHECK(a[1] >= -1.0);
  }
}

// finite-difference check of the analytic gradients on a small policy
TEST_CASE("policy loss gradient matches central differences") {
  Rng rng(21);
  const std::array<int, 4> sizes{2, 8, 8, 4};
  Mlp policy = make_mlp(sizes, rng);

  TrainingBatch batch;
  Rng data(22);
  for (int i = 0; i < 12; ++i) {
    const DesignPoint s{data.uniform(-1.0, 1.0), data.uniform(-1.0, 1.0)};
    const PolicyOutput out = policy_forward(policy, s);
    const Action a = gaussian_sample(out, data);
    batch.s.push_back(s);
    batch.a.push_back(a);
    // behavior log-probs deliberately off-policy so the ratio is not 1
    batch.behavior_log_prob.push_back(gaussian_log_prob(out, a) +
                                      data.uniform(-0.3, 0.3));
    batch.advantage.push_back(data.uniform(-2.0, 2.0));
    batch.ret.push_back(data.uniform(-1.0, 1.0));
  }
  std::vector<size_t> idx(batch.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;

  PpoHyperparams hp;
  hp.entropy_coef = 0.01;
  const PolicyGrad g = policy_loss_grad(policy, batch, idx, hp);

  auto loss_at = [&]() {
    const PolicyGrad r = policy_loss_grad(policy, batch, idx, hp);
    return r.loss - hp.entropy_coef * r.entropy;
  };

  const double h = 1e-5;
  double max_rel = 0.0;
  for (size_t l = 0; l < policy.layers.size(); ++l) {
    for (size_t k = 0; k < policy.layers[l].w.size(); ++k) {
      double& p = policy.layers[l].w[k];
      const double saved = p;
      p = saved + h;
      const double up = loss_at();
      p = saved - h;
      const double dn = loss_at();
      p = saved;
      const double fd = (up - dn) / (2.0 * h);
      const double an = g.grad.w[l][k];
      // relative where the gradient is meaningful, absolute (1e-7 at the
      // 1e-5 bound) below the finite-difference noise floor
      const double mag = std::max(std::abs(an), std::abs(fd));
      const double rel = mag >= 1e-4 ? std::abs(an - fd) / mag
                                     : std::abs(an - fd) / 1e-2;
      max_rel = std::max(max_rel, rel);
    }
    for (size_t k = 0; k < policy.layers[l].b.size(); ++k) {
      double& p = policy.layers[l].b[k];
      const double saved = p;
      p = saved + h;
      const double up = loss_at();
      p = saved - h;
      const double dn = loss_at();
      p = saved;
      const double fd = (up - dn) / (2.0 * h);
      const double an = g.grad.b[l][k];
      // relative where the gradient is meaningful, absolute (1e-7 at the
      // 1e-5 bound) below the finite-difference noise floor
      const double mag = std::max(std::abs(an), std::abs(fd));
      const double rel = mag >= 1e-4 ? std::abs(an - fd) / mag
                                     : std::abs(an - fd) / 1e-2;
      max_rel = std::max(max_rel, rel);
    }
  }
  CHECK(max_rel < 1e-5);
}

TEST_CASE("value loss gradient matches central differences") {
  Rng rng(31);
  const std::array<int, 4> sizes{2, 8, 8, 1};
  Mlp value = make_mlp(sizes, rng);

  TrainingBatch batch;
  Rng data(32);
  for (int i = 0; i < 12; ++i) {
    batch.s.push_back({data.uniform(-1.0, 1.0), data.uniform(-1.0, 1.0)});
    batch.a.push_back({0.0, 0.0});
    batch.behavior_log_prob.push_back(0.0);
    batch.advantage.push_back(0.0);
    batch.ret.push_back(data.uniform(-1.0, 1.0));
  }
  std::vector<size_t> idx(batch.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;

  const ValueGrad g = value_loss_grad(value, batch, idx);
  const double h = 1e-5;
  double max_rel = 0.0;
  for (size_t l = 0; l < value.layers.size(); ++l) {
    for (size_t k = 0; k < value.layers[l].w.size(); ++k) {
      double& p = value.layers[l].w[k];
      const double saved = p;
      p = saved + h;
      const double up = value_loss_grad(value, batch, idx).loss;
      p = saved - h;
      const double dn = value_loss_grad(value, batch, idx).loss;
      p = saved;
      const double fd = (up - dn) / (2.0 * h);
      const double an = g.grad.w[l][k];
      // relative where the gradient is meaningful, absolute (1e-7 at the
      // 1e-5 bound) below the finite-difference noise floor
      const double mag = std::max(std::abs(an), std::abs(fd));
      const double rel = mag >= 1e-4 ? std::abs(an - fd) / mag
                                     : std::abs(an - fd) / 1e-2;
      max_rel = std::max(max_rel, rel);
    }
  }
  CHECK(max_rel < 1e-5);
}

TEST_CASE("gradient of a matched value net is zero") {
  Rng rng(41);
  const std::array<int, 4> sizes{2, 8, 8, 1};
  const Mlp value = make_mlp(sizes, rng);
  TrainingBatch batch;
  for (int i = 0; i < 4; ++i) {
    const DesignPoint s{0.1 * i, -0.2 * i};
    batch.s.push_back(s);
    batch.a.push_back({0.0, 0.0});
    batch.behavior_log_prob.push_back(0.0);
    batch.advantage.push_back(0.0);
    batch.ret.push_back(value_forward(value, s));  // targets == predictions
  }
  std::vector<size_t> idx{0, 1, 2, 3};
  const ValueGrad g = value_loss_grad(value, batch, idx);
  CHECK(g.loss == 0.0);
  for (const auto& layer : g.grad.w)
    for (double v : layer) CHECK(v == 0.0);
}

TEST_CASE("adam: zero gradient from a fresh state is the identity") {
  Rng rng(51);
  const std::array<int, 3> sizes{2, 4, 1};
  Mlp net = make_mlp(sizes, rng);
  const Mlp before = net;
  GradBuffer g = GradBuffer::zeros_like(net);
  AdamState st = AdamState::zeros_like(net);
  adam_step(net, g, st, {});
  for (size_t l = 0; l < net.layers.size(); ++l) {
    CHECK(net.layers[l].w == before.layers[l].w);
    CHECK(net.layers[l].b == before.layers[l].b);
  }
}

TEST_CASE("adam: first step moves by about lr in the gradient direction") {
  Mlp net;
  Layer l;
  l.in = 1;
  l.out = 1;
  l.w = {1.0};
  l.b = {0.0};
  net.layers.push_back(l);
  GradBuffer g = GradBuffer::zeros_like(net);
  g.w[0][0] = 4.0;
  AdamState st = AdamState::zeros_like(net);
  AdamConfig cfg;
  cfg.lr = 3e-4;
  adam_step(net, g, st, cfg);
  // mhat/sqrt(vhat) == sign(g) up to eps on the first step
  CHECK(net.layers[0].w[0] == doctest::Approx(1.0 - 3e-4).epsilon(1e-6));
}

TEST_CASE("checkpoint round trip is bit exact") {
  Rng rng(61);
  const std::array<int, 4> psizes{2, 16, 16, 4};
  const std::array<int, 4> vsizes{2, 16, 16, 1};
  const Mlp policy = make_mlp(psizes, rng);
  const Mlp value = make_mlp(vsizes, rng);

  const fs::path path = temp_file("alpha_test_ckpt.alphann");
  checkpoint_save(path, policy, value);
  const LearnerNets nets = checkpoint_load(path);

  REQUIRE(nets.policy.layers.size() == policy.layers.size());
  for (size_t l = 0; l < policy.layers.size(); ++l) {
    CHECK(nets.policy.layers[l].w == policy.layers[l].w);
    CHECK(nets.policy.layers[l].b == policy.layers[l].b);
    CHECK(nets.policy.layers[l].act == policy.layers[l].act);
  }
  Rng points(62);
  for (int i = 0; i < 200; ++i) {
    const DesignPoint s{points.uniform(-1.0, 1.0), points.uniform(-1.0, 1.0)};
    const PolicyOutput a = policy_forward(policy, s);
    const PolicyOutput b = policy_forward(nets.policy, s);
    CHECK(a.mean == b.mean);
    CHECK(a.stddev == b.stddev);
    CHECK(value_forward(value, s) == value_forward(nets.value, s));
  }

  // saving the loaded nets reproduces the file byte for byte
  const fs::path again = temp_file("alpha_test_ckpt2.alphann");
  checkpoint_save(again, nets.policy, nets.value);
  std::ifstream f1(path, std::ios::binary), f2(again, std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)), {});
  const std::string b2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(b1 == b2);
  fs::remove(path);
  fs::remove(again);
}

TEST_CASE("checkpoint loader rejects damage") {
  Rng rng(71);
  const std::array<int, 3> sizes{2, 4, 4};
  const Mlp net = make_mlp(sizes, rng);
  const fs::path path = temp_file("alpha_test_bad.alphann");
  checkpoint_save(path, net, net);

  auto rewrite = [&](auto mutate) {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    in.close();
    mutate(bytes);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  };

  rewrite([](std::string& b) { b[0] = 'X'; });
  CHECK_THROWS_AS(checkpoint_load(path), CheckpointError);

  checkpoint_save(path, net, net);
  rewrite([](std::string& b) { b[7] = '2'; });  // future format version
  CHECK_THROWS_AS(checkpoint_load(path), CheckpointError);

  checkpoint_save(path, net, net);
  rewrite([](std::string& b) { b.resize(b.size() / 2); });
  CHECK_THROWS_AS(checkpoint_load(path), CheckpointError);

  checkpoint_save(path, net, net);
  rewrite([](std::string& b) { b += "junk"; });
  CHECK_THROWS_AS(checkpoint_load(path), CheckpointError);

  CHECK_THROWS_AS(checkpoint_load(temp_file("alpha_no_such.alphann")), IoError);
  fs::remove(path);
}
