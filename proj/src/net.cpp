#include "alpha/net.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "alpha/errors.hpp"

namespace alpha {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // ln(2 pi)

double apply_act(Activation a, double z) {
  switch (a) {
    case Activation::kRelu: return z > 0.0 ? z : 0.0;
    case Activation::kTanh: return std::tanh(z);
    case Activation::kSoftplus: return std::log1p(std::exp(-std::abs(z))) + std::max(z, 0.0);
    case Activation::kLinear: return z;
  }
  return z;
}

double act_grad(Activation a, double z) {
  switch (a) {
    case Activation::kRelu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::kTanh: {
      double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::kSoftplus: return 1.0 / (1.0 + std::exp(-z));
    case Activation::kLinear: return 1.0;
  }
  return 1.0;
}

double softplus(double z) { return apply_act(Activation::kSoftplus, z); }

}  // namespace

Mlp make_mlp(std::span<const int> sizes, Rng& rng) {
  Mlp net;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    Layer layer;
    layer.in = sizes[l];
    layer.out = sizes[l + 1];
    layer.w.resize(static_cast<size_t>(layer.in) * layer.out);
    layer.b.assign(layer.out, 0.0);
    const bool head = (l + 2 == sizes.size());
    layer.act = head ? Activation::kLinear : Activation::kRelu;
    const double scale = head ? 0.01 : std::sqrt(2.0 / layer.in);
    for (auto& v : layer.w) v = scale * rng.normal();
    net.layers.push_back(std::move(layer));
  }
  return net;
}

std::span<const double> forward_cached(const Mlp& net, std::span<const double> x,
                                       ForwardCache& cache) {
  const size_t L = net.layers.size();
  cache.pre.resize(L);
  cache.act.resize(L + 1);
  cache.act[0].assign(x.begin(), x.end());
  for (size_t l = 0; l < L; ++l) {
    const Layer& layer = net.layers[l];
    const std::vector<double>& in = cache.act[l];
    std::vector<double>& pre = cache.pre[l];
    std::vector<double>& out = cache.act[l + 1];
    pre.assign(layer.out, 0.0);
    out.resize(layer.out);
    for (int o = 0; o < layer.out; ++o) {
      const double* wr = layer.w.data() + static_cast<size_t>(o) * layer.in;
      double acc = layer.b[o];
      for (int i = 0; i < layer.in; ++i) acc += wr[i] * in[i];
      pre[o] = acc;
      out[o] = apply_act(layer.act, acc);
    }
  }
  return cache.act[L];
}

std::vector<double> forward(const Mlp& net, std::span<const double> x) {
  ForwardCache cache;
  auto out = forward_cached(net, x, cache);
  return {out.begin(), out.end()};
}

GradBuffer GradBuffer::zeros_like(const Mlp& net) {
  GradBuffer g;
  for (const Layer& layer : net.layers) {
    g.w.emplace_back(layer.w.size(), 0.0);
    g.b.emplace_back(layer.b.size(), 0.0);
  }
  return g;
}

void GradBuffer::clear() {
  for (auto& v : w) std::fill(v.begin(), v.end(), 0.0);
  for (auto& v : b) std::fill(v.begin(), v.end(), 0.0);
}

bool GradBuffer::all_finite() const {
  for (const auto& v : w)
    for (double x : v)
      if (!std::isfinite(x)) return false;
  for (const auto& v : b)
    for (double x : v)
      if (!std::isfinite(x)) return false;
  return true;
}

void backward(const Mlp& net, const ForwardCache& cache,
              std::span<const double> dout, GradBuffer& grad) {
  const size_t L = net.layers.size();
  std::vector<double> da(dout.begin(), dout.end());
  for (size_t l = L; l-- > 0;) {
    const Layer& layer = net.layers[l];
    const std::vector<double>& in = cache.act[l];
    std::vector<double> dz(layer.out);
    for (int o = 0; o < layer.out; ++o)
      dz[o] = da[o] * act_grad(layer.act, cache.pre[l][o]);
    std::vector<double> din(layer.in, 0.0);
    double* gw = grad.w[l].data();
    for (int o = 0; o < layer.out; ++o) {
      const double* wr = layer.w.data() + static_cast<size_t>(o) * layer.in;
      double* gwr = gw + static_cast<size_t>(o) * layer.in;
      const double d = dz[o];
      grad.b[l][o] += d;
      for (int i = 0; i < layer.in; ++i) {
        gwr[i] += d * in[i];
        din[i] += wr[i] * d;
      }
    }
    da = std::move(din);
  }
}

PolicyOutput policy_forward(const Mlp& policy, DesignPoint s) {
  const std::array<double, 2> x{s.x1, s.x2};
  ForwardCache cache;
  auto o = forward_cached(policy, x, cache);
  PolicyOutput out;
  for (int d = 0; d < 2; ++d) {
    out.mean[d] = std::tanh(o[d]);
    out.stddev[d] = softplus(o[2 + d]) + kStdFloor;
    if (!std::isfinite(out.mean[d]) || !std::isfinite(out.stddev[d]))
      throw NumericError("policy_forward: non-finite output");
  }
  return out;
}

double value_forward(const Mlp& value, DesignPoint s) {
  const std::array<double, 2> x{s.x1, s.x2};
  double v = forward(value, x)[0];
  if (!std::isfinite(v)) throw NumericError("value_forward: non-finite output");
  return v;
}

double gaussian_log_prob(const PolicyOutput& out, const Action& a) {
  double lp = -kLog2Pi;  // two dims at -0.5 ln(2 pi) each
  for (int d = 0; d < 2; ++d) {
    const double z = (a[d] - out.mean[d]) / out.stddev[d];
    lp += -0.5 * z * z - std::log(out.stddev[d]);
  }
  return lp;
}

double gaussian_entropy(const PolicyOutput& out) {
  double h = 1.0 + kLog2Pi;  // two dims at 0.5 (1 + ln 2 pi) each
  for (int d = 0; d < 2; ++d) h += std::log(out.stddev[d]);
  return h;
}

Action gaussian_sample(const PolicyOutput& out, Rng& rng) {
  Action a;
  for (int d = 0; d < 2; ++d) {
    a[d] = std::clamp(out.mean[d] + out.stddev[d] * rng.normal(), -1.0, 1.0);
  }
  return a;
}

AdamState AdamState::zeros_like(const Mlp& net) {
  AdamState s;
  for (const Layer& layer : net.layers) {
    s.mw.emplace_back(layer.w.size(), 0.0);
    s.vw.emplace_back(layer.w.size(), 0.0);
    s.mb.emplace_back(layer.b.size(), 0.0);
    s.vb.emplace_back(layer.b.size(), 0.0);
  }
  return s;
}

namespace {

void adam_tensor(std::span<double> p, std::span<const double> g,
                 std::span<double> m, std::span<double> v, double c1, double c2,
                 const AdamConfig& cfg) {
  for (size_t i = 0; i < p.size(); ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double mh = m[i] / c1;
    const double vh = v[i] / c2;
    p[i] -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
  }
}

}  // namespace

void adam_step(Mlp& net, const GradBuffer& grad, AdamState& state,
               const AdamConfig& cfg) {
  ++state.t;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (size_t l = 0; l < net.layers.size(); ++l) {
    adam_tensor(net.layers[l].w, grad.w[l], state.mw[l], state.vw[l], c1, c2, cfg);
    adam_tensor(net.layers[l].b, grad.b[l], state.mb[l], state.vb[l], c1, c2, cfg);
  }
}

// ---- checkpoint io ----------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'A', 'L', 'P', 'H', 'A', 'N', 'N', '1'};

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
  put_u64(out, std::bit_cast<uint64_t>(d));
}

struct Reader {
  const std::string& buf;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > buf.size()) throw CheckpointError("checkpoint truncated");
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str(size_t n) {
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<NamedTensor> mlp_tensors(const Mlp& net, const std::string& prefix) {
  std::vector<NamedTensor> out;
  for (size_t l = 0; l < net.layers.size(); ++l) {
    const Layer& layer = net.layers[l];
    NamedTensor w;
    w.name = prefix + ".layer" + std::to_string(l) + ".w";
    w.dims = {static_cast<uint64_t>(layer.out), static_cast<uint64_t>(layer.in)};
    w.data = layer.w;
    out.push_back(std::move(w));
    NamedTensor b;
    b.name = prefix + ".layer" + std::to_string(l) + ".b";
    b.dims = {static_cast<uint64_t>(layer.out)};
    b.data = layer.b;
    out.push_back(std::move(b));
  }
  return out;
}

// rebuild an mlp from {prefix}.layer{i}.{w,b}: relu trunk, linear head
Mlp tensors_to_mlp(std::span<const NamedTensor> tensors, const std::string& prefix) {
  Mlp net;
  for (size_t l = 0;; ++l) {
    const std::string wname = prefix + ".layer" + std::to_string(l) + ".w";
    const std::string bname = prefix + ".layer" + std::to_string(l) + ".b";
    const NamedTensor* wt = nullptr;
    const NamedTensor* bt = nullptr;
    for (const NamedTensor& t : tensors) {
      if (t.name == wname) wt = &t;
      if (t.name == bname) bt = &t;
    }
    if (!wt && !bt) break;
    if (!wt || !bt)
      throw CheckpointError("checkpoint missing tensor for " + prefix +
                            ".layer" + std::to_string(l));
    if (wt->dims.size() != 2 || bt->dims.size() != 1 || wt->dims[0] != bt->dims[0])
      throw CheckpointError("checkpoint has inconsistent shapes for " + wname);
    Layer layer;
    layer.out = static_cast<int>(wt->dims[0]);
    layer.in = static_cast<int>(wt->dims[1]);
    layer.w = wt->data;
    layer.b = bt->data;
    net.layers.push_back(std::move(layer));
  }
  if (net.layers.empty())
    throw CheckpointError("checkpoint has no tensors named " + prefix + ".*");
  for (size_t l = 0; l + 1 < net.layers.size(); ++l) {
    if (net.layers[l].out != net.layers[l + 1].in)
      throw CheckpointError("checkpoint layer shapes do not chain for " + prefix);
    net.layers[l].act = Activation::kRelu;
  }
  net.layers.back().act = Activation::kLinear;
  return net;
}

}  // namespace

void save_tensors(const std::filesystem::path& path,
                  std::span<const NamedTensor> tensors) {
  std::string bytes;
  bytes.append(kMagic, sizeof kMagic);
  put_u32(bytes, static_cast<uint32_t>(tensors.size()));
  for (const NamedTensor& t : tensors) {
    put_u32(bytes, static_cast<uint32_t>(t.name.size()));
    bytes.append(t.name);
    put_u32(bytes, static_cast<uint32_t>(t.dims.size()));
    uint64_t n = 1;
    for (uint64_t d : t.dims) {
      put_u64(bytes, d);
      n *= d;
    }
    if (n != t.data.size()) throw IoError("tensor " + t.name + " shape/data mismatch");
    for (double v : t.data) put_f64(bytes, v);
  }
  atomic_write(path, bytes);
}

std::vector<NamedTensor> load_tensors(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::string buf((std::istreambuf_iterator<char>(f)),
                  std::istreambuf_iterator<char>());
  Reader r{buf};
  const std::string magic = r.str(sizeof kMagic);
  if (magic.compare(0, 7, "ALPHANN") != 0)
    throw CheckpointError("bad checkpoint magic in " + path.string());
  if (magic[7] != '1')
    throw CheckpointError("unsupported checkpoint version in " + path.string());
  const uint32_t count = r.u32();
  std::vector<NamedTensor> tensors;
  tensors.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = r.str(r.u32());
    const uint32_t rank = r.u32();
    uint64_t n = 1;
    for (uint32_t k = 0; k < rank; ++k) {
      t.dims.push_back(r.u64());
      n *= t.dims.back();
    }
    if (n > (1ull << 32)) throw CheckpointError("tensor " + t.name + " too large");
    t.data.resize(n);
    for (uint64_t k = 0; k < n; ++k) t.data[k] = r.f64();
    tensors.push_back(std::move(t));
  }
  if (r.pos != buf.size())
    throw CheckpointError("trailing bytes in " + path.string());
  return tensors;
}

void checkpoint_save(const std::filesystem::path& path, const Mlp& policy,
                     const Mlp& value) {
  std::vector<NamedTensor> tensors = mlp_tensors(policy, "policy");
  std::vector<NamedTensor> vt = mlp_tensors(value, "value");
  tensors.insert(tensors.end(), std::make_move_iterator(vt.begin()),
                 std::make_move_iterator(vt.end()));
  save_tensors(path, tensors);
}

LearnerNets checkpoint_load(const std::filesystem::path& path) {
  const std::vector<NamedTensor> tensors = load_tensors(path);
  LearnerNets nets;
  nets.policy = tensors_to_mlp(tensors, "policy");
  nets.value = tensors_to_mlp(tensors, "value");
  return nets;
}

}  // namespace alpha
