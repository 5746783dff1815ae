#include "alpha/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "alpha/errors.hpp"

namespace alpha {

std::vector<UsageWindow> usage_over_time(std::span<const UsageRow> rows,
                                         int window_episodes) {
  std::vector<UsageWindow> out;
  if (rows.empty() || window_episodes < 1) return out;
  int max_episode = 0;
  for (const UsageRow& r : rows) max_episode = std::max(max_episode, r.episode);

  const int n_windows = max_episode / window_episodes + 1;
  std::vector<std::array<int64_t, 3>> counts(static_cast<size_t>(n_windows),
                                             {0, 0, 0});
  for (const UsageRow& r : rows) {
    auto& c = counts[static_cast<size_t>(r.episode / window_episodes)];
    ++c[static_cast<size_t>(r.model)];
  }
  for (int k = 0; k < n_windows; ++k) {
    const auto& c = counts[static_cast<size_t>(k)];
    const int64_t steps = c[0] + c[1] + c[2];
    if (steps == 0) continue;
    UsageWindow w;
    w.episode_begin = k * window_episodes;
    w.episode_end = std::min((k + 1) * window_episodes, max_episode + 1);
    w.steps = steps;
    w.p_lf1 = static_cast<double>(c[0]) / static_cast<double>(steps);
    w.p_lf2 = static_cast<double>(c[1]) / static_cast<double>(steps);
    w.p_hf = static_cast<double>(c[2]) / static_cast<double>(steps);
    out.push_back(w);
  }
  return out;
}

int cell_index(double x, int resolution) {
  const double pos = (x + 1.0) / 2.0 * static_cast<double>(resolution);
  int idx = static_cast<int>(std::floor(pos));
  return std::clamp(idx, 0, resolution - 1);
}

DesignPoint cell_center(int ix, int iy, int resolution) {
  const double w = 2.0 / static_cast<double>(resolution);
  return {-1.0 + (static_cast<double>(ix) + 0.5) * w,
          -1.0 + (static_cast<double>(iy) + 0.5) * w};
}

std::vector<CellUsage> grid_usage(std::span<const UsageRow> rows, int resolution) {
  std::map<std::pair<int, int>, std::array<int64_t, 3>> cells;
  for (const UsageRow& r : rows) {
    const std::pair<int, int> key{cell_index(r.s.x1, resolution),
                                  cell_index(r.s.x2, resolution)};
    ++cells[key][static_cast<size_t>(r.model)];
  }
  std::vector<CellUsage> out;
  out.reserve(cells.size());
  for (const auto& [key, c] : cells) {
    CellUsage u;
    u.ix = key.first;
    u.iy = key.second;
    u.visits = c[0] + c[1] + c[2];
    u.p_lf1 = static_cast<double>(c[0]) / static_cast<double>(u.visits);
    u.p_lf2 = static_cast<double>(c[1]) / static_cast<double>(u.visits);
    u.p_hf = static_cast<double>(c[2]) / static_cast<double>(u.visits);
    out.push_back(u);
  }
  return out;
}

std::vector<double> kernel_weights(std::span<const CellUsage> cells,
                                   int resolution, double bandwidth_cells) {
  const size_t n = cells.size();
  const double bw = bandwidth_cells * 2.0 / static_cast<double>(resolution);
  std::vector<double> w(n * n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const DesignPoint ci = cell_center(cells[i].ix, cells[i].iy, resolution);
    for (size_t j = i + 1; j < n; ++j) {
      const DesignPoint cj = cell_center(cells[j].ix, cells[j].iy, resolution);
      const double dx = ci.x1 - cj.x1;
      const double dy = ci.x2 - cj.x2;
      const double wij = std::exp(-(dx * dx + dy * dy) / (2.0 * bw * bw));
      w[i * n + j] = wij;
      w[j * n + i] = wij;
    }
  }
  return w;
}

double morans_i(std::span<const double> values, std::span<const double> w) {
  const size_t n = values.size();
  if (n < 2) throw NumericError("morans_i: need at least two cells");
  if (w.size() != n * n) throw NumericError("morans_i: weight matrix size mismatch");

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);

  std::vector<double> z(n);
  double den = 0.0;
  for (size_t i = 0; i < n; ++i) {
    z[i] = values[i] - mean;
    den += z[i] * z[i];
  }
  if (den <= 0.0) throw NumericError("morans_i: zero variance in values");

  double wsum = 0.0;
  double num = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double lag = 0.0;
    const double* wi = w.data() + i * n;
    for (size_t j = 0; j < n; ++j) {
      lag += wi[j] * z[j];
      wsum += wi[j];
    }
    num += z[i] * lag;
  }
  if (wsum <= 0.0) throw NumericError("morans_i: weight matrix sums to zero");
  return static_cast<double>(n) / wsum * num / den;
}

MoranResult moran_permutation_test(std::span<const double> values,
                                   std::span<const double> w, int n_perm,
                                   Rng& rng) {
  MoranResult out;
  out.i_value = morans_i(values, w);
  out.n_permutations = n_perm;
  out.n_cells_used = static_cast<int>(values.size());
  if (n_perm <= 0) {
    out.p_value = 1.0;
    return out;
  }
  std::vector<double> perm(values.begin(), values.end());
  int64_t at_least = 0;
  for (int k = 0; k < n_perm; ++k) {
    rng.shuffle(std::span<double>(perm));
    if (morans_i(perm, w) >= out.i_value) ++at_least;
  }
  out.p_value = static_cast<double>(1 + at_least) / static_cast<double>(1 + n_perm);
  return out;
}

MoranResult moran_for_model(std::span<const UsageRow> rows, ModelId model,
                            int resolution, double bandwidth_cells, int n_perm,
                            Rng& rng) {
  const std::vector<CellUsage> cells = grid_usage(rows, resolution);
  std::vector<double> values;
  values.reserve(cells.size());
  for (const CellUsage& c : cells) {
    switch (model) {
      case ModelId::kLf1: values.push_back(c.p_lf1); break;
      case ModelId::kLf2: values.push_back(c.p_lf2); break;
      case ModelId::kHf: values.push_back(c.p_hf); break;
    }
  }
  const std::vector<double> w = kernel_weights(cells, resolution, bandwidth_cells);
  return moran_permutation_test(values, w, n_perm, rng);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw NumericError("quantile: empty data");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

RunSummary summarize_run(const std::filesystem::path& run_dir) {
  RunSummary s;
  s.name = run_dir.filename().string();
  if (s.name.empty()) s.name = run_dir.parent_path().filename().string();

  const auto cfg_path = run_dir / "config.cfg";
  if (std::filesystem::exists(cfg_path))
    s.agent = parse_config_file(cfg_path).run.agent;

  const auto ledger_path = run_dir / "ledger.csv";
  if (std::filesystem::exists(ledger_path)) {
    s.ledger = read_ledger_csv(ledger_path);
    s.total_seconds = s.ledger.total_seconds();
    s.has_ledger = true;
  }

  const auto eval_path = run_dir / "eval.csv";
  if (std::filesystem::exists(eval_path)) {
    const std::vector<EvalRow> rows = read_eval_csv(eval_path);
    int final_iter = 0;
    for (const EvalRow& r : rows) final_iter = std::max(final_iter, r.iteration);
    std::vector<double> q;
    for (const EvalRow& r : rows)
      if (r.iteration == final_iter) q.push_back(r.q_hf);
    if (!q.empty()) {
      s.q_final_median = quantile(q, 0.5);
      s.q_final_q1 = quantile(q, 0.25);
      s.q_final_q3 = quantile(q, 0.75);
      s.has_eval = true;
    }
  }
  return s;
}

std::vector<FieldPoint> policy_field_map(const Mlp& policy, int resolution) {
  std::vector<FieldPoint> out;
  out.reserve(static_cast<size_t>(resolution) * resolution);
  for (int ix = 0; ix < resolution; ++ix) {
    for (int iy = 0; iy < resolution; ++iy) {
      FieldPoint p;
      p.s = cell_center(ix, iy, resolution);
      p.mean = policy_forward(policy, p.s).mean;
      out.push_back(p);
    }
  }
  return out;
}

void write_usage_time_csv(const std::filesystem::path& path,
                          std::span<const UsageWindow> windows) {
  std::string out = "episode_begin,episode_end,steps,p_lf1,p_lf2,p_hf\n";
  for (const UsageWindow& w : windows) {
    out += std::to_string(w.episode_begin) + ',' + std::to_string(w.episode_end) +
           ',' + std::to_string(w.steps) + ',' + format_double(w.p_lf1) + ',' +
           format_double(w.p_lf2) + ',' + format_double(w.p_hf) + '\n';
  }
  atomic_write_text(path, out);
}

void write_grid_csv(const std::filesystem::path& path,
                    std::span<const CellUsage> cells, int resolution) {
  std::string out = "ix,iy,center_x1,center_x2,visits,p_lf1,p_lf2,p_hf\n";
  for (const CellUsage& c : cells) {
    const DesignPoint center = cell_center(c.ix, c.iy, resolution);
    out += std::to_string(c.ix) + ',' + std::to_string(c.iy) + ',' +
           format_double(center.x1) + ',' + format_double(center.x2) + ',' +
           std::to_string(c.visits) + ',' + format_double(c.p_lf1) + ',' +
           format_double(c.p_lf2) + ',' + format_double(c.p_hf) + '\n';
  }
  atomic_write_text(path, out);
}

void write_moran_csv(const std::filesystem::path& path, const MoranResult& r) {
  std::string out = "i_value,p_value,n_permutations,n_cells_used\n";
  out += format_double(r.i_value) + ',' + format_double(r.p_value) + ',' +
         std::to_string(r.n_permutations) + ',' +
         std::to_string(r.n_cells_used) + '\n';
  atomic_write_text(path, out);
}

void write_field_csv(const std::filesystem::path& path,
                     std::span<const FieldPoint> field) {
  std::string out = "x1,x2,mean_x1,mean_x2\n";
  for (const FieldPoint& p : field) {
    out += format_double(p.s.x1) + ',' + format_double(p.s.x2) + ',' +
           format_double(p.mean[0]) + ',' + format_double(p.mean[1]) + '\n';
  }
  atomic_write_text(path, out);
}

void write_report_csv(const std::filesystem::path& path,
                      std::span<const RunSummary> runs) {
  std::string out =
      "run,agent,count_lf1,count_lf2,count_hf,total_eval_s,"
      "q_final_median,q_final_q1,q_final_q3,complete\n";
  for (const RunSummary& r : runs) {
    out += r.name + ',';
    out += to_string(r.agent);
    out += ',' + std::to_string(r.ledger.count_lf1) + ',' +
           std::to_string(r.ledger.count_lf2) + ',' +
           std::to_string(r.ledger.count_hf) + ',' +
           format_double(r.total_seconds) + ',' +
           format_double(r.q_final_median) + ',' + format_double(r.q_final_q1) +
           ',' + format_double(r.q_final_q3) + ',' +
           (r.has_ledger && r.has_eval ? '1' : '0') + '\n';
  }
  atomic_write_text(path, out);
}

}  // namespace alpha
