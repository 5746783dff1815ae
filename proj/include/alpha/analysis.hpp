#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "alpha/config.hpp"
#include "alpha/logs.hpp"
#include "alpha/net.hpp"
#include "alpha/rng.hpp"

namespace alpha {

struct UsageWindow {
  int episode_begin = 0;
  int episode_end = 0;  // exclusive
  int64_t steps = 0;
  double p_lf1 = 0.0;
  double p_lf2 = 0.0;
  double p_hf = 0.0;
};

// model-usage fractions over consecutive episode windows
std::vector<UsageWindow> usage_over_time(std::span<const UsageRow> rows,
                                         int window_episodes);

// [-1,1] -> cell index; interior edges fall upward, the top edge is closed
int cell_index(double x, int resolution);
DesignPoint cell_center(int ix, int iy, int resolution);

struct CellUsage {
  int ix = 0;
  int iy = 0;
  int64_t visits = 0;
  double p_lf1 = 0.0;
  double p_lf2 = 0.0;
  double p_hf = 0.0;
};

// visited cells only, ordered by (ix, iy)
std::vector<CellUsage> grid_usage(std::span<const UsageRow> rows, int resolution);

// dense n x n gaussian kernel over cell-center distances,
// w_ij = exp(-d^2 / (2 bw^2)) with bw given in cell widths; zero diagonal
std::vector<double> kernel_weights(std::span<const CellUsage> cells,
                                   int resolution, double bandwidth_cells);

// moran's i over an arbitrary nonnegative weight matrix (zero diagonal);
// throws NumericError when the values have zero variance
double morans_i(std::span<const double> values, std::span<const double> w);

struct MoranResult {
  double i_value = 0.0;
  double p_value = 1.0;
  int n_permutations = 0;
  int n_cells_used = 0;
};

// one-sided permutation test, p = (1 + #{I_perm >= I_obs}) / (1 + n_perm)
MoranResult moran_permutation_test(std::span<const double> values,
                                   std::span<const double> w, int n_perm,
                                   Rng& rng);

// spatial clustering of one model's usage share over the visited cells
MoranResult moran_for_model(std::span<const UsageRow> rows, ModelId model,
                            int resolution, double bandwidth_cells, int n_perm,
                            Rng& rng);

struct RunSummary {
  std::string name;
  AgentKind agent = AgentKind::kAlpha;
  bool has_ledger = false;
  bool has_eval = false;
  CostLedger ledger;
  double total_seconds = 0.0;
  double q_final_median = 0.0;
  double q_final_q1 = 0.0;
  double q_final_q3 = 0.0;
};

// pulls ledger + final-iteration quality stats out of a run directory;
// missing artifacts are flagged rather than fatal
RunSummary summarize_run(const std::filesystem::path& run_dir);

// mean policy action at every cell center
struct FieldPoint {
  DesignPoint s;
  std::array<double, 2> mean{};
};
std::vector<FieldPoint> policy_field_map(const Mlp& policy, int resolution);

// linear-interpolation quantile of unsorted data (q in [0,1])
double quantile(std::vector<double> values, double q);

void write_usage_time_csv(const std::filesystem::path& path,
                          std::span<const UsageWindow> windows);
void write_grid_csv(const std::filesystem::path& path,
                    std::span<const CellUsage> cells, int resolution);
void write_moran_csv(const std::filesystem::path& path, const MoranResult& r);
void write_field_csv(const std::filesystem::path& path,
                     std::span<const FieldPoint> field);
void write_report_csv(const std::filesystem::path& path,
                      std::span<const RunSummary> runs);

}  // namespace alpha
