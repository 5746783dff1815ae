#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "alpha/fidelity.hpp"

namespace alpha {

// one row per environment step
struct UsageRow {
  int episode = 0;
  int step = 0;
  DesignPoint s;  // state the decision was taken in
  double s_cos_1 = 0.0;
  double s_cos_2 = 0.0;
  double theta = 0.0;
  double p_lf1 = 0.0;
  double p_lf2 = 0.0;
  double p_hf = 0.0;
  ModelId model = ModelId::kHf;
  bool aligned = false;
};

// one row per training event
struct TrainingRow {
  int episode = 0;
  ModelId model = ModelId::kHf;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  int64_t batch_size = 0;
};

// one row per (seed, iteration) of a policy evaluation
struct EvalRow {
  int seed_index = 0;
  int iteration = 0;
  DesignPoint s;
  double q_hf = 0.0;
};

// full-precision float formatting so logs round-trip exactly
std::string format_double(double v);

void write_usage_csv(const std::filesystem::path& path,
                     const std::vector<UsageRow>& rows);
std::vector<UsageRow> read_usage_csv(const std::filesystem::path& path);

void write_training_csv(const std::filesystem::path& path,
                        const std::vector<TrainingRow>& rows);
std::vector<TrainingRow> read_training_csv(const std::filesystem::path& path);

void write_eval_csv(const std::filesystem::path& path,
                    const std::vector<EvalRow>& rows);
std::vector<EvalRow> read_eval_csv(const std::filesystem::path& path);

void write_ledger_csv(const std::filesystem::path& path, const CostLedger& ledger);
CostLedger read_ledger_csv(const std::filesystem::path& path);

// write-to-temp-then-rename so partial files never land under the real name
void atomic_write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace alpha
