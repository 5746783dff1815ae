#include "alpha/logs.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "alpha/errors.hpp"

namespace alpha {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw IoError("bad number '" + s + "' in " + where);
  return v;
}

int64_t parse_int(const std::string& s, const std::string& where) {
  int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw IoError("bad integer '" + s + "' in " + where);
  return v;
}

ModelId parse_model(const std::string& s, const std::string& where) {
  auto m = model_from_string(s);
  if (!m) throw IoError("bad model '" + s + "' in " + where);
  return *m;
}

std::vector<std::string> read_lines(const std::filesystem::path& path,
                                    const std::string& header) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty() || lines.front() != header)
    throw IoError("unexpected header in " + path.string());
  lines.erase(lines.begin());
  return lines;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void atomic_write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw IoError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

static const char kUsageHeader[] =
    "episode,step,x1,x2,s_cos_1,s_cos_2,theta,p_lf1,p_lf2,p_hf,model,aligned";

void write_usage_csv(const std::filesystem::path& path,
                     const std::vector<UsageRow>& rows) {
  std::string out{kUsageHeader};
  out += '\n';
  for (const UsageRow& r : rows) {
    out += std::to_string(r.episode) + ',' + std::to_string(r.step) + ',' +
           format_double(r.s.x1) + ',' + format_double(r.s.x2) + ',' +
           format_double(r.s_cos_1) + ',' + format_double(r.s_cos_2) + ',' +
           format_double(r.theta) + ',' + format_double(r.p_lf1) + ',' +
           format_double(r.p_lf2) + ',' + format_double(r.p_hf) + ',';
    out += to_string(r.model);
    out += r.aligned ? ",1\n" : ",0\n";
  }
  atomic_write_text(path, out);
}

std::vector<UsageRow> read_usage_csv(const std::filesystem::path& path) {
  std::vector<UsageRow> rows;
  for (const std::string& line : read_lines(path, kUsageHeader)) {
    auto f = split_line(line);
    if (f.size() != 12) throw IoError("bad usage row in " + path.string());
    UsageRow r;
    r.episode = static_cast<int>(parse_int(f[0], path.string()));
    r.step = static_cast<int>(parse_int(f[1], path.string()));
    r.s.x1 = parse_double(f[2], path.string());
    r.s.x2 = parse_double(f[3], path.string());
    r.s_cos_1 = parse_double(f[4], path.string());
    r.s_cos_2 = parse_double(f[5], path.string());
    r.theta = parse_double(f[6], path.string());
    r.p_lf1 = parse_double(f[7], path.string());
    r.p_lf2 = parse_double(f[8], path.string());
    r.p_hf = parse_double(f[9], path.string());
    r.model = parse_model(f[10], path.string());
    r.aligned = parse_int(f[11], path.string()) != 0;
    rows.push_back(r);
  }
  return rows;
}

static const char kTrainingHeader[] =
    "episode,model,policy_loss,value_loss,entropy,batch_size";

void write_training_csv(const std::filesystem::path& path,
                        const std::vector<TrainingRow>& rows) {
  std::string out{kTrainingHeader};
  out += '\n';
  for (const TrainingRow& r : rows) {
    out += std::to_string(r.episode) + ',';
    out += to_string(r.model);
    out += ',' + format_double(r.policy_loss) + ',' +
           format_double(r.value_loss) + ',' + format_double(r.entropy) + ',' +
           std::to_string(r.batch_size) + '\n';
  }
  atomic_write_text(path, out);
}

std::vector<TrainingRow> read_training_csv(const std::filesystem::path& path) {
  std::vector<TrainingRow> rows;
  for (const std::string& line : read_lines(path, kTrainingHeader)) {
    auto f = split_line(line);
    if (f.size() != 6) throw IoError("bad training row in " + path.string());
    TrainingRow r;
    r.episode = static_cast<int>(parse_int(f[0], path.string()));
    r.model = parse_model(f[1], path.string());
    r.policy_loss = parse_double(f[2], path.string());
    r.value_loss = parse_double(f[3], path.string());
    r.entropy = parse_double(f[4], path.string());
    r.batch_size = parse_int(f[5], path.string());
    rows.push_back(r);
  }
  return rows;
}

static const char kEvalHeader[] = "seed_index,iteration,x1,x2,q_hf";

void write_eval_csv(const std::filesystem::path& path,
                    const std::vector<EvalRow>& rows) {
  std::string out{kEvalHeader};
  out += '\n';
  for (const EvalRow& r : rows) {
    out += std::to_string(r.seed_index) + ',' + std::to_string(r.iteration) +
           ',' + format_double(r.s.x1) + ',' + format_double(r.s.x2) + ',' +
           format_double(r.q_hf) + '\n';
  }
  atomic_write_text(path, out);
}

std::vector<EvalRow> read_eval_csv(const std::filesystem::path& path) {
  std::vector<EvalRow> rows;
  for (const std::string& line : read_lines(path, kEvalHeader)) {
    auto f = split_line(line);
    if (f.size() != 5) throw IoError("bad eval row in " + path.string());
    EvalRow r;
    r.seed_index = static_cast<int>(parse_int(f[0], path.string()));
    r.iteration = static_cast<int>(parse_int(f[1], path.string()));
    r.s.x1 = parse_double(f[2], path.string());
    r.s.x2 = parse_double(f[3], path.string());
    r.q_hf = parse_double(f[4], path.string());
    rows.push_back(r);
  }
  return rows;
}

static const char kLedgerHeader[] = "model,count,mean_cost_s,total_s";

void write_ledger_csv(const std::filesystem::path& path, const CostLedger& ledger) {
  std::string out{kLedgerHeader};
  out += '\n';
  for (ModelId m : {ModelId::kLf1, ModelId::kLf2, ModelId::kHf}) {
    const double cost = CostLedger::mean_cost(m);
    out += std::string(to_string(m)) + ',' + std::to_string(ledger.count(m)) +
           ',' + format_double(cost) + ',' +
           format_double(static_cast<double>(ledger.count(m)) * cost) + '\n';
  }
  atomic_write_text(path, out);
}

CostLedger read_ledger_csv(const std::filesystem::path& path) {
  CostLedger ledger;
  for (const std::string& line : read_lines(path, kLedgerHeader)) {
    auto f = split_line(line);
    if (f.size() != 4) throw IoError("bad ledger row in " + path.string());
    const ModelId m = parse_model(f[0], path.string());
    const int64_t count = parse_int(f[1], path.string());
    switch (m) {
      case ModelId::kLf1: ledger.count_lf1 = count; break;
      case ModelId::kLf2: ledger.count_lf2 = count; break;
      case ModelId::kHf: ledger.count_hf = count; break;
    }
  }
  return ledger;
}

}  // namespace alpha
