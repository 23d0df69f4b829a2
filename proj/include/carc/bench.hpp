#pragma once

// Experiment harness: closed-form operation counts, (R, I) grid sweeps and
// result files.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "carc/memtasks.hpp"

namespace carc {

struct OpCounter {
  std::uint64_t ca_bit_ops = 0;       // one per cell per CA iteration
  std::uint64_t readout_add_ops = 0;  // one per set feature bit per output channel
  friend bool operator==(const OpCounter&, const OpCounter&) = default;
};

/// ca_bit_ops = R * cells_per_segment * I * T_total for one sequence.
/// readout_add_ops is the dense bound F * D_out * T_total; use
/// count_readout_ops for the exact figure on a given feature matrix.
OpCounter count_ops(const ReservoirConfig& cfg, const TaskSpec& spec);
std::uint64_t count_readout_ops(const BitMatrix& features, std::size_t outputs);

/// Published floating-point operation counts of the echo state network
/// baseline (2 * NNZ per step), keyed by task and distractor period.
struct Baseline {
  TaskKind kind;
  int distractor;
  double esn_ops;
  const char* label;
};

const std::vector<Baseline>& baseline_constants();
std::optional<Baseline> baseline_for(const TaskSpec& spec);
double speedup(double esn_ops, std::uint64_t ca_ops);

struct SweepSpec {
  CellRule rule = rule_table(90);
  TaskSpec task = TaskSpec::five_bit(200);
  std::vector<int> mappings;    // R values
  std::vector<int> iterations;  // I values
  int trials = 50;
  std::uint64_t seed = 0;
  InjectMode mode = InjectMode::set;
  SegmentLayout layout = SegmentLayout::scattered;
  TrialOptions trial;
  unsigned workers = 0;  // 0 = hardware concurrency
};

struct SweepRow {
  std::string rule;
  std::string task;
  int mappings = 0;
  int iterations = 0;
  int distractor = 0;
  int trials = 0;
  int failures = 0;
  double fail_pct = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t ops = 0;
  std::uint64_t seed = 0;  // cell seed
  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepResult {
  std::uint64_t master_seed = 0;
  std::string mode;
  std::string layout;
  std::vector<SweepRow> rows;  // sorted by (rule, task, T0, R, I)
  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

std::uint64_t cell_seed(std::uint64_t master, int mappings, int iterations) noexcept;

SweepResult sweep(const SweepSpec& spec);

void to_json(nlohmann::json& j, const SweepRow& row);
void from_json(const nlohmann::json& j, SweepRow& row);
void to_json(nlohmann::json& j, const SweepResult& r);
void from_json(const nlohmann::json& j, SweepResult& r);

std::string to_csv(const SweepResult& r);
/// Rows whose task has a published baseline, with ESN ops, CA ops and ratio.
std::string speedup_table(const SweepResult& r);

/// Writes results.csv, results.json and speedup.txt into dir. Files are
/// staged and renamed, so a failure leaves none of them behind.
void report(const SweepResult& r, const std::filesystem::path& dir);

}  // namespace carc
