#pragma once

// Pathological long-term memory benchmarks (5-bit, 20-bit, B-bit) and the
// trial protocol used to score a reservoir configuration on them.
//
// Channel layout, D_in = S + 2 inputs and D_out = S + 1 outputs:
//   inputs  0..S-1 pattern symbols, S distractor, S+1 cue
//   outputs 0..S-1 recalled symbols, S "waiting"
// Time line (1-based): P pattern steps, T0 distractor steps, one cue step,
// then P recall steps during which the distractor stays on.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "carc/bitmatrix.hpp"
#include "carc/readout.hpp"
#include "carc/reservoir.hpp"

namespace carc {

enum class TaskKind { five_bit, twenty_bit, b_bit };

struct TaskSpec {
  TaskKind kind = TaskKind::five_bit;
  int distractor = 200;     // T0
  int pattern_length = 5;   // P
  int symbol_count = 2;     // S
  int training_patterns = 120;  // sampled set size for twenty_bit

  static TaskSpec five_bit(int t0);
  static TaskSpec twenty_bit(int t0, int training_patterns = 120);
  static TaskSpec b_bit(int bits, int t0);

  int input_dim() const noexcept { return symbol_count + 2; }
  int output_dim() const noexcept { return symbol_count + 1; }
  int total_steps() const noexcept { return 2 * pattern_length + distractor + 1; }
  int cue_step() const noexcept { return pattern_length + distractor; }  // 0-based row of the cue
  std::string name() const;
  void validate() const;
};

TaskSpec parse_task(std::string_view name, int t0);

using Pattern = std::vector<int>;

struct Sequence {
  BitMatrix inputs;   // T_total x D_in
  BitMatrix targets;  // T_total x D_out
  std::vector<bool> recall_mask;
};

enum class MaskPolicy { all_steps, recall_only };

Sequence gen_sequence(const TaskSpec& spec, const Pattern& pattern, MaskPolicy mask = MaskPolicy::all_steps);

/// All S^P patterns for five_bit/b_bit (lexicographic); a seeded sample of
/// distinct patterns for twenty_bit.
std::vector<Pattern> enumerate_patterns(const TaskSpec& spec, std::uint64_t seed = 0);

struct TrialOptions {
  FitOptions fit;
  MaskPolicy mask = MaskPolicy::all_steps;
};

struct TrialReport {
  bool success = false;
  std::uint64_t bit_errors = 0;
  ReservoirConfig config;
  TaskSpec task;
  std::uint64_t ca_cell_updates = 0;  // measured while building features
  double wall_seconds = 0.0;
  std::size_t feature_dim = 0;
  std::size_t distinct_columns = 0;
};

/// Fits one readout on every (sequence, step) row of the training patterns and
/// scores the thresholded outputs on the same rows. Mappings come from cfg.seed;
/// `seed` selects the twenty_bit training sample.
TrialReport run_trial(const ReservoirConfig& cfg, const TaskSpec& spec, std::uint64_t seed,
                      const TrialOptions& options = {});

struct FailureEstimate {
  int trials = 0;
  int failures = 0;
  double percent = 0.0;
  double ci_low = 0.0;   // 95% Wilson interval, percent
  double ci_high = 0.0;
};

FailureEstimate wilson_estimate(int failures, int trials);

/// Independent trials with fresh mappings (seed of trial k = mix_seed(seed, k)).
/// stop_after_failures > 0 ends early once that many failures are seen.
FailureEstimate failure_rate(const ReservoirConfig& cfg, const TaskSpec& spec, int n_trials, std::uint64_t seed,
                             const TrialOptions& options = {}, int stop_after_failures = 0);

struct MinSizeResult {
  bool found = false;
  int mappings = 0;
  int iterations = 0;
  long long size() const noexcept { return static_cast<long long>(mappings) * iterations; }
  int largest_mappings_tried = 0;
  int largest_iterations_tried = 0;
};

struct MinSizeOptions {
  int max_mappings = 128;
  int max_iterations = 64;
  TrialOptions trial;
  InjectMode mode = InjectMode::set;
  SegmentLayout layout = SegmentLayout::scattered;
};

/// Smallest R*I over the doubling grid R, I in {1, 2, 4, ...} with zero failures
/// in n_trials. Ties on R*I are broken toward smaller R.
MinSizeResult min_reservoir_size(const CellRule& rule, const TaskSpec& spec, int n_trials, std::uint64_t seed,
                                 const MinSizeOptions& options = {});

}  // namespace carc
