#include "carc/memtasks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "carc/error.hpp"
#include "carc/rng.hpp"

namespace carc {

TaskSpec TaskSpec::five_bit(int t0) {
  TaskSpec s;
  s.kind = TaskKind::five_bit;
  s.distractor = t0;
  s.pattern_length = 5;
  s.symbol_count = 2;
  return s;
}

TaskSpec TaskSpec::twenty_bit(int t0, int training_patterns) {
  TaskSpec s;
  s.kind = TaskKind::twenty_bit;
  s.distractor = t0;
  s.pattern_length = 10;
  s.symbol_count = 5;
  s.training_patterns = training_patterns;
  return s;
}

TaskSpec TaskSpec::b_bit(int bits, int t0) {
  TaskSpec s;
  s.kind = TaskKind::b_bit;
  s.distractor = t0;
  s.pattern_length = bits;
  s.symbol_count = 2;
  return s;
}

std::string TaskSpec::name() const {
  switch (kind) {
    case TaskKind::five_bit: return "5bit";
    case TaskKind::twenty_bit: return "20bit";
    case TaskKind::b_bit: return std::to_string(pattern_length) + "bit";
  }
  return "?";
}

void TaskSpec::validate() const {
  if (distractor < 1) throw Error(ErrorCode::invalid_parameter, "distractor period T0 must be >= 1");
  if (pattern_length < 1) throw Error(ErrorCode::invalid_parameter, "pattern length must be >= 1");
  if (symbol_count < 2) throw Error(ErrorCode::invalid_parameter, "need at least two symbols");
  if (kind == TaskKind::twenty_bit && training_patterns < 1)
    throw Error(ErrorCode::invalid_parameter, "training set must hold at least one pattern");
}

TaskSpec parse_task(std::string_view name, int t0) {
  if (name == "5bit" || name == "five_bit") return TaskSpec::five_bit(t0);
  if (name == "20bit" || name == "twenty_bit") return TaskSpec::twenty_bit(t0);
  if (name.size() > 3 && name.substr(name.size() - 3) == "bit") {
    const int bits = std::atoi(std::string(name.substr(0, name.size() - 3)).c_str());
    if (bits >= 1) return TaskSpec::b_bit(bits, t0);
  }
  throw Error(ErrorCode::invalid_parameter, "unknown task '" + std::string(name) + "'");
}

Sequence gen_sequence(const TaskSpec& spec, const Pattern& pattern, MaskPolicy mask) {
  spec.validate();
  const int p = spec.pattern_length;
  const int s = spec.symbol_count;
  if (static_cast<int>(pattern.size()) != p)
    throw Error(ErrorCode::invalid_parameter, "pattern length " + std::to_string(pattern.size()) + " != " +
                                                  std::to_string(p));
  for (int sym : pattern)
    if (sym < 0 || sym >= s) throw Error(ErrorCode::invalid_parameter, "pattern symbol out of range");

  const int total = spec.total_steps();
  const int cue = spec.cue_step();
  Sequence seq{BitMatrix(static_cast<std::size_t>(total), static_cast<std::size_t>(spec.input_dim())),
               BitMatrix(static_cast<std::size_t>(total), static_cast<std::size_t>(spec.output_dim())),
               std::vector<bool>(static_cast<std::size_t>(total), mask == MaskPolicy::all_steps)};
  for (int t = 0; t < total; ++t) {
    const auto row = static_cast<std::size_t>(t);
    if (t < p) {
      seq.inputs.set(row, static_cast<std::size_t>(pattern[static_cast<std::size_t>(t)]));
    } else if (t == cue) {
      seq.inputs.set(row, static_cast<std::size_t>(s + 1));
    } else {
      seq.inputs.set(row, static_cast<std::size_t>(s));
    }
    if (t > cue) {
      seq.targets.set(row, static_cast<std::size_t>(pattern[static_cast<std::size_t>(t - cue - 1)]));
      seq.recall_mask[row] = true;
    } else {
      seq.targets.set(row, static_cast<std::size_t>(s));
    }
  }
  return seq;
}

std::vector<Pattern> enumerate_patterns(const TaskSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto p = static_cast<std::size_t>(spec.pattern_length);
  const int s = spec.symbol_count;
  std::vector<Pattern> out;
  if (spec.kind != TaskKind::twenty_bit) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < p; ++i) {
      total *= static_cast<std::size_t>(s);
      if (total > (std::size_t{1} << 24)) throw Error(ErrorCode::invalid_parameter, "pattern space too large to enumerate");
    }
    out.reserve(total);
    for (std::size_t code = 0; code < total; ++code) {
      Pattern pat(p);
      std::size_t x = code;
      for (std::size_t i = p; i-- > 0;) {
        pat[i] = static_cast<int>(x % static_cast<std::size_t>(s));
        x /= static_cast<std::size_t>(s);
      }
      out.push_back(std::move(pat));
    }
    return out;
  }
  Rng rng(seed);
  std::set<Pattern> seen;
  while (out.size() < static_cast<std::size_t>(spec.training_patterns)) {
    Pattern pat(p);
    for (auto& sym : pat) sym = static_cast<int>(rng.below(static_cast<std::uint64_t>(s)));
    if (seen.insert(pat).second) out.push_back(std::move(pat));
  }
  return out;
}

TrialReport run_trial(const ReservoirConfig& cfg, const TaskSpec& spec, std::uint64_t seed,
                      const TrialOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  spec.validate();
  cfg.validate();
  if (cfg.input_dim != spec.input_dim())
    throw Error(ErrorCode::config_mismatch, "reservoir D_in " + std::to_string(cfg.input_dim) + " != task D_in " +
                                                std::to_string(spec.input_dim()));

  const auto patterns = enumerate_patterns(spec, seed);
  const auto steps = static_cast<std::size_t>(spec.total_steps());
  const ReservoirState initial = init_state(cfg);
  Reservoir reservoir(cfg, initial);

  BitMatrix features(patterns.size() * steps, reservoir.feature_dim());
  BitMatrix targets(patterns.size() * steps, static_cast<std::size_t>(spec.output_dim()));
  std::vector<bool> mask;
  mask.reserve(patterns.size() * steps);

  const std::uint64_t updates_before = CellUpdateCounter::value();
  std::size_t row = 0;
  for (const auto& pat : patterns) {
    const Sequence seq = gen_sequence(spec, pat, options.mask);
    reservoir.clear();
    for (std::size_t t = 0; t < steps; ++t, ++row) {
      reservoir.step(seq.inputs.row_vector(t), features.row(row));
      std::copy(seq.targets.row(t).begin(), seq.targets.row(t).end(), targets.row(row).begin());
      mask.push_back(seq.recall_mask[t]);
    }
  }
  const std::uint64_t updates = CellUpdateCounter::value() - updates_before;

  FitDiagnostics diag;
  const ReadoutModel model = fit(features, targets, options.fit, &diag);
  const BitMatrix predicted = predict(model, features);

  std::uint64_t errors = 0;
  for (std::size_t r = 0; r < features.rows(); ++r) {
    if (!mask[r]) continue;
    const auto a = predicted.row(r);
    const auto b = targets.row(r);
    for (std::size_t w = 0; w < a.size(); ++w) errors += static_cast<std::uint64_t>(std::popcount(a[w] ^ b[w]));
  }

  TrialReport report;
  report.success = errors == 0;
  report.bit_errors = errors;
  report.config = cfg;
  report.task = spec;
  report.ca_cell_updates = updates;
  report.feature_dim = reservoir.feature_dim();
  report.distinct_columns = diag.distinct_columns;
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

FailureEstimate wilson_estimate(int failures, int trials) {
  FailureEstimate e;
  e.trials = trials;
  e.failures = failures;
  if (trials <= 0) return e;
  const double n = trials;
  const double p = failures / n;
  const double z = 1.959963984540054;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  e.percent = 100.0 * p;
  e.ci_low = failures == 0 ? 0.0 : 100.0 * std::max(0.0, centre - half);
  e.ci_high = failures == trials ? 100.0 : 100.0 * std::min(1.0, centre + half);
  return e;
}

FailureEstimate failure_rate(const ReservoirConfig& cfg, const TaskSpec& spec, int n_trials, std::uint64_t seed,
                             const TrialOptions& options, int stop_after_failures) {
  if (n_trials < 1) throw Error(ErrorCode::invalid_parameter, "need at least one trial");
  int failures = 0;
  int run = 0;
  for (int k = 0; k < n_trials; ++k) {
    ReservoirConfig trial_cfg = cfg;
    trial_cfg.seed = mix_seed(seed, static_cast<std::uint64_t>(k));
    const TrialReport rep = run_trial(trial_cfg, spec, trial_cfg.seed, options);
    ++run;
    if (!rep.success) ++failures;
    if (stop_after_failures > 0 && failures >= stop_after_failures) break;
  }
  return wilson_estimate(failures, run);
}

MinSizeResult min_reservoir_size(const CellRule& rule, const TaskSpec& spec, int n_trials, std::uint64_t seed,
                                 const MinSizeOptions& options) {
  spec.validate();
  struct Cell {
    int r;
    int i;
  };
  std::vector<Cell> grid;
  for (int r = 1; r <= options.max_mappings; r *= 2)
    for (int i = 1; i <= options.max_iterations; i *= 2) grid.push_back({r, i});
  std::stable_sort(grid.begin(), grid.end(), [](const Cell& a, const Cell& b) {
    const long long sa = static_cast<long long>(a.r) * a.i;
    const long long sb = static_cast<long long>(b.r) * b.i;
    return sa != sb ? sa < sb : a.r < b.r;
  });

  MinSizeResult result;
  result.largest_mappings_tried = options.max_mappings;
  result.largest_iterations_tried = options.max_iterations;
  for (const Cell& c : grid) {
    ReservoirConfig cfg;
    cfg.rule = rule;
    cfg.mappings = c.r;
    cfg.iterations = c.i;
    cfg.input_dim = spec.input_dim();
    cfg.mode = options.mode;
    cfg.layout = options.layout;
    try {
      cfg.validate();
    } catch (const Error&) {
      continue;
    }
    const auto est = failure_rate(cfg, spec, n_trials, mix_seed(seed, static_cast<std::uint64_t>(c.r) * 1000 + c.i),
                                  options.trial, 1);
    if (est.failures == 0) {
      result.found = true;
      result.mappings = c.r;
      result.iterations = c.i;
      return result;
    }
  }
  return result;
}

}  // namespace carc
