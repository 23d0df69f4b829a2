#include "carc/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "carc/error.hpp"
#include "carc/rng.hpp"

namespace carc {

OpCounter count_ops(const ReservoirConfig& cfg, const TaskSpec& spec) {
  cfg.validate();
  spec.validate();
  const auto steps = static_cast<std::uint64_t>(spec.total_steps());
  OpCounter ops;
  ops.ca_bit_ops = static_cast<std::uint64_t>(cfg.mappings) * cfg.cells_per_segment() *
                   static_cast<std::uint64_t>(cfg.iterations) * steps;
  ops.readout_add_ops = cfg.feature_dim() * static_cast<std::uint64_t>(spec.output_dim()) * steps;
  return ops;
}

std::uint64_t count_readout_ops(const BitMatrix& features, std::size_t outputs) {
  std::uint64_t set = 0;
  for (auto w : features.words()) set += static_cast<std::uint64_t>(std::popcount(w));
  return set * outputs;
}

const std::vector<Baseline>& baseline_constants() {
  static const std::vector<Baseline> table{
      {TaskKind::five_bit, 200, 1.03e6, "5 bit T0=200"},
      {TaskKind::five_bit, 1000, 13.1e6, "5 bit T0=1000"},
      {TaskKind::twenty_bit, 200, 17.3e6, "20 bit T0=200"},
  };
  return table;
}

std::optional<Baseline> baseline_for(const TaskSpec& spec) {
  for (const auto& b : baseline_constants())
    if (b.kind == spec.kind && b.distractor == spec.distractor) return b;
  return std::nullopt;
}

double speedup(double esn_ops, std::uint64_t ca_ops) {
  if (ca_ops == 0) throw Error(ErrorCode::invalid_parameter, "speedup needs a nonzero CA op count");
  return esn_ops / static_cast<double>(ca_ops);
}

std::uint64_t cell_seed(std::uint64_t master, int mappings, int iterations) noexcept {
  return mix_seed(master, (static_cast<std::uint64_t>(static_cast<std::uint32_t>(mappings)) << 32) |
                              static_cast<std::uint32_t>(iterations));
}

SweepResult sweep(const SweepSpec& spec) {
  if (spec.mappings.empty() || spec.iterations.empty())
    throw Error(ErrorCode::invalid_parameter, "sweep needs at least one R and one I value");
  if (spec.trials < 1) throw Error(ErrorCode::invalid_parameter, "sweep needs at least one trial per cell");
  spec.task.validate();

  std::vector<ReservoirConfig> cells;
  for (int r : spec.mappings)
    for (int i : spec.iterations) {
      ReservoirConfig cfg;
      cfg.rule = spec.rule;
      cfg.mappings = r;
      cfg.iterations = i;
      cfg.input_dim = spec.task.input_dim();
      cfg.mode = spec.mode;
      cfg.layout = spec.layout;
      cfg.seed = cell_seed(spec.seed, r, i);
      cfg.validate();
      cells.push_back(cfg);
    }

  std::vector<SweepRow> rows(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      try {
        const ReservoirConfig& cfg = cells[k];
        const FailureEstimate est = failure_rate(cfg, spec.task, spec.trials, cfg.seed, spec.trial);
        SweepRow& row = rows[k];
        row.rule = rule_name(cfg.rule);
        row.task = spec.task.name();
        row.mappings = cfg.mappings;
        row.iterations = cfg.iterations;
        row.distractor = spec.task.distractor;
        row.trials = est.trials;
        row.failures = est.failures;
        row.fail_pct = est.percent;
        row.ci_low = est.ci_low;
        row.ci_high = est.ci_high;
        row.ops = count_ops(cfg, spec.task).ca_bit_ops;
        row.seed = cfg.seed;
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  unsigned workers = spec.workers != 0 ? spec.workers : std::max(1U, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(cells.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  SweepResult result;
  result.master_seed = spec.seed;
  result.mode = to_string(spec.mode);
  result.layout = to_string(spec.layout);
  result.rows = std::move(rows);
  std::sort(result.rows.begin(), result.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.rule, a.task, a.distractor, a.mappings, a.iterations) <
           std::tie(b.rule, b.task, b.distractor, b.mappings, b.iterations);
  });
  return result;
}

void to_json(nlohmann::json& j, const SweepRow& row) {
  j = nlohmann::json{{"rule", row.rule},         {"task", row.task},         {"R", row.mappings},
                     {"I", row.iterations},      {"T0", row.distractor},     {"n_trials", row.trials},
                     {"failures", row.failures}, {"fail_pct", row.fail_pct}, {"ci_lo", row.ci_low},
                     {"ci_hi", row.ci_high},     {"ops", row.ops},           {"seed", row.seed}};
}

void from_json(const nlohmann::json& j, SweepRow& row) {
  j.at("rule").get_to(row.rule);
  j.at("task").get_to(row.task);
  j.at("R").get_to(row.mappings);
  j.at("I").get_to(row.iterations);
  j.at("T0").get_to(row.distractor);
  j.at("n_trials").get_to(row.trials);
  j.at("failures").get_to(row.failures);
  j.at("fail_pct").get_to(row.fail_pct);
  j.at("ci_lo").get_to(row.ci_low);
  j.at("ci_hi").get_to(row.ci_high);
  j.at("ops").get_to(row.ops);
  j.at("seed").get_to(row.seed);
}

void to_json(nlohmann::json& j, const SweepResult& r) {
  j = nlohmann::json{{"format", "carc-sweep-v1"},
                     {"master_seed", r.master_seed},
                     {"mode", r.mode},
                     {"layout", r.layout},
                     {"rows", r.rows}};
}

void from_json(const nlohmann::json& j, SweepResult& r) {
  if (j.value("format", "") != "carc-sweep-v1") throw Error(ErrorCode::io_failure, "unrecognized sweep format");
  j.at("master_seed").get_to(r.master_seed);
  j.at("mode").get_to(r.mode);
  j.at("layout").get_to(r.layout);
  j.at("rows").get_to(r.rows);
}

std::string to_csv(const SweepResult& r) {
  std::ostringstream out;
  out << "rule,R,I,T0,n_trials,fail_pct,ci_lo,ci_hi,ops,seed\n";
  char buf[256];
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%d,%d,%.2f,%.2f,%.2f,%llu,%llu\n", row.rule.c_str(), row.mappings,
                  row.iterations, row.distractor, row.trials, row.fail_pct, row.ci_low, row.ci_high,
                  static_cast<unsigned long long>(row.ops), static_cast<unsigned long long>(row.seed));
    out << buf;
  }
  return out.str();
}

std::string speedup_table(const SweepResult& r) {
  std::ostringstream out;
  out << "task       T0     R    I   ESN ops     CA ops      speedup\n";
  char buf[256];
  for (const auto& row : r.rows) {
    const auto spec = parse_task(row.task, row.distractor);
    const auto base = baseline_for(spec);
    if (!base) continue;
    std::snprintf(buf, sizeof buf, "%-10s %-6d %-4d %-4d %-11.4g %-11llu %.1fX\n", row.task.c_str(), row.distractor,
                  row.mappings, row.iterations, base->esn_ops, static_cast<unsigned long long>(row.ops),
                  speedup(base->esn_ops, row.ops));
    out << buf;
  }
  out << "# CA ops count one bitwise operation per cell per iteration over one sequence.\n"
         "# ESN ops are the published 2*NNZ floating-point figures; the (R, I) behind each\n"
         "# published CA figure is inferred from its factorization R * D_in * I * T_total.\n";
  return out.str();
}

void report(const SweepResult& r, const std::filesystem::path& dir) {
  if (r.rows.empty()) throw Error(ErrorCode::invalid_parameter, "no results to report");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_failure, "cannot create " + dir.string() + ": " + ec.message());

  const std::vector<std::pair<std::string, std::string>> files{
      {"results.csv", to_csv(r)},
      {"results.json", nlohmann::json(r).dump(2) + "\n"},
      {"speedup.txt", speedup_table(r)},
  };
  std::vector<fs::path> staged;
  auto discard = [&] {
    for (const auto& p : staged) fs::remove(p, ec);
  };
  for (const auto& [name, body] : files) {
    const fs::path tmp = dir / (name + ".tmp");
    std::ofstream out(tmp, std::ios::binary);
    out << body;
    out.close();
    staged.push_back(tmp);
    if (!out) {
      discard();
      throw Error(ErrorCode::io_failure, "failed writing " + tmp.string());
    }
  }
  for (std::size_t k = 0; k < files.size(); ++k) {
    fs::rename(staged[k], dir / files[k].first, ec);
    if (ec) {
      const std::string why = ec.message();
      for (std::size_t done = 0; done < k; ++done) fs::remove(dir / files[done].first, ec);
      discard();
      throw Error(ErrorCode::io_failure, "failed moving " + staged[k].string() + " into place: " + why);
    }
  }
}

}  // namespace carc
