// Command line driver: single trials, (R, I) sweeps, minimum reservoir size
// search, operation counts and a concept algebra demo.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "carc/bench.hpp"
#include "carc/concepts.hpp"
#include "carc/error.hpp"
#include "carc/memtasks.hpp"

namespace {

using namespace carc;

std::uint64_t default_seed() {
  const char* env = std::getenv("CA_RC_SEED");
  if (env == nullptr || *env == '\0') return 0;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(env, &used, 0);
    if (used == std::string(env).size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::invalid_parameter, std::string("CA_RC_SEED is not an unsigned integer: ") + env);
}

struct Common {
  std::string rule = "90";
  std::string task = "5bit";
  int t0 = 200;
  std::string mode = "set";
  std::string layout = "scattered";
  std::string mask = "all";
  std::uint64_t seed = 0;
  std::string format = "csv";
  std::string out;
};

void add_task_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--rule", c.rule, "elementary rule number or 'life'")->capture_default_str();
  cmd->add_option("--task", c.task, "5bit, 20bit or <B>bit")->capture_default_str();
  cmd->add_option("--t0", c.t0, "distractor period")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--mode", c.mode, "input injection: set or xor")->capture_default_str();
  cmd->add_option("--layout", c.layout, "segment layout: scattered, fused or disjoint")->capture_default_str();
  cmd->add_option("--mask", c.mask, "scored steps: all or recall")->capture_default_str();
  cmd->add_option("--seed", c.seed, "master seed (default: $CA_RC_SEED or 0)");
  cmd->add_option("--format", c.format, "output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
}

TrialOptions trial_options(const Common& c) {
  TrialOptions t;
  if (c.mask == "recall") {
    t.mask = MaskPolicy::recall_only;
  } else if (c.mask != "all") {
    throw Error(ErrorCode::invalid_parameter, "unknown mask '" + c.mask + "'");
  }
  return t;
}

ReservoirConfig make_config(const Common& c, const TaskSpec& spec, int r, int i) {
  ReservoirConfig cfg;
  cfg.rule = parse_rule(c.rule);
  cfg.mappings = r;
  cfg.iterations = i;
  cfg.input_dim = spec.input_dim();
  cfg.mode = parse_inject_mode(c.mode);
  cfg.layout = parse_layout(c.layout);
  cfg.seed = c.seed;
  cfg.validate();
  return cfg;
}

void write_output(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  f << body;
  f.close();
  if (!f) throw Error(ErrorCode::io_failure, "failed writing " + path);
}

Support parse_support(const std::string& text) {
  Support s;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    try {
      s.insert(std::stoi(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::invalid_parameter, "bad object index '" + item + "'");
    }
  }
  return s;
}

std::string support_string(const Support& s) {
  std::string out = "{";
  for (int v : s) out += (out.size() > 1 ? "," : "") + std::to_string(v);
  return out + "}";
}

int run(int argc, char** argv) {
  CLI::App app{"Cellular automaton reservoir computing experiments"};
  app.require_subcommand(1);
  Common c;
  c.seed = default_seed();

  auto* trial = app.add_subcommand("trial", "run one trial and report bit errors");
  add_task_flags(trial, c);
  int r = 32, i = 16;
  trial->add_option("--r", r, "random mappings R")->capture_default_str();
  trial->add_option("--i", i, "iterations per step I")->capture_default_str();

  auto* sweep_cmd = app.add_subcommand("sweep", "failure rate over an (R, I) grid");
  add_task_flags(sweep_cmd, c);
  std::vector<int> r_list{8, 16, 32, 64}, i_list{8, 16, 32};
  int trials = 50;
  unsigned workers = 0;
  sweep_cmd->add_option("--r", r_list, "R values")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--i", i_list, "I values")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--trials", trials, "trials per cell")->capture_default_str()->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--workers", workers, "worker threads (0 = all cores)");
  sweep_cmd->add_option("--out", c.out, "directory for results.csv, results.json and speedup.txt");

  auto* minsize = app.add_subcommand("minsize", "smallest R*I with zero failures");
  add_task_flags(minsize, c);
  int max_r = 128, max_i = 64;
  minsize->add_option("--trials", trials, "trials per grid point")->capture_default_str()->check(CLI::PositiveNumber);
  minsize->add_option("--max-r", max_r, "largest R tried")->capture_default_str();
  minsize->add_option("--max-i", max_i, "largest I tried")->capture_default_str();

  auto* ops = app.add_subcommand("ops", "closed-form operation counts and baseline speedup");
  add_task_flags(ops, c);
  ops->add_option("--r", r, "random mappings R")->capture_default_str();
  ops->add_option("--i", i, "iterations per step I")->capture_default_str();

  auto* concepts = app.add_subcommand("concepts", "combine two concepts and print their truth tables");
  ConceptConfig ccfg;
  std::string a_text = "0,1,2,5", b_text = "2,3,5,7";
  concepts->add_option("--rule", ccfg.rule, "additive elementary rule")->capture_default_str();
  concepts->add_option("--objects", ccfg.objects, "universe size")->capture_default_str();
  concepts->add_option("--r", ccfg.mappings, "random mappings R")->capture_default_str();
  concepts->add_option("--i", ccfg.iterations, "iterations I")->capture_default_str();
  concepts->add_option("--seed", c.seed, "mapping seed (default: $CA_RC_SEED or 0)");
  concepts->add_option("--a", a_text, "objects in A, comma separated")->capture_default_str();
  concepts->add_option("--b", b_text, "objects in B, comma separated")->capture_default_str();
  concepts->add_option("--out", c.out, "save A and B as concept files with this prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (trial->parsed()) {
    const TaskSpec spec = parse_task(c.task, c.t0);
    const ReservoirConfig cfg = make_config(c, spec, r, i);
    const TrialReport rep = run_trial(cfg, spec, c.seed, trial_options(c));
    const OpCounter oc = count_ops(cfg, spec);
    if (c.format == "json") {
      std::cout << nlohmann::json{{"task", spec.name()},         {"config", cfg},
                                  {"success", rep.success},      {"bit_errors", rep.bit_errors},
                                  {"feature_dim", rep.feature_dim}, {"distinct_columns", rep.distinct_columns},
                                  {"ca_cell_updates", rep.ca_cell_updates}, {"ca_bit_ops_per_sequence", oc.ca_bit_ops},
                                  {"wall_seconds", rep.wall_seconds}}
                       .dump(2)
                << '\n';
    } else {
      std::cout << "rule,task,R,I,T0,seed,success,bit_errors,feature_dim,ops\n"
                << rule_name(cfg.rule) << ',' << spec.name() << ',' << r << ',' << i << ',' << c.t0 << ',' << c.seed
                << ',' << (rep.success ? 1 : 0) << ',' << rep.bit_errors << ',' << rep.feature_dim << ','
                << oc.ca_bit_ops << '\n';
    }
    return 0;
  }

  if (sweep_cmd->parsed()) {
    SweepSpec s;
    s.rule = parse_rule(c.rule);
    s.task = parse_task(c.task, c.t0);
    s.mappings = r_list;
    s.iterations = i_list;
    s.trials = trials;
    s.seed = c.seed;
    s.mode = parse_inject_mode(c.mode);
    s.layout = parse_layout(c.layout);
    s.trial = trial_options(c);
    s.workers = workers;
    const SweepResult res = sweep(s);
    if (!c.out.empty()) {
      report(res, c.out);
      std::cerr << "wrote results.csv, results.json, speedup.txt to " << c.out << '\n';
    }
    std::cout << (c.format == "json" ? nlohmann::json(res).dump(2) + "\n" : to_csv(res));
    return 0;
  }

  if (minsize->parsed()) {
    const TaskSpec spec = parse_task(c.task, c.t0);
    MinSizeOptions opt;
    opt.max_mappings = max_r;
    opt.max_iterations = max_i;
    opt.trial = trial_options(c);
    opt.mode = parse_inject_mode(c.mode);
    opt.layout = parse_layout(c.layout);
    const MinSizeResult m = min_reservoir_size(parse_rule(c.rule), spec, trials, c.seed, opt);
    if (c.format == "json") {
      std::cout << nlohmann::json{{"task", spec.name()}, {"T0", c.t0}, {"found", m.found}, {"R", m.mappings},
                                  {"I", m.iterations},   {"size", m.size()}, {"max_R", m.largest_mappings_tried},
                                  {"max_I", m.largest_iterations_tried}}
                       .dump(2)
                << '\n';
    } else {
      std::cout << "task,T0,found,R,I,size\n"
                << spec.name() << ',' << c.t0 << ',' << (m.found ? 1 : 0) << ',' << m.mappings << ','
                << m.iterations << ',' << m.size() << '\n';
    }
    return 0;
  }

  if (ops->parsed()) {
    const TaskSpec spec = parse_task(c.task, c.t0);
    const ReservoirConfig cfg = make_config(c, spec, r, i);
    const OpCounter oc = count_ops(cfg, spec);
    const auto base = baseline_for(spec);
    nlohmann::json j{{"task", spec.name()},
                     {"T0", c.t0},
                     {"R", r},
                     {"I", i},
                     {"cells_per_segment", cfg.cells_per_segment()},
                     {"T_total", spec.total_steps()},
                     {"ca_bit_ops", oc.ca_bit_ops},
                     {"readout_add_ops_bound", oc.readout_add_ops}};
    if (base) {
      j["esn_ops"] = base->esn_ops;
      j["speedup"] = speedup(base->esn_ops, oc.ca_bit_ops);
    }
    if (c.format == "json") {
      std::cout << j.dump(2) << '\n';
    } else {
      std::cout << "task,T0,R,I,ca_bit_ops,readout_add_ops_bound,esn_ops,speedup\n"
                << spec.name() << ',' << c.t0 << ',' << r << ',' << i << ',' << oc.ca_bit_ops << ','
                << oc.readout_add_ops << ',' << (base ? std::to_string(base->esn_ops) : "") << ','
                << (base ? std::to_string(speedup(base->esn_ops, oc.ca_bit_ops)) : "") << '\n';
    }
    return 0;
  }

  // concepts
  ccfg.seed = c.seed;
  const Concept a = reservoir_of(parse_support(a_text), ccfg);
  const Concept b = reservoir_of(parse_support(b_text), ccfg);
  struct Row {
    const char* name;
    Concept value;
  };
  const std::vector<Row> combos{{"A", a},
                                {"B", b},
                                {"A OR B", or_c(a, b)},
                                {"A AND B", and_c(a, b)},
                                {"A XOR B", xor_c(a, b)},
                                {"NOT A", not_c(a)}};
  std::cout << "object";
  for (const auto& row : combos) std::cout << '\t' << row.name;
  std::cout << '\n';
  for (int obj = 0; obj < ccfg.objects; ++obj) {
    std::cout << obj;
    for (const auto& row : combos) std::cout << '\t' << (row.value.support().contains(obj) ? 1 : 0);
    std::cout << '\n';
  }
  std::cout << "\nfeature check (combined feature == fresh evolution of its support):\n";
  for (const auto& row : combos) {
    const bool ok = row.value.feature() == reservoir_of(row.value.support(), ccfg).feature();
    std::cout << "  " << row.name << ' ' << support_string(row.value.support()) << " popcount "
              << row.value.feature().count() << (ok ? " ok" : " MISMATCH") << '\n';
  }
  std::cout << "  MULT(A,B) popcount " << mult(a, b).count() << '\n';
  if (!c.out.empty()) {
    for (const auto& [suffix, concept_value] : {std::pair{"_A.json", a}, std::pair{"_B.json", b}}) {
      std::ostringstream buf;
      concept_value.save(buf);
      write_output(c.out + suffix, buf.str());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
