#include "carc/reservoir.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "carc/error.hpp"
#include "carc/rng.hpp"

namespace carc {

const char* to_string(SegmentLayout layout) noexcept {
  switch (layout) {
    case SegmentLayout::disjoint: return "disjoint";
    case SegmentLayout::fused: return "fused";
    case SegmentLayout::scattered: return "scattered";
  }
  return "?";
}

SegmentLayout parse_layout(std::string_view name) {
  if (name == "disjoint") return SegmentLayout::disjoint;
  if (name == "fused") return SegmentLayout::fused;
  if (name == "scattered" || name == "scatter") return SegmentLayout::scattered;
  throw Error(ErrorCode::invalid_parameter, "unknown segment layout '" + std::string(name) + "'");
}

GridShape life_grid_shape(std::size_t cells) {
  std::size_t side = 1;
  while (side * side < cells) ++side;
  GridShape g{side, side};
  if (side > 1 && (side - 1) * side >= cells) g.height = side - 1;
  g.height = std::max<std::size_t>(g.height, 3);
  g.width = std::max<std::size_t>(g.width, 3);
  return g;
}

CellRule parse_rule(std::string_view name) {
  if (name == "life" || name == "gol") return LifeRule{};
  int id = -1;
  try {
    std::size_t used = 0;
    id = std::stoi(std::string(name), &used);
    if (used != name.size()) id = -1;
  } catch (const std::exception&) {
    id = -1;
  }
  if (id < 0) throw Error(ErrorCode::invalid_rule, "unknown rule '" + std::string(name) + "'");
  return rule_table(id);
}

void ReservoirConfig::validate() const {
  if (mappings < 1) throw Error(ErrorCode::invalid_parameter, "R (mappings) must be >= 1");
  if (iterations < 1) throw Error(ErrorCode::invalid_parameter, "I (iterations) must be >= 1");
  if (input_dim < 1) throw Error(ErrorCode::invalid_parameter, "D_in must be >= 1");
  if (!is_life() && layout == SegmentLayout::disjoint && input_dim < 3)
    throw Error(ErrorCode::invalid_parameter, "disjoint 1D segments need D_in >= 3");
  if (!is_life() && layout != SegmentLayout::disjoint && mappings * input_dim < 3)
    throw Error(ErrorCode::invalid_parameter, "fused 1D lattice needs R * D_in >= 3");
}

std::size_t ReservoirConfig::cells_per_segment() const {
  if (!is_life()) return static_cast<std::size_t>(input_dim);
  const auto g = life_grid_shape(static_cast<std::size_t>(input_dim));
  return g.height * g.width;
}

std::size_t ReservoirConfig::feature_dim() const {
  return static_cast<std::size_t>(mappings) * static_cast<std::size_t>(iterations) * cells_per_segment();
}

void to_json(nlohmann::json& j, const ReservoirConfig& cfg) {
  j = nlohmann::json{{"rule", rule_name(cfg.rule)},     {"R", cfg.mappings},
                     {"I", cfg.iterations},             {"D_in", cfg.input_dim},
                     {"mode", to_string(cfg.mode)},     {"layout", to_string(cfg.layout)},
                     {"seed", cfg.seed}};
}

void from_json(const nlohmann::json& j, ReservoirConfig& cfg) {
  cfg.rule = parse_rule(j.at("rule").get<std::string>());
  j.at("R").get_to(cfg.mappings);
  j.at("I").get_to(cfg.iterations);
  j.at("D_in").get_to(cfg.input_dim);
  cfg.mode = parse_inject_mode(j.value("mode", std::string("set")));
  cfg.layout = parse_layout(j.value("layout", std::string("scattered")));
  j.at("seed").get_to(cfg.seed);
}

ReservoirState init_state(const ReservoirConfig& cfg) {
  cfg.validate();
  ReservoirState st;
  const std::size_t cells = cfg.cells_per_segment();
  const auto r_count = static_cast<std::size_t>(cfg.mappings);
  st.mappings = make_mappings(cfg.input_dim, cfg.mappings, cfg.seed, cells);
  if (cfg.is_life()) {
    const auto g = life_grid_shape(static_cast<std::size_t>(cfg.input_dim));
    if (cfg.layout == SegmentLayout::disjoint) {
      st.lattices.assign(r_count, LatticeState::grid(g.height, g.width));
    } else {
      st.lattices.push_back(LatticeState::grid(g.height, g.width * r_count));
    }
  } else if (cfg.layout == SegmentLayout::disjoint) {
    st.lattices.assign(r_count, LatticeState::line(cells));
  } else {
    st.lattices.push_back(LatticeState::line(cells * r_count));
  }
  if (cfg.layout == SegmentLayout::scattered) {
    st.cell_order.resize(st.lattices.front().cell_count());
    for (std::size_t i = 0; i < st.cell_order.size(); ++i) st.cell_order[i] = i;
    Rng rng(mix_seed(cfg.seed, 0x5ca77e7ULL));
    rng.shuffle(st.cell_order);
  }
  return st;
}

Reservoir::Reservoir(ReservoirConfig cfg) : Reservoir(cfg, init_state(cfg)) {}

Reservoir::Reservoir(ReservoirConfig cfg, ReservoirState state)
    : cfg_{std::move(cfg)},
      state_{std::move(state)},
      cells_per_segment_{cfg_.cells_per_segment()},
      feature_dim_{cfg_.feature_dim()} {
  cfg_.validate();
  const std::size_t expected_lattices = cfg_.layout == SegmentLayout::disjoint ? static_cast<std::size_t>(cfg_.mappings) : 1;
  if (state_.lattices.size() != expected_lattices || state_.mappings.size() != static_cast<std::size_t>(cfg_.mappings))
    throw Error(ErrorCode::config_mismatch, "reservoir state does not match the configuration");
  if (cfg_.layout == SegmentLayout::scattered) {
    const std::size_t n = state_.lattices.front().cell_count();
    if (state_.cell_order.size() != n) throw Error(ErrorCode::config_mismatch, "scattered layout needs a cell order");
    std::vector<bool> seen(n, false);
    for (auto c : state_.cell_order) {
      if (c >= n || seen[c]) throw Error(ErrorCode::config_mismatch, "cell order is not a permutation");
      seen[c] = true;
    }
  }
  scratch_.resize(2);
}

void Reservoir::clear() {
  for (auto& l : state_.lattices) l.bits().reset();
}

// Lattice index of cell c of segment r for the shared-lattice layouts.
std::size_t Reservoir::cell_index(const LatticeState& lattice, std::size_t r, std::size_t c) const {
  if (!state_.cell_order.empty()) return state_.cell_order[r * cells_per_segment_ + c];
  if (lattice.topology() == Topology::line) return r * cells_per_segment_ + c;
  const std::size_t seg_width = lattice.width() / static_cast<std::size_t>(cfg_.mappings);
  return (c / seg_width) * lattice.width() + r * seg_width + c % seg_width;
}

void Reservoir::emit_segment(const LatticeState& lattice, std::size_t segment, std::size_t iteration,
                             std::span<std::uint64_t> row) const {
  const std::size_t offset = (segment * static_cast<std::size_t>(cfg_.iterations) + iteration) * cells_per_segment_;
  if (cfg_.layout == SegmentLayout::disjoint) {
    deposit_bits(row, offset, lattice.bits().words(), cells_per_segment_);
    return;
  }
  for (std::size_t c = 0; c < cells_per_segment_; ++c) {
    if (lattice.get(cell_index(lattice, segment, c)))
      row[(offset + c) / 64] |= std::uint64_t{1} << ((offset + c) % 64);
  }
}

void Reservoir::step(const BitVector& u, std::span<std::uint64_t> row) {
  if (u.size() != static_cast<std::size_t>(cfg_.input_dim))
    throw Error(ErrorCode::dimension_mismatch, "input has " + std::to_string(u.size()) + " channels, expected " +
                                                   std::to_string(cfg_.input_dim));
  if (row.size() < BitVector::word_count(feature_dim_))
    throw Error(ErrorCode::dimension_mismatch, "feature row too short");
  const auto r_count = static_cast<std::size_t>(cfg_.mappings);
  const auto iters = static_cast<std::size_t>(cfg_.iterations);

  if (cfg_.layout == SegmentLayout::disjoint) {
    LatticeState& next = scratch_[0];
    for (std::size_t r = 0; r < r_count; ++r) {
      LatticeState& lattice = state_.lattices[r];
      inject_in_place(lattice, u, state_.mappings[r], cfg_.mode);
      for (std::size_t i = 0; i < iters; ++i) {
        step_into(lattice, cfg_.rule, next);
        std::swap(lattice, next);
        emit_segment(lattice, r, i, row);
      }
    }
    return;
  }

  LatticeState& lattice = state_.lattices.front();
  for (std::size_t r = 0; r < r_count; ++r) {
    const Mapping& m = state_.mappings[r];
    if (m.segment_width != cells_per_segment_)
      throw Error(ErrorCode::config_mismatch, "mapping width differs from the segment size");
    for_each_set_bit(u.words(), [&](std::size_t d) {
      const std::size_t idx = cell_index(lattice, r, m.positions[d]);
      if (cfg_.mode == InjectMode::xor_) {
        lattice.flip(idx);
      } else {
        lattice.set(idx, true);
      }
    });
  }
  LatticeState& next = scratch_[0];
  for (std::size_t i = 0; i < iters; ++i) {
    step_into(lattice, cfg_.rule, next);
    std::swap(lattice, next);
    for (std::size_t r = 0; r < r_count; ++r) emit_segment(lattice, r, i, row);
  }
}

BitVector Reservoir::step(const BitVector& u) {
  BitVector feature(feature_dim_);
  step(u, feature.words());
  return feature;
}

StepResult process_step(const ReservoirState& state, const BitVector& u, const ReservoirConfig& cfg) {
  Reservoir res(cfg, state);
  BitVector feature = res.step(u);
  return StepResult{res.state(), std::move(feature)};
}

BitMatrix process_sequence(const ReservoirConfig& cfg, const BitMatrix& inputs) {
  return process_sequence(cfg, init_state(cfg), inputs);
}

BitMatrix process_sequence(const ReservoirConfig& cfg, const ReservoirState& initial, const BitMatrix& inputs) {
  if (inputs.rows() < 1) throw Error(ErrorCode::invalid_parameter, "input sequence is empty");
  if (inputs.cols() != static_cast<std::size_t>(cfg.input_dim))
    throw Error(ErrorCode::dimension_mismatch, "input sequence width differs from D_in");
  Reservoir res(cfg, initial);
  BitMatrix out(inputs.rows(), res.feature_dim());
  for (std::size_t t = 0; t < inputs.rows(); ++t) res.step(inputs.row_vector(t), out.row(t));
  return out;
}

void write_feature_matrix(std::ostream& out, const BitMatrix& features, const ReservoirConfig& cfg) {
  nlohmann::json header{{"format", "carc-features-v1"},
                        {"T", features.rows()},
                        {"F", features.cols()},
                        {"words_per_row", features.stride()},
                        {"config", cfg},
                        {"seed", cfg.seed}};
  out << header.dump() << '\n';
  for (auto w : features.words()) {
    unsigned char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(w >> (8 * b));
    out.write(reinterpret_cast<const char*>(bytes), 8);
  }
  if (!out) throw Error(ErrorCode::io_failure, "failed writing feature matrix");
}

BitMatrix read_feature_matrix(std::istream& in, nlohmann::json* header_out) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::io_failure, "missing feature matrix header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io_failure, std::string("malformed feature matrix header: ") + e.what());
  }
  if (header.value("format", "") != "carc-features-v1")
    throw Error(ErrorCode::io_failure, "unrecognized feature matrix format");
  BitMatrix m(header.at("T").get<std::size_t>(), header.at("F").get<std::size_t>());
  for (auto& w : m.words()) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw Error(ErrorCode::io_failure, "truncated feature matrix");
    w = 0;
    for (int b = 0; b < 8; ++b) w |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
  }
  if (header_out != nullptr) *header_out = header;
  return m;
}

}  // namespace carc
