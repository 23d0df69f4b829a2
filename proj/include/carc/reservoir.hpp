#pragma once

// R randomly mapped CA segments driven by a binary input sequence. Each time
// step injects the input through every mapping, evolves I iterations and
// emits the concatenated space-time volume as one binary feature row.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "carc/bitmatrix.hpp"
#include "carc/ca_engine.hpp"
#include "carc/encoder.hpp"

namespace carc {

/// How the R mapped segments share lattice cells.
///  disjoint: R independent rings (or tori) of cells_per_segment cells.
///  fused: the R segments are laid side by side on one ring (or one H x R*W
///         torus), so activity crosses segment borders.
///  scattered: one fused lattice whose cells are assigned to segments by a
///         seeded permutation, so each mapping lands on cells spread over the
///         whole lattice.
enum class SegmentLayout { disjoint, fused, scattered };

const char* to_string(SegmentLayout layout) noexcept;
SegmentLayout parse_layout(std::string_view name);

struct GridShape {
  std::size_t height = 0;
  std::size_t width = 0;
  friend bool operator==(const GridShape&, const GridShape&) = default;
};

// Smallest near-square torus holding `cells` cells, at least 3 x 3.
GridShape life_grid_shape(std::size_t cells);

struct ReservoirConfig {
  CellRule rule = rule_table(90);
  int mappings = 1;    // R
  int iterations = 1;  // I
  int input_dim = 1;   // D_in
  InjectMode mode = InjectMode::set;
  SegmentLayout layout = SegmentLayout::scattered;
  std::uint64_t seed = 0;

  void validate() const;
  bool is_life() const noexcept { return std::holds_alternative<LifeRule>(rule); }
  std::size_t cells_per_segment() const;
  std::size_t feature_dim() const;
};

void to_json(nlohmann::json& j, const ReservoirConfig& cfg);
void from_json(const nlohmann::json& j, ReservoirConfig& cfg);
// Accepts "life" or an elementary rule number.
CellRule parse_rule(std::string_view name);

struct ReservoirState {
  std::vector<LatticeState> lattices;  // R for disjoint, 1 for fused
  std::vector<Mapping> mappings;       // always R
  // scattered only: cell_order[r * cells + c] is the lattice cell holding
  // cell c of segment r (line index, or row-major for a torus).
  std::vector<std::size_t> cell_order;
};

ReservoirState init_state(const ReservoirConfig& cfg);

/// Stateful driver. Feature layout is (segment r, iteration i, cell c),
/// lexicographic; for 2D segments c runs row-major within the segment.
class Reservoir {
 public:
  explicit Reservoir(ReservoirConfig cfg);
  Reservoir(ReservoirConfig cfg, ReservoirState state);

  const ReservoirConfig& config() const noexcept { return cfg_; }
  const ReservoirState& state() const noexcept { return state_; }
  std::size_t feature_dim() const noexcept { return feature_dim_; }

  // Zeroes every lattice; mappings are kept.
  void clear();

  // Consumes one input vector; writes the feature into `row`
  // (feature_dim() bits, previously zeroed).
  void step(const BitVector& u, std::span<std::uint64_t> row);
  BitVector step(const BitVector& u);

 private:
  void emit_segment(const LatticeState& lattice, std::size_t segment, std::size_t iteration,
                    std::span<std::uint64_t> row) const;
  std::size_t cell_index(const LatticeState& lattice, std::size_t segment, std::size_t c) const;

  ReservoirConfig cfg_;
  ReservoirState state_;
  std::size_t cells_per_segment_;
  std::size_t feature_dim_;
  std::vector<LatticeState> scratch_;
};

struct StepResult {
  ReservoirState state;
  BitVector feature;
};

StepResult process_step(const ReservoirState& state, const BitVector& u, const ReservoirConfig& cfg);

/// Row t is the feature after consuming inputs[0..t]; state carries across rows.
BitMatrix process_sequence(const ReservoirConfig& cfg, const BitMatrix& inputs);
BitMatrix process_sequence(const ReservoirConfig& cfg, const ReservoirState& initial, const BitMatrix& inputs);

/// Packed feature export: a JSON header line followed by the raw row words
/// (little-endian uint64, rows x ceil(F/64)).
void write_feature_matrix(std::ostream& out, const BitMatrix& features, const ReservoirConfig& cfg);
BitMatrix read_feature_matrix(std::istream& in, nlohmann::json* header = nullptr);

}  // namespace carc
