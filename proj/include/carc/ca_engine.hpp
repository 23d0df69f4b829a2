#pragma once

// Bit-packed evolution of elementary (radius-1, binary) cellular automata and
// Conway's Game of Life. All lattices are periodic.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "carc/bitvec.hpp"

namespace carc {

/// Wolfram-coded truth table of an elementary rule. outputs[n] is the next
/// state for the neighborhood (left, center, right) read as the 3-bit number n.
struct RuleTable {
  int rule_id = 0;
  std::array<std::uint8_t, 8> outputs{};

  bool apply(bool left, bool center, bool right) const noexcept {
    return outputs[(static_cast<unsigned>(left) << 2) | (static_cast<unsigned>(center) << 1) |
                   static_cast<unsigned>(right)] != 0;
  }
  // Rules whose update commutes with XOR of configurations.
  bool is_additive() const noexcept;

  friend bool operator==(const RuleTable&, const RuleTable&) = default;
};

RuleTable rule_table(int rule_id);

/// Marker for Conway's Game of Life (B3/S23, Moore neighborhood).
struct LifeRule {
  friend bool operator==(const LifeRule&, const LifeRule&) = default;
};

using CellRule = std::variant<RuleTable, LifeRule>;

std::string rule_name(const CellRule& rule);

enum class Topology { line, grid };

class LatticeState {
 public:
  LatticeState() = default;

  // Minimum extent is 3 in every dimension.
  static LatticeState line(std::size_t width);
  static LatticeState grid(std::size_t height, std::size_t width);
  static LatticeState line_from_string(std::string_view bits);

  Topology topology() const noexcept { return topology_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t cell_count() const noexcept { return cells_.size(); }

  bool get(std::size_t i) const noexcept { return cells_.test(i); }
  bool get(std::size_t row, std::size_t col) const noexcept { return cells_.test(row * width_ + col); }
  void set(std::size_t i, bool v) noexcept { cells_.set(i, v); }
  void set(std::size_t row, std::size_t col, bool v) noexcept { cells_.set(row * width_ + col, v); }
  void flip(std::size_t i) noexcept { cells_.flip(i); }

  const BitVector& bits() const noexcept { return cells_; }
  BitVector& bits() noexcept { return cells_; }

  bool same_shape(const LatticeState& o) const noexcept {
    return topology_ == o.topology_ && width_ == o.width_ && height_ == o.height_;
  }

  LatticeState& operator^=(const LatticeState& o);
  friend LatticeState operator^(LatticeState a, const LatticeState& b) { return a ^= b; }
  friend bool operator==(const LatticeState&, const LatticeState&) = default;

  // One row of '0'/'1' per lattice row.
  std::string to_string() const;

 private:
  Topology topology_ = Topology::line;
  std::size_t height_ = 1;
  std::size_t width_ = 0;
  BitVector cells_;
};

/// The I states produced after steps 1..I; the injected state is not included.
struct SpaceTimeVolume {
  std::vector<LatticeState> snapshots;

  std::size_t iterations() const noexcept { return snapshots.size(); }
  const LatticeState& final_state() const { return snapshots.back(); }
  // Snapshot rows joined by '\n'; 2D snapshots are flattened row-major.
  std::string to_string() const;
  friend bool operator==(const SpaceTimeVolume&, const SpaceTimeVolume&) = default;
};

LatticeState step_1d(const LatticeState& state, const RuleTable& rule);
LatticeState step_life(const LatticeState& state);
LatticeState step(const LatticeState& state, const CellRule& rule);
// Same as step() but writes into `out`, reusing its storage. `out` must not alias `state`.
void step_into(const LatticeState& state, const CellRule& rule, LatticeState& out);

SpaceTimeVolume evolve(const LatticeState& state, const CellRule& rule, int iterations);

namespace detail {
// Word-parallel minterm evaluation; used for every rule when forced.
LatticeState step_1d_generic(const LatticeState& state, const RuleTable& rule);
}  // namespace detail

/// Per-thread tally of cell updates performed by step functions.
/// One update is counted per cell per CA iteration.
struct CellUpdateCounter {
  static std::uint64_t value() noexcept;
  static void reset() noexcept;
  static void add(std::uint64_t n) noexcept;
};

}  // namespace carc
