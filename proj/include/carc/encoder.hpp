#pragma once

// Input encoding: random mapping of binary channels onto reservoir cells, and
// weighted-sum binarization for real-valued input.

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "carc/bitvec.hpp"
#include "carc/ca_engine.hpp"

namespace carc {

/// Injective assignment of input channel d to cell positions[d] of a segment.
struct Mapping {
  std::size_t segment_width = 0;
  std::vector<std::size_t> positions;
  std::uint64_t seed = 0;

  std::size_t channels() const noexcept { return positions.size(); }
  static Mapping identity(std::size_t width);
  friend bool operator==(const Mapping&, const Mapping&) = default;
};

void to_json(nlohmann::json& j, const Mapping& m);
void from_json(const nlohmann::json& j, Mapping& m);

/// R independent uniform injections of D_in channels into segments of
/// `segment_width` cells (default D_in, i.e. random permutations).
std::vector<Mapping> make_mappings(int input_dim, int mapping_count, std::uint64_t seed,
                                   std::size_t segment_width = 0);

enum class InjectMode { xor_, set };

const char* to_string(InjectMode mode) noexcept;
InjectMode parse_inject_mode(std::string_view name);

/// Writes u into the cells at base + mapping.positions[d]. xor_ flips, set ORs.
/// Other cells are untouched.
LatticeState inject(LatticeState state, const BitVector& u, const Mapping& mapping, InjectMode mode,
                    std::size_t base = 0);
void inject_in_place(LatticeState& state, const BitVector& u, const Mapping& mapping, InjectMode mode,
                     std::size_t base = 0);

/// cells x D_in weights (row-major) with one threshold per cell.
class WeightedEncoder {
 public:
  WeightedEncoder(std::size_t cells, std::size_t input_dim, std::vector<double> weights,
                  std::vector<double> thresholds);

  // Random sparse weights: each row keeps `fan_in` uniformly chosen
  // channels with weights in [-1, 1); thresholds are zero.
  static WeightedEncoder random(std::size_t cells, std::size_t input_dim, std::size_t fan_in, std::uint64_t seed);

  std::size_t cells() const noexcept { return cells_; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  double weight(std::size_t cell, std::size_t d) const { return weights_[cell * input_dim_ + d]; }
  double threshold(std::size_t cell) const { return thresholds_[cell]; }

  WeightedEncoder scaled(double factor) const;

 private:
  std::size_t cells_;
  std::size_t input_dim_;
  std::vector<double> weights_;
  std::vector<double> thresholds_;
};

/// bit c = 1 iff dot(weights[c], x) > threshold[c].
BitVector encode_weighted(std::span<const double> x, const WeightedEncoder& enc);

}  // namespace carc
