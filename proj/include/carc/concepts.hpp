#pragma once

// Set algebra carried out directly on reservoir features of additive rules.
//
// A concept is the space-time feature produced by a single injection of an
// indicator vector (one cell per object) followed by I evolution steps. For
// additive rules the feature of a symmetric difference is the XOR of the
// features, so unions and intersections can be formed from cached features
// plus the feature of one set difference.

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>

#include <json.hpp>

#include "carc/bitvec.hpp"
#include "carc/ca_engine.hpp"

namespace carc {

struct ConceptConfig {
  int rule = 90;
  int objects = 16;     // universe size, one input channel per object
  int mappings = 1;     // R; mapping 0 is the identity, the rest are seeded permutations
  int iterations = 8;   // I
  std::uint64_t seed = 0;

  void validate() const;  // throws unsupported_rule for non-additive rules
  std::size_t feature_dim() const;
  // Stable digest of every field, stored with saved concepts.
  std::uint64_t hash() const noexcept;
  friend bool operator==(const ConceptConfig&, const ConceptConfig&) = default;
};

void to_json(nlohmann::json& j, const ConceptConfig& cfg);
void from_json(const nlohmann::json& j, ConceptConfig& cfg);

using Support = std::set<int>;

class Concept {
 public:
  Concept(ConceptConfig cfg, Support support, BitVector feature);

  const ConceptConfig& config() const noexcept { return cfg_; }
  const Support& support() const noexcept { return support_; }
  const BitVector& feature() const noexcept { return feature_; }

  void save(std::ostream& out) const;
  static Concept load(std::istream& in);

  friend bool operator==(const Concept&, const Concept&) = default;

 private:
  ConceptConfig cfg_;
  Support support_;
  BitVector feature_;
};

/// Evolves the indicator of `support` from a zero lattice. Each call costs one
/// full evolution (R * objects * I cell updates).
Concept reservoir_of(const Support& support, const ConceptConfig& cfg);

Concept or_c(const Concept& a, const Concept& b);   // C_A ^ C_{B-A}
Concept and_c(const Concept& a, const Concept& b);  // C_A ^ C_{A-B}
Concept xor_c(const Concept& a, const Concept& b);  // C_A ^ C_B, no evolution
/// Complement within the universe {0..objects-1}; recomputed from scratch.
Concept not_c(const Concept& a);
/// Elementwise AND of features; generally not the feature of any support.
BitVector mult(const Concept& a, const Concept& b);

}  // namespace carc
