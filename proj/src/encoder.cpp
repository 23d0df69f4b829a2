#include "carc/encoder.hpp"

#include <cmath>
#include <numeric>

#include "carc/error.hpp"
#include "carc/rng.hpp"

namespace carc {

Mapping Mapping::identity(std::size_t width) {
  Mapping m;
  m.segment_width = width;
  m.positions.resize(width);
  std::iota(m.positions.begin(), m.positions.end(), std::size_t{0});
  return m;
}

void to_json(nlohmann::json& j, const Mapping& m) {
  j = nlohmann::json{{"segment_width", m.segment_width}, {"positions", m.positions}, {"seed", m.seed}};
}

void from_json(const nlohmann::json& j, Mapping& m) {
  j.at("segment_width").get_to(m.segment_width);
  j.at("positions").get_to(m.positions);
  j.at("seed").get_to(m.seed);
  std::vector<bool> seen(m.segment_width, false);
  for (auto p : m.positions) {
    if (p >= m.segment_width || seen[p]) throw Error(ErrorCode::invalid_parameter, "mapping is not injective");
    seen[p] = true;
  }
}

std::vector<Mapping> make_mappings(int input_dim, int mapping_count, std::uint64_t seed,
                                   std::size_t segment_width) {
  if (input_dim < 1) throw Error(ErrorCode::invalid_parameter, "input dimension must be >= 1");
  if (mapping_count < 1) throw Error(ErrorCode::invalid_parameter, "mapping count must be >= 1");
  const auto channels = static_cast<std::size_t>(input_dim);
  if (segment_width == 0) segment_width = channels;
  if (segment_width < channels) throw Error(ErrorCode::invalid_parameter, "segment narrower than the input");
  Rng rng(seed);
  std::vector<Mapping> out;
  out.reserve(static_cast<std::size_t>(mapping_count));
  for (int r = 0; r < mapping_count; ++r) {
    // Partial Fisher-Yates: the first D_in slots of a shuffled cell list.
    Mapping cells = Mapping::identity(segment_width);
    for (std::size_t i = 0; i < channels; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(segment_width - i));
      std::swap(cells.positions[i], cells.positions[j]);
    }
    cells.positions.resize(channels);
    cells.seed = seed;
    out.push_back(std::move(cells));
  }
  return out;
}

const char* to_string(InjectMode mode) noexcept { return mode == InjectMode::xor_ ? "xor" : "set"; }

InjectMode parse_inject_mode(std::string_view name) {
  if (name == "xor") return InjectMode::xor_;
  if (name == "set" || name == "or") return InjectMode::set;
  throw Error(ErrorCode::invalid_parameter, "unknown injection mode '" + std::string(name) + "'");
}

void inject_in_place(LatticeState& state, const BitVector& u, const Mapping& mapping, InjectMode mode,
                     std::size_t base) {
  if (u.size() != mapping.channels())
    throw Error(ErrorCode::dimension_mismatch, "input has " + std::to_string(u.size()) + " channels, mapping has " +
                                                   std::to_string(mapping.channels()));
  if (base + mapping.segment_width > state.cell_count())
    throw Error(ErrorCode::dimension_mismatch, "mapped segment exceeds the lattice");
  for_each_set_bit(u.words(), [&](std::size_t d) {
    const std::size_t cell = base + mapping.positions[d];
    if (mode == InjectMode::xor_) {
      state.flip(cell);
    } else {
      state.set(cell, true);
    }
  });
}

LatticeState inject(LatticeState state, const BitVector& u, const Mapping& mapping, InjectMode mode,
                    std::size_t base) {
  inject_in_place(state, u, mapping, mode, base);
  return state;
}

WeightedEncoder::WeightedEncoder(std::size_t cells, std::size_t input_dim, std::vector<double> weights,
                                 std::vector<double> thresholds)
    : cells_{cells}, input_dim_{input_dim}, weights_{std::move(weights)}, thresholds_{std::move(thresholds)} {
  if (cells_ == 0 || input_dim_ == 0) throw Error(ErrorCode::invalid_parameter, "encoder needs cells and inputs");
  if (weights_.size() != cells_ * input_dim_ || thresholds_.size() != cells_)
    throw Error(ErrorCode::dimension_mismatch, "encoder weight/threshold sizes do not match cells x inputs");
  for (std::size_t c = 0; c < cells_; ++c) {
    bool any = false;
    for (std::size_t d = 0; d < input_dim_; ++d) {
      if (!std::isfinite(weight(c, d))) throw Error(ErrorCode::invalid_parameter, "non-finite encoder weight");
      any = any || weight(c, d) != 0.0;
    }
    if (!any) throw Error(ErrorCode::invalid_parameter, "encoder row " + std::to_string(c) + " has no weights");
    if (!std::isfinite(thresholds_[c])) throw Error(ErrorCode::invalid_parameter, "non-finite encoder threshold");
  }
}

WeightedEncoder WeightedEncoder::random(std::size_t cells, std::size_t input_dim, std::size_t fan_in,
                                        std::uint64_t seed) {
  if (fan_in == 0 || fan_in > input_dim) throw Error(ErrorCode::invalid_parameter, "fan-in must be in 1..D_in");
  Rng rng(seed);
  std::vector<double> w(cells * input_dim, 0.0);
  std::vector<std::size_t> channels(input_dim);
  for (std::size_t c = 0; c < cells; ++c) {
    std::iota(channels.begin(), channels.end(), std::size_t{0});
    rng.shuffle(channels);
    for (std::size_t k = 0; k < fan_in; ++k) {
      double v = 0.0;
      while (v == 0.0) v = 2.0 * rng.uniform() - 1.0;
      w[c * input_dim + channels[k]] = v;
    }
  }
  return WeightedEncoder(cells, input_dim, std::move(w), std::vector<double>(cells, 0.0));
}

WeightedEncoder WeightedEncoder::scaled(double factor) const {
  auto w = weights_;
  auto t = thresholds_;
  for (auto& v : w) v *= factor;
  for (auto& v : t) v *= factor;
  return WeightedEncoder(cells_, input_dim_, std::move(w), std::move(t));
}

BitVector encode_weighted(std::span<const double> x, const WeightedEncoder& enc) {
  if (x.size() != enc.input_dim()) throw Error(ErrorCode::dimension_mismatch, "input length differs from encoder");
  for (double v : x)
    if (!std::isfinite(v)) throw Error(ErrorCode::invalid_parameter, "non-finite input value");
  BitVector out(enc.cells());
  for (std::size_t c = 0; c < enc.cells(); ++c) {
    double acc = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) acc += enc.weight(c, d) * x[d];
    if (acc > enc.threshold(c)) out.set(c);
  }
  return out;
}

}  // namespace carc
