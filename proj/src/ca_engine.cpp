#include "carc/ca_engine.hpp"

#include <sstream>

#include "carc/error.hpp"

namespace carc {

namespace {

thread_local std::uint64_t t_cell_updates = 0;

using Word = BitVector::word_type;
constexpr std::size_t kBits = BitVector::kWordBits;

// out[i] = in[i-1], out[0] = in[W-1]
void rotate_toward_high(std::span<const Word> in, std::size_t width, std::span<Word> out) {
  const std::size_t n = in.size();
  Word carry = (in[(width - 1) / kBits] >> ((width - 1) % kBits)) & 1U;
  for (std::size_t w = 0; w < n; ++w) {
    const Word next_carry = in[w] >> (kBits - 1);
    out[w] = (in[w] << 1) | carry;
    carry = next_carry;
  }
  if (width % kBits != 0) out[n - 1] &= (Word{1} << (width % kBits)) - 1;
}

// out[i] = in[i+1], out[W-1] = in[0]
void rotate_toward_low(std::span<const Word> in, std::size_t width, std::span<Word> out) {
  const std::size_t n = in.size();
  for (std::size_t w = 0; w < n; ++w) {
    const Word hi = (w + 1 < n) ? (in[w + 1] << (kBits - 1)) : 0;
    out[w] = (in[w] >> 1) | hi;
  }
  const std::size_t top = width - 1;
  out[top / kBits] |= (in[0] & 1U) << (top % kBits);
}

}  // namespace

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_rule: return "invalid rule";
    case ErrorCode::invalid_parameter: return "invalid parameter";
    case ErrorCode::topology_mismatch: return "topology mismatch";
    case ErrorCode::dimension_mismatch: return "dimension mismatch";
    case ErrorCode::numerical_failure: return "numerical failure";
    case ErrorCode::unsupported_rule: return "unsupported rule";
    case ErrorCode::config_mismatch: return "config mismatch";
    case ErrorCode::io_failure: return "I/O failure";
    case ErrorCode::not_found: return "not found";
    case ErrorCode::too_large: return "problem too large";
  }
  return "error";
}

bool RuleTable::is_additive() const noexcept {
  // Over F2 with zero fixed: the update is linear iff it is an XOR of a subset
  // of {left, center, right}, i.e. one of rules 0, 60, 90, 102, 150, 170, 204, 240.
  for (unsigned n = 0; n < 8; ++n) {
    const bool expect = ((n & 4U) ? outputs[4] : 0) ^ ((n & 2U) ? outputs[2] : 0) ^ ((n & 1U) ? outputs[1] : 0);
    if ((outputs[n] != 0) != expect) return false;
  }
  return true;
}

RuleTable rule_table(int rule_id) {
  if (rule_id < 0 || rule_id > 255)
    throw Error(ErrorCode::invalid_rule, "rule id " + std::to_string(rule_id) + " outside 0..255");
  RuleTable t;
  t.rule_id = rule_id;
  for (int n = 0; n < 8; ++n) t.outputs[static_cast<std::size_t>(n)] = static_cast<std::uint8_t>((rule_id >> n) & 1);
  return t;
}

std::string rule_name(const CellRule& rule) {
  if (std::holds_alternative<LifeRule>(rule)) return "life";
  return std::to_string(std::get<RuleTable>(rule).rule_id);
}

LatticeState LatticeState::line(std::size_t width) {
  if (width < 3) throw Error(ErrorCode::invalid_parameter, "1D lattice width must be >= 3");
  LatticeState s;
  s.topology_ = Topology::line;
  s.height_ = 1;
  s.width_ = width;
  s.cells_ = BitVector(width);
  return s;
}

LatticeState LatticeState::grid(std::size_t height, std::size_t width) {
  if (height < 3 || width < 3) throw Error(ErrorCode::invalid_parameter, "2D lattice extents must be >= 3");
  LatticeState s;
  s.topology_ = Topology::grid;
  s.height_ = height;
  s.width_ = width;
  s.cells_ = BitVector(height * width);
  return s;
}

LatticeState LatticeState::line_from_string(std::string_view bits) {
  LatticeState s = line(bits.size());
  s.cells_ = BitVector::from_string(bits);
  return s;
}

LatticeState& LatticeState::operator^=(const LatticeState& o) {
  if (!same_shape(o)) throw Error(ErrorCode::topology_mismatch, "XOR of lattices with different shapes");
  cells_ ^= o.cells_;
  return *this;
}

std::string LatticeState::to_string() const {
  std::string out;
  out.reserve(cells_.size() + height_);
  for (std::size_t r = 0; r < height_; ++r) {
    if (r != 0) out.push_back('\n');
    for (std::size_t c = 0; c < width_; ++c) out.push_back(get(r, c) ? '1' : '0');
  }
  return out;
}

std::string SpaceTimeVolume::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    if (i != 0) out.push_back('\n');
    out += snapshots[i].bits().to_string();
  }
  return out;
}

namespace {

void check_line(const LatticeState& state) {
  if (state.topology() != Topology::line) throw Error(ErrorCode::topology_mismatch, "step_1d needs a 1D lattice");
}

void step_1d_kernel(const LatticeState& in, const RuleTable& rule, bool generic, LatticeState& out) {
  const std::size_t width = in.width();
  const auto center = in.bits().words();
  const std::size_t n = center.size();
  auto dst = out.bits().words();

  thread_local std::vector<Word> left_buf, right_buf;
  left_buf.resize(n);
  right_buf.resize(n);
  rotate_toward_high(center, width, left_buf);
  rotate_toward_low(center, width, right_buf);
  const Word* left = left_buf.data();
  const Word* right = right_buf.data();

  if (!generic && rule.rule_id == 90) {
    for (std::size_t w = 0; w < n; ++w) dst[w] = left[w] ^ right[w];
  } else if (!generic && rule.rule_id == 150) {
    for (std::size_t w = 0; w < n; ++w) dst[w] = left[w] ^ center[w] ^ right[w];
  } else {
    for (std::size_t w = 0; w < n; ++w) {
      Word acc = 0;
      for (unsigned code = 0; code < 8; ++code) {
        if (rule.outputs[code] == 0) continue;
        const Word l = (code & 4U) ? left[w] : ~left[w];
        const Word c = (code & 2U) ? center[w] : ~center[w];
        const Word r = (code & 1U) ? right[w] : ~right[w];
        acc |= l & c & r;
      }
      dst[w] = acc;
    }
    out.bits().trim();
  }
  CellUpdateCounter::add(width);
}

void step_life_kernel(const LatticeState& state, LatticeState& next) {
  const std::size_t h = state.height();
  const std::size_t w = state.width();
  for (std::size_t r = 0; r < h; ++r) {
    const std::size_t up = (r + h - 1) % h;
    const std::size_t down = (r + 1) % h;
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t lc = (c + w - 1) % w;
      const std::size_t rc = (c + 1) % w;
      const int live = state.get(up, lc) + state.get(up, c) + state.get(up, rc) + state.get(r, lc) +
                       state.get(r, rc) + state.get(down, lc) + state.get(down, c) + state.get(down, rc);
      next.set(r, c, live == 3 || (live == 2 && state.get(r, c)));
    }
  }
  CellUpdateCounter::add(h * w);
}

}  // namespace

namespace detail {

LatticeState step_1d_generic(const LatticeState& state, const RuleTable& rule) {
  check_line(state);
  LatticeState next = state;
  step_1d_kernel(state, rule, true, next);
  return next;
}

}  // namespace detail

LatticeState step_1d(const LatticeState& state, const RuleTable& rule) {
  check_line(state);
  LatticeState next = state;
  step_1d_kernel(state, rule, false, next);
  return next;
}

LatticeState step_life(const LatticeState& state) {
  if (state.topology() != Topology::grid) throw Error(ErrorCode::topology_mismatch, "Game of Life needs a 2D lattice");
  LatticeState next = state;
  step_life_kernel(state, next);
  return next;
}

void step_into(const LatticeState& state, const CellRule& rule, LatticeState& out) {
  if (!out.same_shape(state)) out = state;
  if (const auto* table = std::get_if<RuleTable>(&rule)) {
    check_line(state);
    step_1d_kernel(state, *table, false, out);
  } else {
    if (state.topology() != Topology::grid)
      throw Error(ErrorCode::topology_mismatch, "Game of Life needs a 2D lattice");
    step_life_kernel(state, out);
  }
}

LatticeState step(const LatticeState& state, const CellRule& rule) {
  if (const auto* table = std::get_if<RuleTable>(&rule)) return step_1d(state, *table);
  return step_life(state);
}

SpaceTimeVolume evolve(const LatticeState& state, const CellRule& rule, int iterations) {
  if (iterations < 1) throw Error(ErrorCode::invalid_parameter, "iteration count must be >= 1");
  SpaceTimeVolume vol;
  vol.snapshots.reserve(static_cast<std::size_t>(iterations));
  vol.snapshots.push_back(step(state, rule));
  for (int i = 1; i < iterations; ++i) vol.snapshots.push_back(step(vol.snapshots.back(), rule));
  return vol;
}

std::uint64_t CellUpdateCounter::value() noexcept { return t_cell_updates; }
void CellUpdateCounter::reset() noexcept { t_cell_updates = 0; }
void CellUpdateCounter::add(std::uint64_t n) noexcept { t_cell_updates += n; }

}  // namespace carc
