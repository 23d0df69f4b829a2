#include "carc/concepts.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <iterator>
#include <ostream>

#include "carc/error.hpp"
#include "carc/reservoir.hpp"

namespace carc {

namespace {

ReservoirConfig reservoir_config(const ConceptConfig& cfg) {
  ReservoirConfig rc;
  rc.rule = rule_table(cfg.rule);
  rc.mappings = cfg.mappings;
  rc.iterations = cfg.iterations;
  rc.input_dim = cfg.objects;
  rc.mode = InjectMode::xor_;
  rc.layout = SegmentLayout::disjoint;
  rc.seed = cfg.seed;
  return rc;
}

void require_same_config(const Concept& a, const Concept& b) {
  if (!(a.config() == b.config()))
    throw Error(ErrorCode::config_mismatch, "concepts were built with different configurations");
}

Support set_difference(const Support& a, const Support& b) {
  Support out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

}  // namespace

void ConceptConfig::validate() const {
  if (rule < 0 || rule > 255) throw Error(ErrorCode::invalid_rule, "rule must be in 0..255");
  if (!rule_table(rule).is_additive())
    throw Error(ErrorCode::unsupported_rule, "rule " + std::to_string(rule) + " is not additive");
  reservoir_config(*this).validate();
}

std::size_t ConceptConfig::feature_dim() const { return reservoir_config(*this).feature_dim(); }

std::uint64_t ConceptConfig::hash() const noexcept {
  // FNV-1a over the fields in declaration order.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  mix(static_cast<std::uint64_t>(rule));
  mix(static_cast<std::uint64_t>(objects));
  mix(static_cast<std::uint64_t>(mappings));
  mix(static_cast<std::uint64_t>(iterations));
  mix(seed);
  return h;
}

void to_json(nlohmann::json& j, const ConceptConfig& cfg) {
  j = nlohmann::json{{"rule", cfg.rule},   {"objects", cfg.objects}, {"R", cfg.mappings},
                     {"I", cfg.iterations}, {"seed", cfg.seed}};
}

void from_json(const nlohmann::json& j, ConceptConfig& cfg) {
  j.at("rule").get_to(cfg.rule);
  j.at("objects").get_to(cfg.objects);
  j.at("R").get_to(cfg.mappings);
  j.at("I").get_to(cfg.iterations);
  j.at("seed").get_to(cfg.seed);
}

Concept::Concept(ConceptConfig cfg, Support support, BitVector feature)
    : cfg_{cfg}, support_{std::move(support)}, feature_{std::move(feature)} {
  if (feature_.size() != cfg_.feature_dim())
    throw Error(ErrorCode::dimension_mismatch, "concept feature length differs from its configuration");
  for (int s : support_)
    if (s < 0 || s >= cfg_.objects) throw Error(ErrorCode::invalid_parameter, "object index out of range");
}

void Concept::save(std::ostream& out) const {
  std::vector<std::string> words;
  for (auto w : feature_.words()) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(w));
    words.emplace_back(buf);
  }
  const nlohmann::json j{{"format", "carc-concept-v1"},
                         {"config", cfg_},
                         {"config_hash", cfg_.hash()},
                         {"support", support_},
                         {"F", feature_.size()},
                         {"feature", words}};
  out << j.dump() << '\n';
  if (!out) throw Error(ErrorCode::io_failure, "failed writing concept");
}

Concept Concept::load(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io_failure, std::string("malformed concept: ") + e.what());
  }
  if (j.value("format", "") != "carc-concept-v1") throw Error(ErrorCode::io_failure, "unrecognized concept format");
  const auto cfg = j.at("config").get<ConceptConfig>();
  if (j.at("config_hash").get<std::uint64_t>() != cfg.hash())
    throw Error(ErrorCode::config_mismatch, "concept config hash does not match its config");
  BitVector feature(j.at("F").get<std::size_t>());
  const auto words = j.at("feature").get<std::vector<std::string>>();
  if (words.size() != feature.words().size()) throw Error(ErrorCode::io_failure, "concept feature has wrong length");
  for (std::size_t w = 0; w < words.size(); ++w) feature.words()[w] = std::stoull(words[w], nullptr, 16);
  feature.trim();
  return Concept(cfg, j.at("support").get<Support>(), std::move(feature));
}

Concept reservoir_of(const Support& support, const ConceptConfig& cfg) {
  cfg.validate();
  const ReservoirConfig rc = reservoir_config(cfg);
  ReservoirState state = init_state(rc);
  state.mappings.front() = Mapping::identity(static_cast<std::size_t>(cfg.objects));
  BitVector u(static_cast<std::size_t>(cfg.objects));
  for (int s : support) {
    if (s < 0 || s >= cfg.objects) throw Error(ErrorCode::invalid_parameter, "object index out of range");
    u.set(static_cast<std::size_t>(s));
  }
  Reservoir res(rc, std::move(state));
  return Concept(cfg, support, res.step(u));
}

Concept or_c(const Concept& a, const Concept& b) {
  require_same_config(a, b);
  const Concept extra = reservoir_of(set_difference(b.support(), a.support()), a.config());
  Support u = a.support();
  u.insert(b.support().begin(), b.support().end());
  return Concept(a.config(), std::move(u), a.feature() ^ extra.feature());
}

Concept and_c(const Concept& a, const Concept& b) {
  require_same_config(a, b);
  const Concept only_a = reservoir_of(set_difference(a.support(), b.support()), a.config());
  Support both;
  std::set_intersection(a.support().begin(), a.support().end(), b.support().begin(), b.support().end(),
                        std::inserter(both, both.end()));
  return Concept(a.config(), std::move(both), a.feature() ^ only_a.feature());
}

Concept xor_c(const Concept& a, const Concept& b) {
  require_same_config(a, b);
  Support sym;
  std::set_symmetric_difference(a.support().begin(), a.support().end(), b.support().begin(), b.support().end(),
                                std::inserter(sym, sym.end()));
  return Concept(a.config(), std::move(sym), a.feature() ^ b.feature());
}

Concept not_c(const Concept& a) {
  Support rest;
  for (int s = 0; s < a.config().objects; ++s)
    if (!a.support().contains(s)) rest.insert(s);
  return reservoir_of(rest, a.config());
}

BitVector mult(const Concept& a, const Concept& b) {
  require_same_config(a, b);
  return a.feature() & b.feature();
}

}  // namespace carc
