#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "carc/error.hpp"
#include "carc/reservoir.hpp"

using namespace carc;

namespace {

ReservoirConfig make_cfg(int rule, int r, int i, int d_in, InjectMode mode, SegmentLayout layout,
                         std::uint64_t seed = 1) {
  ReservoirConfig cfg;
  cfg.rule = rule_table(rule);
  cfg.mappings = r;
  cfg.iterations = i;
  cfg.input_dim = d_in;
  cfg.mode = mode;
  cfg.layout = layout;
  cfg.seed = seed;
  return cfg;
}

BitMatrix random_inputs(std::mt19937_64& gen, std::size_t t, std::size_t d) {
  BitMatrix m(t, d);
  for (std::size_t r = 0; r < t; ++r)
    for (std::size_t c = 0; c < d; ++c) m.set(r, c, gen() & 1);
  return m;
}

BitMatrix xor_of(const BitMatrix& a, const BitMatrix& b) {
  BitMatrix out = a;
  for (std::size_t w = 0; w < out.words().size(); ++w) out.words()[w] ^= b.words()[w];
  return out;
}

// Per-step reference built from the engine primitives and an explicit
// segment-to-lattice cell map.
BitMatrix reference_features(const ReservoirConfig& cfg, const ReservoirState& st, const BitMatrix& inputs) {
  const std::size_t cells = cfg.cells_per_segment();
  const auto r_count = static_cast<std::size_t>(cfg.mappings);
  const auto iters = static_cast<std::size_t>(cfg.iterations);
  BitMatrix out(inputs.rows(), cfg.feature_dim());
  auto lattices = st.lattices;
  auto where = [&](std::size_t r, std::size_t c) -> std::pair<std::size_t, std::size_t> {
    if (cfg.layout == SegmentLayout::disjoint) return {r, c};
    if (cfg.layout == SegmentLayout::scattered) return {0, st.cell_order[r * cells + c]};
    const auto& l = st.lattices[0];
    if (l.topology() == Topology::line) return {0, r * cells + c};
    const std::size_t w = l.width() / r_count;  // segment block width inside the shared torus
    return {0, (c / w) * l.width() + r * w + c % w};
  };
  for (std::size_t t = 0; t < inputs.rows(); ++t) {
    for (std::size_t r = 0; r < r_count; ++r)
      for (std::size_t d = 0; d < static_cast<std::size_t>(cfg.input_dim); ++d) {
        if (!inputs.test(t, d)) continue;
        auto [l, idx] = where(r, st.mappings[r].positions[d]);
        if (cfg.mode == InjectMode::xor_) {
          lattices[l].flip(idx);
        } else {
          lattices[l].set(idx, true);
        }
      }
    std::vector<SpaceTimeVolume> vols;
    for (auto& l : lattices) {
      vols.push_back(evolve(l, cfg.rule, cfg.iterations));
      l = vols.back().final_state();
    }
    for (std::size_t r = 0; r < r_count; ++r)
      for (std::size_t i = 0; i < iters; ++i)
        for (std::size_t c = 0; c < cells; ++c) {
          auto [l, idx] = where(r, c);
          if (vols[l].snapshots[i].get(idx)) out.set(t, (r * iters + i) * cells + c);
        }
  }
  return out;
}

const SegmentLayout kLayouts[] = {SegmentLayout::disjoint, SegmentLayout::fused, SegmentLayout::scattered};

}  // namespace

TEST_SUITE("reservoir") {
  TEST_CASE("init_state shapes") {
    const auto st = init_state(make_cfg(90, 2, 3, 4, InjectMode::xor_, SegmentLayout::disjoint));
    REQUIRE(st.lattices.size() == 2);
    for (const auto& l : st.lattices) {
      CHECK(l.width() == 4);
      CHECK(l.bits().none());
    }
    CHECK(st.mappings.size() == 2);
    CHECK(st.cell_order.empty());

    const auto fused = init_state(make_cfg(90, 5, 3, 4, InjectMode::set, SegmentLayout::fused));
    REQUIRE(fused.lattices.size() == 1);
    CHECK(fused.lattices[0].width() == 20);

    const auto sc = init_state(make_cfg(90, 5, 3, 4, InjectMode::set, SegmentLayout::scattered, 9));
    CHECK(std::set<std::size_t>(sc.cell_order.begin(), sc.cell_order.end()).size() == 20);
    CHECK(sc.cell_order == init_state(make_cfg(90, 5, 3, 4, InjectMode::set, SegmentLayout::scattered, 9)).cell_order);
    CHECK(sc.mappings == init_state(make_cfg(90, 5, 3, 4, InjectMode::set, SegmentLayout::scattered, 9)).mappings);

    CHECK_THROWS_AS(init_state(make_cfg(90, 0, 3, 4, InjectMode::xor_, SegmentLayout::disjoint)), Error);
    CHECK_THROWS_AS(init_state(make_cfg(90, 1, 0, 4, InjectMode::xor_, SegmentLayout::disjoint)), Error);
    CHECK_THROWS_AS(init_state(make_cfg(90, 1, 1, 2, InjectMode::xor_, SegmentLayout::disjoint)), Error);
  }

  TEST_CASE("life segments use the smallest near-square torus of side >= 3") {
    CHECK(life_grid_shape(4) == GridShape{3, 3});
    CHECK(life_grid_shape(7) == GridShape{3, 3});
    CHECK(life_grid_shape(10) == GridShape{3, 4});
    CHECK(life_grid_shape(16) == GridShape{4, 4});
    ReservoirConfig cfg;
    cfg.rule = LifeRule{};
    cfg.mappings = 3;
    cfg.iterations = 2;
    cfg.input_dim = 4;
    cfg.layout = SegmentLayout::fused;
    const auto st = init_state(cfg);
    CHECK(st.lattices[0].height() == 3);
    CHECK(st.lattices[0].width() == 9);
    CHECK(cfg.feature_dim() == 3 * 2 * 9);
  }

  TEST_CASE("width-4 rule 90 step, identity mapping") {
    auto cfg = make_cfg(90, 1, 2, 4, InjectMode::xor_, SegmentLayout::disjoint);
    auto st = init_state(cfg);
    st.mappings[0] = Mapping::identity(4);
    const auto res = process_step(st, BitVector::from_string("0010"), cfg);
    // 0010 -> 0101 -> 0000 under left XOR right on a 4-ring.
    CHECK(res.feature.to_string() == "01010000");
    CHECK(res.state.lattices[0].bits().none());
  }

  TEST_CASE("quiescence and feature length") {
    for (auto layout : kLayouts)
      for (auto mode : {InjectMode::xor_, InjectMode::set}) {
        const auto cfg = make_cfg(90, 3, 5, 4, mode, layout);
        Reservoir res(cfg);
        for (int t = 0; t < 4; ++t) {
          const auto f = res.step(BitVector(4));
          CHECK(f.size() == 3 * 5 * 4);
          CHECK(f.none());
        }
      }
  }

  TEST_CASE("features match the primitive-level reference for every layout and mode") {
    std::mt19937_64 gen(51);
    for (int rule : {90, 30, 110})
      for (auto layout : kLayouts)
        for (auto mode : {InjectMode::xor_, InjectMode::set}) {
          const auto cfg = make_cfg(rule, 1 + static_cast<int>(gen() % 9), 1 + static_cast<int>(gen() % 7), 4, mode,
                                    layout, gen());
          const auto inputs = random_inputs(gen, 12, 4);
          REQUIRE(process_sequence(cfg, inputs) == reference_features(cfg, init_state(cfg), inputs));
        }
  }

  TEST_CASE("life reservoir matches the reference") {
    std::mt19937_64 gen(53);
    for (auto layout : kLayouts) {
      ReservoirConfig cfg;
      cfg.rule = LifeRule{};
      cfg.mappings = 4;
      cfg.iterations = 3;
      cfg.input_dim = 7;
      cfg.layout = layout;
      cfg.seed = 5;
      const auto inputs = random_inputs(gen, 10, 7);
      REQUIRE(process_sequence(cfg, inputs) == reference_features(cfg, init_state(cfg), inputs));
    }
  }

  TEST_CASE("single row sequence equals one step") {
    std::mt19937_64 gen(57);
    const auto cfg = make_cfg(150, 4, 3, 5, InjectMode::xor_, SegmentLayout::scattered, 3);
    const auto inputs = random_inputs(gen, 1, 5);
    const auto rows = process_sequence(cfg, inputs);
    CHECK(rows.row_vector(0) == process_step(init_state(cfg), inputs.row_vector(0), cfg).feature);
  }

  TEST_CASE("xor-driven additive reservoirs are linear in the input sequence") {
    std::mt19937_64 gen(59);
    for (int rule : {90, 150})
      for (auto layout : kLayouts)
        for (int k = 0; k < 40; ++k) {
          const auto cfg = make_cfg(rule, 1 + static_cast<int>(gen() % 8), 1 + static_cast<int>(gen() % 8),
                                    3 + static_cast<int>(gen() % 5), InjectMode::xor_, layout, gen());
          const auto t = 1 + gen() % 20;
          const auto u = random_inputs(gen, t, static_cast<std::size_t>(cfg.input_dim));
          const auto v = random_inputs(gen, t, static_cast<std::size_t>(cfg.input_dim));
          REQUIRE(process_sequence(cfg, xor_of(u, v)) == xor_of(process_sequence(cfg, u), process_sequence(cfg, v)));
        }
  }

  TEST_CASE("clear resets lattices and keeps mappings") {
    const auto cfg = make_cfg(90, 4, 4, 4, InjectMode::set, SegmentLayout::scattered, 8);
    Reservoir res(cfg);
    const auto first = res.step(BitVector::from_string("1001"));
    (void)res.step(BitVector::from_string("0110"));
    res.clear();
    CHECK(res.step(BitVector::from_string("1001")) == first);
  }

  TEST_CASE("shape errors") {
    const auto cfg = make_cfg(90, 2, 2, 4, InjectMode::xor_, SegmentLayout::disjoint);
    Reservoir res(cfg);
    CHECK_THROWS_AS(res.step(BitVector(5)), Error);
    CHECK_THROWS_AS(process_sequence(cfg, BitMatrix(3, 5)), Error);
    CHECK_THROWS_AS(process_sequence(cfg, BitMatrix(0, 4)), Error);
    auto st = init_state(cfg);
    st.lattices.pop_back();
    CHECK_THROWS_AS(Reservoir(cfg, st), Error);
    auto sc_cfg = cfg;
    sc_cfg.layout = SegmentLayout::scattered;
    auto sc = init_state(sc_cfg);
    sc.cell_order[0] = sc.cell_order[1];
    CHECK_THROWS_AS(Reservoir(sc_cfg, sc), Error);
  }

  TEST_CASE("config JSON and packed feature export round trip") {
    std::mt19937_64 gen(61);
    const auto cfg = make_cfg(182, 3, 4, 4, InjectMode::set, SegmentLayout::fused, 77);
    const nlohmann::json j = cfg;
    const auto back = j.get<ReservoirConfig>();
    CHECK(nlohmann::json(back) == j);
    CHECK(parse_rule("life") == CellRule{LifeRule{}});
    CHECK_THROWS_AS(parse_rule("9x"), Error);

    const auto features = process_sequence(cfg, random_inputs(gen, 9, 4));
    std::stringstream buf;
    write_feature_matrix(buf, features, cfg);
    nlohmann::json header;
    CHECK(read_feature_matrix(buf, &header) == features);
    CHECK(header["F"] == cfg.feature_dim());
    CHECK(header["seed"] == 77);
    std::stringstream truncated(buf.str().substr(0, buf.str().size() / 2));
    CHECK_THROWS_AS(read_feature_matrix(truncated), Error);
  }
}
