#include <doctest.h>

#include <random>

#include "carc/ca_engine.hpp"
#include "carc/error.hpp"
#include "oracles.hpp"

using namespace carc;

namespace {

oracle::Cells cells_of(const LatticeState& s) {
  oracle::Cells c(s.cell_count());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = s.get(i) ? 1 : 0;
  return c;
}

LatticeState random_line(std::mt19937_64& gen, std::size_t width) {
  auto s = LatticeState::line(width);
  for (std::size_t i = 0; i < width; ++i) s.set(i, gen() & 1);
  return s;
}

}  // namespace

TEST_SUITE("ca_engine") {
  TEST_CASE("rule tables follow the Wolfram numbering") {
    const auto r90 = rule_table(90);
    CHECK(r90.apply(true, false, false));
    CHECK(r90.apply(false, false, true));
    CHECK_FALSE(r90.apply(true, false, true));
    CHECK_FALSE(r90.apply(false, true, false));
    CHECK(rule_table(0).outputs == std::array<std::uint8_t, 8>{});
    CHECK_THROWS_AS(rule_table(256), Error);
    CHECK_THROWS_AS(rule_table(-1), Error);
  }

  TEST_CASE("additive rules are exactly the XOR combinations") {
    std::vector<int> additive;
    for (int r = 0; r < 256; ++r)
      if (rule_table(r).is_additive()) additive.push_back(r);
    CHECK(additive == std::vector<int>{0, 60, 90, 102, 150, 170, 204, 240});
  }

  TEST_CASE("lattice invariants") {
    CHECK_THROWS_AS(LatticeState::line(2), Error);
    CHECK_THROWS_AS(LatticeState::grid(2, 5), Error);
    CHECK(LatticeState::grid(3, 4).cell_count() == 12);
  }

  TEST_CASE("rule 90 by hand") {
    const auto s = LatticeState::line_from_string("00100");
    const auto v = evolve(s, rule_table(90), 2);
    REQUIRE(v.iterations() == 2);
    CHECK(v.snapshots[0].to_string() == "01010");
    CHECK(v.snapshots[1].to_string() == "10001");
    CHECK_THROWS_AS(evolve(s, rule_table(90), 0), Error);
  }

  TEST_CASE("single iteration equals one step") {
    std::mt19937_64 gen(11);
    const auto s = random_line(gen, 37);
    for (int rule : {30, 90, 110, 150}) CHECK(evolve(s, rule_table(rule), 1).final_state() == step(s, rule_table(rule)));
  }

  TEST_CASE("every rule matches the per-cell oracle, fast and generic paths") {
    std::mt19937_64 gen(17);
    for (int rule = 0; rule < 256; ++rule) {
      for (std::size_t width : {3, 5, 63, 64, 65, 130, 200}) {
        const auto s = random_line(gen, width);
        const auto expect = oracle::step_elementary(cells_of(s), rule);
        REQUIRE(cells_of(step_1d(s, rule_table(rule))) == expect);
        REQUIRE(cells_of(detail::step_1d_generic(s, rule_table(rule))) == expect);
      }
    }
  }

  TEST_CASE("step_into reuses storage and agrees with step") {
    std::mt19937_64 gen(19);
    LatticeState out;
    for (int k = 0; k < 50; ++k) {
      const auto s = random_line(gen, 20 + k);
      step_into(s, rule_table(110), out);
      REQUIRE(out == step(s, rule_table(110)));
    }
  }

  TEST_CASE("rules 90 and 150 are additive over XOR") {
    std::mt19937_64 gen(23);
    for (int rule : {90, 150}) {
      for (int k = 0; k < 1000; ++k) {
        const std::size_t width = 3 + gen() % 150;
        const auto a = random_line(gen, width);
        const auto b = random_line(gen, width);
        const int iters = 1 + static_cast<int>(gen() % 6);
        const auto va = evolve(a, rule_table(rule), iters);
        const auto vb = evolve(b, rule_table(rule), iters);
        const auto vab = evolve(a ^ b, rule_table(rule), iters);
        for (int i = 0; i < iters; ++i) REQUIRE(vab.snapshots[i] == (va.snapshots[i] ^ vb.snapshots[i]));
      }
    }
  }

  TEST_CASE("rule 30 is not additive") {
    std::mt19937_64 gen(29);
    bool violated = false;
    for (int k = 0; k < 100 && !violated; ++k) {
      const auto a = random_line(gen, 16), b = random_line(gen, 16);
      violated = step(a ^ b, rule_table(30)) != (step(a, rule_table(30)) ^ step(b, rule_table(30)));
    }
    CHECK(violated);
  }

  TEST_CASE("game of life patterns") {
    auto blinker = LatticeState::grid(5, 5);
    blinker.set(2, 1, true);
    blinker.set(2, 2, true);
    blinker.set(2, 3, true);
    const auto next = step_life(blinker);
    CHECK(next.get(1, 2));
    CHECK(next.get(3, 2));
    CHECK_FALSE(next.get(2, 1));
    CHECK(step_life(next) == blinker);

    auto block = LatticeState::grid(4, 4);
    for (std::size_t r : {1, 2})
      for (std::size_t c : {1, 2}) block.set(r, c, true);
    CHECK(step_life(block) == block);

    // A glider on an 8 x 8 torus returns to its start after 32 generations.
    auto glider = LatticeState::grid(8, 8);
    glider.set(0, 1, true);
    glider.set(1, 2, true);
    glider.set(2, 0, true);
    glider.set(2, 1, true);
    glider.set(2, 2, true);
    CHECK(evolve(glider, LifeRule{}, 32).final_state() == glider);
    CHECK(evolve(glider, LifeRule{}, 4).final_state() != glider);
  }

  TEST_CASE("game of life matches the neighbor-count oracle") {
    std::mt19937_64 gen(31);
    for (auto [h, w] : std::vector<std::pair<std::size_t, std::size_t>>{{3, 3}, {3, 48}, {7, 9}, {5, 64}, {6, 65}, {12, 130}}) {
      for (int k = 0; k < 20; ++k) {
        auto s = LatticeState::grid(h, w);
        for (std::size_t i = 0; i < s.cell_count(); ++i) s.set(i, gen() % 3 == 0);
        REQUIRE(cells_of(step_life(s)) == oracle::step_life(cells_of(s), h, w));
      }
    }
  }

  TEST_CASE("topology errors") {
    CHECK_THROWS_AS(step(LatticeState::grid(3, 3), rule_table(90)), Error);
    CHECK_THROWS_AS(step(LatticeState::line(8), LifeRule{}), Error);
    auto a = LatticeState::line(8);
    CHECK_THROWS_AS(a ^= LatticeState::line(9), Error);
  }

  TEST_CASE("cell update counter") {
    CellUpdateCounter::reset();
    const auto s = LatticeState::line(40);
    (void)evolve(s, rule_table(90), 7);
    CHECK(CellUpdateCounter::value() == 280);
    (void)step(LatticeState::grid(4, 6), LifeRule{});
    CHECK(CellUpdateCounter::value() == 304);
  }
}

TEST_SUITE("ca_engine") {
  TEST_CASE("hand-checked single steps") {
    CHECK(step_1d(LatticeState::line_from_string("00100"), rule_table(90)).to_string() == "01010");
    CHECK(step_1d(LatticeState::line_from_string("00100"), rule_table(110)).to_string() == "01100");
    CHECK(step_1d(LatticeState::line(8), rule_table(90)).bits().none());
    CHECK(step_life(LatticeState::grid(5, 5)).bits().none());
    // 110 = 01101110: neighborhoods 111..000
    const std::array<std::uint8_t, 8> r110{0, 1, 1, 1, 0, 1, 1, 0};
    CHECK(rule_table(110).outputs == r110);
  }

  TEST_CASE("width-3 lattices reproduce each table entry at the centre cell") {
    for (int rule = 0; rule < 256; ++rule)
      for (unsigned n = 0; n < 8; ++n) {
        auto s = LatticeState::line(3);
        s.set(0, (n >> 2) & 1U);
        s.set(1, (n >> 1) & 1U);
        s.set(2, n & 1U);
        REQUIRE(step_1d(s, rule_table(rule)).get(1) == (((rule >> n) & 1) != 0));
      }
  }
}
