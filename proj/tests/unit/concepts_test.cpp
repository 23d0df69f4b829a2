#include <doctest.h>

#include <algorithm>
#include <iterator>
#include <random>
#include <sstream>

#include "carc/concepts.hpp"
#include "carc/error.hpp"

using namespace carc;

namespace {

ConceptConfig base_cfg() {
  ConceptConfig cfg;
  cfg.objects = 16;
  cfg.mappings = 3;
  cfg.iterations = 6;
  cfg.seed = 4;
  return cfg;
}

Support random_support(std::mt19937_64& gen, int objects) {
  Support s;
  for (int i = 0; i < objects; ++i)
    if (gen() & 1) s.insert(i);
  return s;
}

Support sym_diff(const Support& a, const Support& b) {
  Support out;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

}  // namespace

TEST_SUITE("concepts") {
  TEST_CASE("construction") {
    const auto cfg = base_cfg();
    CHECK(reservoir_of({}, cfg).feature().none());
    CHECK(reservoir_of({3}, cfg) == reservoir_of({3}, cfg));
    CHECK(reservoir_of({2, 9}, cfg).feature() == (reservoir_of({2}, cfg).feature() ^ reservoir_of({9}, cfg).feature()));
    CHECK(reservoir_of({1}, cfg).feature().size() == cfg.feature_dim());
    CHECK_THROWS_AS(reservoir_of({16}, cfg), Error);
    auto bad = cfg;
    bad.rule = 30;
    try {
      (void)reservoir_of({1}, bad);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::unsupported_rule);
    }
    bad.rule = 150;
    CHECK_NOTHROW((void)reservoir_of({1}, bad));
  }

  TEST_CASE("the first mapping is the identity") {
    auto cfg = base_cfg();
    cfg.mappings = 1;
    cfg.iterations = 1;
    // Object 5 alone: one rule-90 step lights cells 4 and 6.
    const auto c = reservoir_of({5}, cfg);
    CHECK(c.feature().ones() == std::vector<std::size_t>{4, 6});
  }

  TEST_CASE("operation examples") {
    const auto cfg = base_cfg();
    const auto a = reservoir_of({0, 3, 7}, cfg);
    const auto b = reservoir_of({3, 8}, cfg);
    const auto empty = reservoir_of({}, cfg);
    CHECK(or_c(a, empty) == a);
    CHECK(or_c(a, a) == a);
    CHECK(and_c(a, a) == a);
    CHECK(xor_c(a, a) == empty);
    CHECK(xor_c(a, empty) == a);
    const auto disjoint = reservoir_of({1, 2}, cfg);
    CHECK(and_c(a, disjoint) == empty);
    CHECK(or_c(a, disjoint).feature() == (a.feature() ^ disjoint.feature()));
    CHECK(or_c(a, b).support() == Support{0, 3, 7, 8});
    BitVector ones(cfg.feature_dim());
    for (std::size_t i = 0; i < ones.size(); ++i) ones.set(i);
    CHECK((mult(a, b) & ones) == mult(a, b));
    CHECK((a.feature() & ones) == a.feature());
    CHECK(not_c(a).support().size() == 13);
    CHECK(not_c(not_c(a)) == a);
  }

  TEST_CASE("configs must match") {
    const auto a = reservoir_of({1}, base_cfg());
    auto other = base_cfg();
    other.seed = 5;
    const auto b = reservoir_of({1}, other);
    CHECK_THROWS_AS(or_c(a, b), Error);
    CHECK_THROWS_AS(and_c(a, b), Error);
    CHECK_THROWS_AS(xor_c(a, b), Error);
    CHECK_THROWS_AS(mult(a, b), Error);
  }

  TEST_CASE("set laws hold for supports and features at once") {
    std::mt19937_64 gen(107);
    const auto cfg = base_cfg();
    for (int k = 0; k < 300; ++k) {
      const auto a = reservoir_of(random_support(gen, 16), cfg);
      const auto b = reservoir_of(random_support(gen, 16), cfg);
      const auto c = reservoir_of(random_support(gen, 16), cfg);
      REQUIRE(reservoir_of(sym_diff(a.support(), b.support()), cfg).feature() == (a.feature() ^ b.feature()));
      REQUIRE(or_c(a, b) == or_c(b, a));
      REQUIRE(and_c(a, b) == and_c(b, a));
      REQUIRE(or_c(or_c(a, b), c) == or_c(a, or_c(b, c)));
      REQUIRE(and_c(and_c(a, b), c) == and_c(a, and_c(b, c)));
      REQUIRE(or_c(a, and_c(a, b)) == a);
      REQUIRE(and_c(a, or_c(a, b)) == a);
      REQUIRE(or_c(or_c(a, b), b) == or_c(a, b));
      REQUIRE(or_c(a, b) == reservoir_of(or_c(a, b).support(), cfg));
      REQUIRE(and_c(a, b) == reservoir_of(and_c(a, b).support(), cfg));
      REQUIRE(not_c(and_c(a, b)) == or_c(not_c(a), not_c(b)));
    }
  }

  TEST_CASE("xor composition runs no evolution") {
    const auto cfg = base_cfg();
    const auto a = reservoir_of({1, 2}, cfg);
    const auto b = reservoir_of({2, 5}, cfg);
    CellUpdateCounter::reset();
    (void)xor_c(a, b);
    (void)mult(a, b);
    CHECK(CellUpdateCounter::value() == 0);
    (void)or_c(a, b);
    CHECK(CellUpdateCounter::value() == 3ULL * 16 * 6);
  }

  TEST_CASE("save and load") {
    const auto a = reservoir_of({0, 4, 15}, base_cfg());
    std::stringstream buf;
    a.save(buf);
    CHECK(Concept::load(buf) == a);

    auto j = nlohmann::json::parse(buf.str());
    j["config"]["seed"] = 99;
    std::stringstream tampered(j.dump());
    CHECK_THROWS_AS(Concept::load(tampered), Error);
    std::stringstream junk("not json");
    CHECK_THROWS_AS(Concept::load(junk), Error);
  }
}
