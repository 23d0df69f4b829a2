#include <doctest.h>

#include <random>

#include "carc/bitmatrix.hpp"
#include "carc/bitvec.hpp"
#include "carc/error.hpp"

using namespace carc;

TEST_SUITE("bitvec") {
  TEST_CASE("string round trip and bit access") {
    const auto v = BitVector::from_string("0010110");
    CHECK(v.size() == 7);
    CHECK(v.to_string() == "0010110");
    CHECK(v.count() == 3);
    CHECK(v.ones() == std::vector<std::size_t>{2, 4, 5});
    CHECK_THROWS_AS(BitVector::from_string("01x"), Error);
  }

  TEST_CASE("logic ops reject unequal lengths") {
    BitVector a(10), b(11);
    CHECK_THROWS_AS(a ^= b, Error);
    CHECK_THROWS_AS(a &= b, Error);
    CHECK_THROWS_AS(a |= b, Error);
  }

  TEST_CASE("append across word boundaries matches a per-bit reference") {
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n1 = gen() % 150, n2 = gen() % 150;
      std::string s1, s2;
      for (std::size_t i = 0; i < n1; ++i) s1 += (gen() & 1) ? '1' : '0';
      for (std::size_t i = 0; i < n2; ++i) s2 += (gen() & 1) ? '1' : '0';
      auto a = BitVector::from_string(s1);
      a.append(BitVector::from_string(s2));
      REQUIRE(a.to_string() == s1 + s2);
    }
  }

  TEST_CASE("resize keeps the prefix and clears the tail") {
    auto v = BitVector::from_string(std::string(100, '1'));
    v.resize(70);
    CHECK(v.count() == 70);
    v.resize(130);
    CHECK(v.count() == 70);
    CHECK_FALSE(v.test(129));
  }

  TEST_CASE("deposit_bits places a packed run at any offset") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 300; ++trial) {
      const std::size_t total = 1 + gen() % 400;
      const std::size_t nbits = 1 + gen() % total;
      const std::size_t offset = gen() % (total - nbits + 1);
      BitVector src(nbits + 64);  // garbage past nbits must be ignored
      for (auto& w : src.words()) w = gen();
      BitVector dst(total);
      deposit_bits(dst.words(), offset, src.words(), nbits);
      for (std::size_t i = 0; i < total; ++i) {
        const bool expect = i >= offset && i < offset + nbits && src.test(i - offset);
        REQUIRE(dst.test(i) == expect);
      }
    }
  }

  TEST_CASE("bit matrix rows") {
    BitMatrix m(3, 70);
    m.set(1, 69);
    m.set(2, 0);
    CHECK(m.test(1, 69));
    CHECK(m.row_count(1) == 1);
    CHECK(m.row_vector(2).to_string().front() == '1');
    BitMatrix extra(2, 70);
    extra.set(0, 5);
    m.append_rows(extra);
    CHECK(m.rows() == 5);
    CHECK(m.test(3, 5));
    BitMatrix wrong(1, 71);
    CHECK_THROWS_AS(m.append_rows(wrong), Error);
  }
}
