#pragma once

// Packed binary vector used for lattice states, reservoir features and
// concept features. Bits beyond size() in the last word are always zero.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace carc {

class BitVector {
 public:
  using word_type = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  BitVector() = default;
  explicit BitVector(std::size_t n) : size_{n}, words_(word_count(n), 0) {}

  static BitVector from_string(std::string_view bits);
  static BitVector from_bools(std::span<const std::uint8_t> bits);

  static constexpr std::size_t word_count(std::size_t n) noexcept {
    return (n + kWordBits - 1) / kWordBits;
  }

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  bool test(std::size_t i) const noexcept {
    return (words_[i / kWordBits] >> (i % kWordBits)) & 1U;
  }
  void set(std::size_t i, bool v = true) noexcept {
    const word_type m = word_type{1} << (i % kWordBits);
    if (v) {
      words_[i / kWordBits] |= m;
    } else {
      words_[i / kWordBits] &= ~m;
    }
  }
  void flip(std::size_t i) noexcept { words_[i / kWordBits] ^= word_type{1} << (i % kWordBits); }
  void reset() noexcept { std::fill(words_.begin(), words_.end(), 0); }

  std::size_t count() const noexcept {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  bool none() const noexcept {
    for (auto w : words_)
      if (w != 0) return false;
    return true;
  }

  // Appends the first n bits of src; the hot path of feature construction.
  void append(const BitVector& src);
  void resize(std::size_t n);

  std::span<word_type> words() noexcept { return words_; }
  std::span<const word_type> words() const noexcept { return words_; }

  BitVector& operator^=(const BitVector& o);
  BitVector& operator&=(const BitVector& o);
  BitVector& operator|=(const BitVector& o);
  friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }
  friend BitVector operator&(BitVector a, const BitVector& b) { return a &= b; }
  friend BitVector operator|(BitVector a, const BitVector& b) { return a |= b; }

  friend bool operator==(const BitVector&, const BitVector&) = default;

  // Indices of set bits in increasing order.
  std::vector<std::size_t> ones() const;

  // '0'/'1' characters, bit 0 first.
  std::string to_string() const;

  // Clears padding bits past size(); call after writing whole words.
  void trim() noexcept {
    if (size_ % kWordBits != 0 && !words_.empty())
      words_.back() &= (word_type{1} << (size_ % kWordBits)) - 1;
  }

 private:
  std::size_t size_ = 0;
  std::vector<word_type> words_;
};

// Calls fn(index) for each set bit of a packed word range.
template <typename Fn>
inline void for_each_set_bit(std::span<const std::uint64_t> words, Fn&& fn) {
  for (std::size_t w = 0; w < words.size(); ++w) {
    std::uint64_t x = words[w];
    while (x != 0) {
      const int b = std::countr_zero(x);
      fn(w * 64 + static_cast<std::size_t>(b));
      x &= x - 1;
    }
  }
}

}  // namespace carc
