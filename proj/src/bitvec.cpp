#include "carc/bitvec.hpp"

#include <algorithm>
#include <stdexcept>

#include "carc/error.hpp"

namespace carc {

BitVector BitVector::from_string(std::string_view bits) {
  BitVector v(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      v.set(i);
    } else if (bits[i] != '0') {
      throw Error(ErrorCode::invalid_parameter, "bit string may only contain '0' and '1'");
    }
  }
  return v;
}

BitVector BitVector::from_bools(std::span<const std::uint8_t> bits) {
  BitVector v(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] > 1) throw Error(ErrorCode::invalid_parameter, "binary vector entries must be 0 or 1");
    if (bits[i] != 0) v.set(i);
  }
  return v;
}

void BitVector::append(const BitVector& src) {
  const std::size_t offset = size_;
  resize(size_ + src.size_);
  const std::size_t shift = offset % kWordBits;
  std::size_t dst = offset / kWordBits;
  if (shift == 0) {
    std::copy(src.words_.begin(), src.words_.end(), words_.begin() + static_cast<std::ptrdiff_t>(dst));
    return;
  }
  for (std::size_t w = 0; w < src.words_.size(); ++w, ++dst) {
    words_[dst] |= src.words_[w] << shift;
    if (dst + 1 < words_.size()) words_[dst + 1] |= src.words_[w] >> (kWordBits - shift);
  }
}

void BitVector::resize(std::size_t n) {
  size_ = n;
  words_.resize(word_count(n), 0);
  trim();
}

BitVector& BitVector::operator^=(const BitVector& o) {
  if (o.size_ != size_) throw Error(ErrorCode::dimension_mismatch, "bit vector XOR of unequal lengths");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= o.words_[i];
  return *this;
}

BitVector& BitVector::operator&=(const BitVector& o) {
  if (o.size_ != size_) throw Error(ErrorCode::dimension_mismatch, "bit vector AND of unequal lengths");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
  return *this;
}

BitVector& BitVector::operator|=(const BitVector& o) {
  if (o.size_ != size_) throw Error(ErrorCode::dimension_mismatch, "bit vector OR of unequal lengths");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
  return *this;
}

std::vector<std::size_t> BitVector::ones() const {
  std::vector<std::size_t> out;
  out.reserve(count());
  for_each_set_bit(words(), [&](std::size_t i) { out.push_back(i); });
  return out;
}

std::string BitVector::to_string() const {
  std::string s(size_, '0');
  for (std::size_t i = 0; i < size_; ++i)
    if (test(i)) s[i] = '1';
  return s;
}

}  // namespace carc
