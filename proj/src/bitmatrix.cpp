#include "carc/bitmatrix.hpp"

#include <algorithm>
#include <bit>

#include "carc/error.hpp"

namespace carc {

BitVector BitMatrix::row_vector(std::size_t r) const {
  BitVector v(cols_);
  auto src = row(r);
  std::copy(src.begin(), src.end(), v.words().begin());
  return v;
}

void BitMatrix::set_row(std::size_t r, const BitVector& v) {
  if (v.size() != cols_) throw Error(ErrorCode::dimension_mismatch, "row length differs from matrix width");
  auto src = v.words();
  std::copy(src.begin(), src.end(), row(r).begin());
}

void BitMatrix::append_rows(const BitMatrix& other) {
  if (rows_ == 0 && cols_ == 0) {
    *this = other;
    return;
  }
  if (other.cols_ != cols_) throw Error(ErrorCode::dimension_mismatch, "appending rows of a different width");
  words_.insert(words_.end(), other.words_.begin(), other.words_.end());
  rows_ += other.rows_;
}

std::size_t BitMatrix::row_count(std::size_t r) const noexcept {
  std::size_t c = 0;
  for (auto w : row(r)) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

void deposit_bits(std::span<std::uint64_t> dst, std::size_t offset, std::span<const std::uint64_t> src,
                  std::size_t nbits) noexcept {
  const std::size_t shift = offset % 64;
  std::size_t d = offset / 64;
  const std::size_t nwords = BitVector::word_count(nbits);
  for (std::size_t w = 0; w < nwords; ++w, ++d) {
    std::uint64_t x = src[w];
    if (w + 1 == nwords && nbits % 64 != 0) x &= (std::uint64_t{1} << (nbits % 64)) - 1;
    dst[d] |= x << shift;
    if (shift != 0 && d + 1 < dst.size()) dst[d + 1] |= x >> (64 - shift);
  }
}

}  // namespace carc
