#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "carc/bitvec.hpp"

namespace carc {

/// Row-major bit matrix; each row is padded to a whole number of words.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols)
      : rows_{rows}, cols_{cols}, stride_{BitVector::word_count(cols)}, words_(rows * stride_, 0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t stride() const noexcept { return stride_; }

  bool test(std::size_t r, std::size_t c) const noexcept {
    return (words_[r * stride_ + c / 64] >> (c % 64)) & 1U;
  }
  void set(std::size_t r, std::size_t c, bool v = true) noexcept {
    auto& w = words_[r * stride_ + c / 64];
    const std::uint64_t m = std::uint64_t{1} << (c % 64);
    w = v ? (w | m) : (w & ~m);
  }

  std::span<std::uint64_t> row(std::size_t r) noexcept { return {words_.data() + r * stride_, stride_}; }
  std::span<const std::uint64_t> row(std::size_t r) const noexcept { return {words_.data() + r * stride_, stride_}; }

  BitVector row_vector(std::size_t r) const;
  void set_row(std::size_t r, const BitVector& v);
  // Appends the rows of `other`, which must have the same column count.
  void append_rows(const BitMatrix& other);

  std::size_t row_count(std::size_t r) const noexcept;

  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::span<std::uint64_t> words() noexcept { return words_; }

  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t stride_ = 0;
  std::vector<std::uint64_t> words_;
};

// ORs the bits of src into dst starting at bit `offset`. Target bits must be clear.
void deposit_bits(std::span<std::uint64_t> dst, std::size_t offset, std::span<const std::uint64_t> src,
                  std::size_t nbits) noexcept;

}  // namespace carc
