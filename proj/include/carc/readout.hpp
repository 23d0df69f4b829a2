#pragma once

// Linear least-squares readout over binary reservoir features.
//
// The fit works on the distinct non-zero feature columns only: k identical
// columns are merged into one with ridge penalty ridge/k, which yields exactly
// the ridge solution of the full problem with the weight split evenly across
// the copies. Gram entries are popcounts of column intersections. With more
// distinct columns than rows the same ridge problem is solved in its dual form
// over row intersections.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "carc/bitmatrix.hpp"
#include "carc/bitvec.hpp"

namespace carc {

struct FitOptions {
  double ridge = 1e-8;
  // Refuse to allocate a normal-equation system larger than this.
  std::size_t max_system_bytes = std::size_t{1} << 30;
};

enum class SolverPath { cholesky, ldlt, orthogonal };

struct FitDiagnostics {
  std::size_t distinct_columns = 0;  // including the bias column
  SolverPath solver = SolverPath::cholesky;
  bool dual = false;  // solved over rows because distinct columns outnumbered them
};

class ReadoutModel {
 public:
  static constexpr double kThreshold = 0.5;

  ReadoutModel() = default;
  // weights: D_out x (F + 1) row-major, last column is the bias.
  ReadoutModel(std::size_t outputs, std::size_t features, std::vector<double> weights, double ridge);

  std::size_t outputs() const noexcept { return outputs_; }
  std::size_t features() const noexcept { return features_; }
  double ridge() const noexcept { return ridge_; }
  double weight(std::size_t d, std::size_t c) const { return weights_[d * (features_ + 1) + c]; }
  double bias(std::size_t d) const { return weights_[d * (features_ + 1) + features_]; }
  std::span<const double> weights() const noexcept { return weights_; }

  // Pre-threshold outputs computed by summing weights over set bits.
  std::vector<double> activation(std::span<const std::uint64_t> feature_words) const;
  std::vector<double> activation(const BitVector& feature) const;
  // Same quantity through an explicit dense dot product; reference path.
  std::vector<double> activation_dense(const BitVector& feature) const;

  void save(std::ostream& out) const;
  static ReadoutModel load(std::istream& in);

  friend bool operator==(const ReadoutModel&, const ReadoutModel&) = default;

 private:
  std::size_t outputs_ = 0;
  std::size_t features_ = 0;
  double ridge_ = 0.0;
  std::vector<double> weights_;
};

ReadoutModel fit(const BitMatrix& features, const BitMatrix& targets, const FitOptions& options = {},
                 FitDiagnostics* diagnostics = nullptr);

/// y_d = 1 iff activation_d > 0.5.
BitVector predict(const ReadoutModel& model, const BitVector& feature);
/// Row-wise predict over a feature matrix.
BitMatrix predict(const ReadoutModel& model, const BitMatrix& features);

/// Sum of squared errors of [features|1] W^T against targets, plus ridge * |W|^2 when requested.
double training_objective(const ReadoutModel& model, const BitMatrix& features, const BitMatrix& targets,
                          bool include_penalty);

}  // namespace carc
