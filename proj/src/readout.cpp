#include "carc/readout.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <unordered_map>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/QR>
#include <json.hpp>

#include "carc/error.hpp"

namespace carc {

namespace {

// Column-major packed copy of a bit matrix: column c occupies words
// [c * stride, (c + 1) * stride).
struct ColumnBits {
  std::size_t stride = 0;
  std::vector<std::uint64_t> words;

  std::span<const std::uint64_t> column(std::size_t c) const { return {words.data() + c * stride, stride}; }
};

ColumnBits transpose(const BitMatrix& m, std::size_t extra_columns) {
  ColumnBits out;
  out.stride = BitVector::word_count(m.rows());
  out.words.assign((m.cols() + extra_columns) * out.stride, 0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const std::uint64_t bit = std::uint64_t{1} << (r % 64);
    const std::size_t word = r / 64;
    for_each_set_bit(m.row(r), [&](std::size_t c) { out.words[c * out.stride + word] |= bit; });
  }
  return out;
}

std::uint64_t popcount_and(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) noexcept {
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<std::uint64_t>(std::popcount(a[i] & b[i]));
  return acc;
}

std::uint64_t hash_words(std::span<const std::uint64_t> w) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto x : w) {
    h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

ReadoutModel::ReadoutModel(std::size_t outputs, std::size_t features, std::vector<double> weights, double ridge)
    : outputs_{outputs}, features_{features}, ridge_{ridge}, weights_{std::move(weights)} {
  if (weights_.size() != outputs_ * (features_ + 1))
    throw Error(ErrorCode::dimension_mismatch, "readout weights must be D_out x (F + 1)");
  for (double w : weights_)
    if (!std::isfinite(w)) throw Error(ErrorCode::numerical_failure, "non-finite readout weight");
}

std::vector<double> ReadoutModel::activation(std::span<const std::uint64_t> feature_words) const {
  std::vector<double> y(outputs_);
  for (std::size_t d = 0; d < outputs_; ++d) y[d] = bias(d);
  const std::size_t stride = features_ + 1;
  for_each_set_bit(feature_words, [&](std::size_t c) {
    for (std::size_t d = 0; d < outputs_; ++d) y[d] += weights_[d * stride + c];
  });
  return y;
}

std::vector<double> ReadoutModel::activation(const BitVector& feature) const {
  if (feature.size() != features_)
    throw Error(ErrorCode::dimension_mismatch, "feature has " + std::to_string(feature.size()) + " bits, model expects " +
                                                   std::to_string(features_));
  return activation(feature.words());
}

std::vector<double> ReadoutModel::activation_dense(const BitVector& feature) const {
  if (feature.size() != features_) throw Error(ErrorCode::dimension_mismatch, "feature length differs from model");
  std::vector<double> y(outputs_);
  for (std::size_t d = 0; d < outputs_; ++d) {
    double acc = 0.0;
    for (std::size_t c = 0; c < features_; ++c) acc += weight(d, c) * (feature.test(c) ? 1.0 : 0.0);
    y[d] = acc + bias(d) * 1.0;
  }
  return y;
}

void ReadoutModel::save(std::ostream& out) const {
  nlohmann::json header{{"format", "carc-readout-v1"},
                        {"D_out", outputs_},
                        {"F", features_},
                        {"ridge", ridge_},
                        {"threshold", kThreshold}};
  out << header.dump() << '\n';
  for (double w : weights_) {
    std::uint64_t bits;
    std::memcpy(&bits, &w, sizeof bits);
    unsigned char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
    out.write(reinterpret_cast<const char*>(bytes), 8);
  }
  if (!out) throw Error(ErrorCode::io_failure, "failed writing readout model");
}

ReadoutModel ReadoutModel::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::io_failure, "missing readout header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io_failure, std::string("malformed readout header: ") + e.what());
  }
  if (header.value("format", "") != "carc-readout-v1") throw Error(ErrorCode::io_failure, "unrecognized readout format");
  const auto outputs = header.at("D_out").get<std::size_t>();
  const auto features = header.at("F").get<std::size_t>();
  std::vector<double> w(outputs * (features + 1));
  for (auto& v : w) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw Error(ErrorCode::io_failure, "truncated readout weights");
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    std::memcpy(&v, &bits, sizeof v);
  }
  return ReadoutModel(outputs, features, std::move(w), header.at("ridge").get<double>());
}

ReadoutModel fit(const BitMatrix& features, const BitMatrix& targets, const FitOptions& options,
                 FitDiagnostics* diagnostics) {
  const std::size_t n = features.rows();
  const std::size_t f = features.cols();
  const std::size_t outputs = targets.cols();
  if (n < 1) throw Error(ErrorCode::invalid_parameter, "fit needs at least one row");
  if (targets.rows() != n) throw Error(ErrorCode::dimension_mismatch, "feature and target row counts differ");
  if (outputs < 1) throw Error(ErrorCode::dimension_mismatch, "targets need at least one column");
  if (!(options.ridge >= 0.0) || !std::isfinite(options.ridge))
    throw Error(ErrorCode::invalid_parameter, "ridge must be finite and >= 0");

  // Column f is the bias (all ones).
  ColumnBits cols = transpose(features, 1);
  for (std::size_t r = 0; r < n; ++r) cols.words[f * cols.stride + r / 64] |= std::uint64_t{1} << (r % 64);

  // Group identical columns; all-zero columns get no group and weight 0.
  constexpr std::size_t kNoGroup = static_cast<std::size_t>(-1);
  std::vector<std::size_t> group_of(f + 1, kNoGroup);
  std::vector<std::size_t> representative;
  std::vector<double> multiplicity;
  std::unordered_multimap<std::uint64_t, std::size_t> seen;
  for (std::size_t c = 0; c <= f; ++c) {
    const auto col = cols.column(c);
    bool zero = true;
    for (auto w : col) zero = zero && w == 0;
    if (zero) continue;
    const std::uint64_t h = hash_words(col);
    auto [lo, hi] = seen.equal_range(h);
    for (auto it = lo; it != hi; ++it) {
      const auto other = cols.column(representative[it->second]);
      if (std::equal(col.begin(), col.end(), other.begin())) {
        group_of[c] = it->second;
        break;
      }
    }
    if (group_of[c] == kNoGroup) {
      group_of[c] = representative.size();
      seen.emplace(h, representative.size());
      representative.push_back(c);
      multiplicity.push_back(0.0);
    }
    multiplicity[group_of[c]] += 1.0;
  }
  const std::size_t k = representative.size();

  // Primal normal equations over the k distinct columns, or, when k exceeds the
  // row count, the equivalent dual system (X M X^T + ridge I) a = Y over rows,
  // M = diag(multiplicity). Column c then gets weight x_c^T a.
  const bool dual = k > n;
  const std::size_t dim = dual ? n : k;
  if (dim * dim * sizeof(double) > options.max_system_bytes)
    throw Error(ErrorCode::too_large, "readout system of order " + std::to_string(dim) + " exceeds the " +
                                          std::to_string(options.max_system_bytes >> 20) + " MiB limit");
  Eigen::MatrixXd gram(dim, dim);
  Eigen::MatrixXd rhs(dim, outputs);
  if (dual) {
    for (std::size_t a = 0; a < n; ++a) {
      const auto ra = features.row(a);
      for (std::size_t b = 0; b <= a; ++b) {
        const auto v = static_cast<double>(popcount_and(ra, features.row(b)) + 1);
        gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
        gram(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
      }
      for (std::size_t d = 0; d < outputs; ++d)
        rhs(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(d)) = targets.test(a, d) ? 1.0 : 0.0;
      gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) += options.ridge;
    }
  } else {
    ColumnBits target_cols = transpose(targets, 0);
    for (std::size_t a = 0; a < k; ++a) {
      const auto ca = cols.column(representative[a]);
      for (std::size_t b = 0; b <= a; ++b) {
        const auto v = static_cast<double>(popcount_and(ca, cols.column(representative[b])));
        gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
        gram(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
      }
      for (std::size_t d = 0; d < outputs; ++d)
        rhs(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(d)) =
            static_cast<double>(popcount_and(ca, target_cols.column(d)));
    }
    for (std::size_t a = 0; a < k; ++a)
      gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) += options.ridge / multiplicity[a];
  }

  // Cholesky first; pivoted LDLT and then a complete orthogonal decomposition
  // (minimum-norm pseudo-inverse solution) when the system is too ill-conditioned.
  const double rhs_norm = std::max(rhs.norm(), 1.0);
  auto acceptable = [&](const Eigen::MatrixXd& s) {
    return all_finite(s) && (gram * s - rhs).norm() <= 1e-6 * rhs_norm;
  };
  Eigen::MatrixXd solution;
  SolverPath path = SolverPath::cholesky;
  // A few rounds of iterative refinement rescue most ill-conditioned but
  // positive definite systems before the expensive fallback.
  auto refine = [&](const auto& factor) {
    for (int round = 0; round < 4 && all_finite(solution) && !acceptable(solution); ++round)
      solution += factor.solve(rhs - gram * solution);
  };
  if (options.ridge > 0.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() == Eigen::Success) {
      solution = llt.solve(rhs);
      refine(llt);
    }
  }
  if (solution.size() == 0 || !acceptable(solution)) {
    path = SolverPath::ldlt;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    solution = ldlt.info() == Eigen::Success ? Eigen::MatrixXd(ldlt.solve(rhs)) : Eigen::MatrixXd();
    if (solution.size() != 0) refine(ldlt);
  }
  if (solution.size() == 0 || !acceptable(solution)) {
    path = SolverPath::orthogonal;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gram);
    solution = cod.solve(rhs);
  }
  if (!all_finite(solution)) throw Error(ErrorCode::numerical_failure, "readout solve produced non-finite weights");

  std::vector<double> weights(outputs * (f + 1), 0.0);
  if (dual) {
    for (std::size_t r = 0; r < n; ++r) {
      auto add_row = [&](std::size_t c) {
        for (std::size_t d = 0; d < outputs; ++d)
          weights[d * (f + 1) + c] += solution(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d));
      };
      for_each_set_bit(features.row(r), add_row);
      add_row(f);
    }
  } else {
    for (std::size_t c = 0; c <= f; ++c) {
      const std::size_t g = group_of[c];
      if (g == kNoGroup) continue;
      for (std::size_t d = 0; d < outputs; ++d)
        weights[d * (f + 1) + c] =
            solution(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(d)) / multiplicity[g];
    }
  }
  if (diagnostics != nullptr) {
    diagnostics->distinct_columns = k;
    diagnostics->solver = path;
    diagnostics->dual = dual;
  }
  return ReadoutModel(outputs, f, std::move(weights), options.ridge);
}

BitVector predict(const ReadoutModel& model, const BitVector& feature) {
  const auto y = model.activation(feature);
  BitVector out(model.outputs());
  for (std::size_t d = 0; d < y.size(); ++d)
    if (y[d] > ReadoutModel::kThreshold) out.set(d);
  return out;
}

BitMatrix predict(const ReadoutModel& model, const BitMatrix& features) {
  if (features.cols() != model.features()) throw Error(ErrorCode::dimension_mismatch, "feature width differs from model");
  const std::size_t outputs = model.outputs();
  const std::size_t f = model.features();
  // Transposed copy so one set bit touches one contiguous run of weights.
  std::vector<double> by_feature((f + 1) * outputs);
  for (std::size_t d = 0; d < outputs; ++d)
    for (std::size_t c = 0; c <= f; ++c) by_feature[c * outputs + d] = model.weights()[d * (f + 1) + c];

  BitMatrix out(features.rows(), outputs);
  std::vector<double> y(outputs);
  for (std::size_t r = 0; r < features.rows(); ++r) {
    std::copy_n(by_feature.begin() + static_cast<std::ptrdiff_t>(f * outputs), outputs, y.begin());
    for_each_set_bit(features.row(r), [&](std::size_t c) {
      const double* w = by_feature.data() + c * outputs;
      for (std::size_t d = 0; d < outputs; ++d) y[d] += w[d];
    });
    for (std::size_t d = 0; d < outputs; ++d)
      if (y[d] > ReadoutModel::kThreshold) out.set(r, d);
  }
  return out;
}

double training_objective(const ReadoutModel& model, const BitMatrix& features, const BitMatrix& targets,
                          bool include_penalty) {
  if (features.rows() != targets.rows() || targets.cols() != model.outputs())
    throw Error(ErrorCode::dimension_mismatch, "objective inputs do not match the model");
  double sse = 0.0;
  for (std::size_t r = 0; r < features.rows(); ++r) {
    const auto y = model.activation(features.row(r));
    for (std::size_t d = 0; d < y.size(); ++d) {
      const double e = y[d] - (targets.test(r, d) ? 1.0 : 0.0);
      sse += e * e;
    }
  }
  if (include_penalty) {
    double norm = 0.0;
    for (double w : model.weights()) norm += w * w;
    sse += model.ridge() * norm;
  }
  return sse;
}

}  // namespace carc
