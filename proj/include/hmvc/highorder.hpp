#pragma once

#include <Eigen/Eigenvalues>
#include <optional>
#include <vector>

#include "hmvc/types.hpp"

namespace hmvc {

/// Dense similarity graph at a given order. `normalization` is empty for the
/// raw first-order graph; `unit_rank` is the unit-eigenspace dimension when
/// the graph is the infinity-order projector.
struct SimilarityGraph {
  Mat matrix;
  int order = 1;
  std::optional<GraphNorm> normalization;
  std::vector<Index> zero_norm_rows;
  int unit_rank = 0;
};

/// Sum of similarity powers actually handed to the learner.
struct MixedHighOrderGraph {
  Mat matrix;
  std::vector<int> orders;
  int unit_rank = 0;  // set when the infinity order participates
};

inline constexpr double kUnitEigenvalueTol = 1e-8;

/// Pairwise cosine affinity mapped to [0, 1]: (cos + 1) / 2 off the diagonal,
/// zero on the diagonal. Rows with zero norm get the neutral value 1/2 and
/// are reported in `zero_norm_rows`.
inline SimilarityGraph cosine_similarity_graph(const Mat& x) {
  if (x.rows() == 0 || x.cols() == 0) throw EmptyView("cosine_similarity_graph: empty input");
  require_finite(x, "cosine_similarity_graph");
  const Index n = x.rows();
  SimilarityGraph g;
  Mat unit = x;
  for (Index i = 0; i < n; ++i) {
    const double norm = unit.row(i).norm();
    if (norm == 0.0)
      g.zero_norm_rows.push_back(i);
    else
      unit.row(i) /= norm;
  }
  // For zero-norm rows the unit row stays zero, so cos == 0 and the entry
  // lands exactly on the neutral 1/2.
  g.matrix.noalias() = unit * unit.transpose();
  g.matrix = ((g.matrix.array() + 1.0) * 0.5).matrix();
  g.matrix.diagonal().setZero();
  g.order = 1;
  return g;
}

/// Degree-normalizes a nonnegative similarity matrix. Symmetric mode returns
/// D^{-1/2} W D^{-1/2}; row-stochastic mode returns D^{-1} W.
inline SimilarityGraph normalize_similarity(const SimilarityGraph& raw, GraphNorm mode) {
  const Mat& w = raw.matrix;
  if (w.rows() != w.cols()) throw DimensionMismatch("normalize_similarity: matrix must be square");
  if ((w.array() < 0.0).any()) throw InvalidArgument("normalize_similarity: negative entry");
  Vec deg = w.rowwise().sum();
  for (Index i = 0; i < deg.size(); ++i)
    if (deg(i) <= 0.0)
      throw IsolatedNode("normalize_similarity: zero degree at row " + std::to_string(i));
  SimilarityGraph g;
  g.order = raw.order;
  g.zero_norm_rows = raw.zero_norm_rows;
  g.normalization = mode;
  if (mode == GraphNorm::symmetric) {
    const Vec s = deg.array().rsqrt().matrix();
    g.matrix = s.asDiagonal() * w * s.asDiagonal();
  } else {
    const Vec dinv = deg.array().inverse().matrix();
    g.matrix = dinv.asDiagonal() * w;
  }
  return g;
}

/// n-th matrix power by repeated multiplication, tracking the order label.
inline SimilarityGraph power_graph(const SimilarityGraph& w1, int n) {
  if (n < 1) throw InvalidArgument("power_graph: order must be >= 1");
  if (!w1.normalization) throw InvalidArgument("power_graph: normalize the graph first");
  SimilarityGraph g = w1;
  g.order = n;
  for (int i = 1; i < n; ++i) g.matrix = g.matrix * w1.matrix;
  return g;
}

/// Limit of even powers: the projector onto the eigenspace of eigenvalues
/// within `tol` of 1. Requires symmetric normalization.
inline SimilarityGraph infinity_graph(const SimilarityGraph& w1, double tol = kUnitEigenvalueTol) {
  if (w1.normalization != GraphNorm::symmetric)
    throw InvalidArgument("infinity_graph: requires symmetric normalization");
  Eigen::SelfAdjointEigenSolver<Mat> eig(w1.matrix);
  if (eig.info() != Eigen::Success) throw SolveFailure("infinity_graph: eigensolver failed");
  const Vec& lambda = eig.eigenvalues();  // ascending
  const Index n = lambda.size();
  Index first = n;
  while (first > 0 && lambda(first - 1) > 1.0 - tol) --first;
  const Index r = n - first;
  if (r == 0) throw NoUnitEigenvalue("infinity_graph: no eigenvalue within tol of 1");
  const Mat u = eig.eigenvectors().rightCols(r);
  SimilarityGraph g;
  g.matrix.noalias() = u * u.transpose();
  g.order = kOrderInfinity;
  g.normalization = w1.normalization;
  g.zero_norm_rows = w1.zero_norm_rows;
  g.unit_rank = static_cast<int>(r);
  return g;
}

/// Mixes orders 1..n (single-pass accumulation) or, for the infinity order,
/// the first-order graph plus the unit-eigenvalue projector.
inline MixedHighOrderGraph mixed_graph(const SimilarityGraph& w1, int order,
                                       double tol = kUnitEigenvalueTol) {
  if (!w1.normalization) throw InvalidArgument("mixed_graph: normalize the graph first");
  MixedHighOrderGraph out;
  if (order == kOrderInfinity) {
    const SimilarityGraph inf = infinity_graph(w1, tol);
    out.matrix = w1.matrix + inf.matrix;
    out.orders = {1, kOrderInfinity};
    out.unit_rank = inf.unit_rank;
    return out;
  }
  if (order < 1) throw InvalidArgument("mixed_graph: order must be >= 1 or infinity");
  out.matrix = w1.matrix;
  out.orders = {1};
  Mat power = w1.matrix;
  for (int i = 2; i <= order; ++i) {
    power = power * w1.matrix;
    out.matrix += power;
    out.orders.push_back(i);
  }
  return out;
}

/// Mean relative entry change between consecutive orders, then between the
/// infinity graph and order n_max. Entries with |reference| < 1e-12 are
/// skipped and counted.
struct OrderChangeRates {
  std::vector<int> orders;          // 2..n_max, then kOrderInfinity
  std::vector<double> rates;
  std::vector<std::int64_t> skipped;
};

inline OrderChangeRates order_change_rate(const SimilarityGraph& w1, int n_max,
                                          double tol = kUnitEigenvalueTol) {
  if (n_max < 2) throw InvalidArgument("order_change_rate: need n_max >= 2");
  if (w1.normalization != GraphNorm::symmetric)
    throw InvalidArgument("order_change_rate: requires symmetric normalization");
  constexpr double kFloor = 1e-12;
  OrderChangeRates out;
  auto push_rate = [&](const Mat& current, const Mat& previous, int order) {
    double sum = 0.0;
    std::int64_t skipped = 0, used = 0;
    for (Index j = 0; j < previous.cols(); ++j)
      for (Index i = 0; i < previous.rows(); ++i) {
        const double ref = std::abs(previous(i, j));
        if (ref < kFloor) {
          ++skipped;
          continue;
        }
        sum += std::abs(current(i, j) - previous(i, j)) / ref;
        ++used;
      }
    out.orders.push_back(order);
    out.rates.push_back(used == 0 ? 0.0 : sum / static_cast<double>(used));
    out.skipped.push_back(skipped);
  };
  Mat previous = w1.matrix;
  for (int n = 2; n <= n_max; ++n) {
    Mat current = previous * w1.matrix;
    push_rate(current, previous, n);
    previous = std::move(current);
  }
  push_rate(infinity_graph(w1, tol).matrix, previous, kOrderInfinity);
  return out;
}

/// Applies the symmetric-normalized cosine similarity graph of a feature
/// matrix as a linear operator without materializing the N x N matrix:
/// W u = S ((Xu (Xu^T (S u)) + 1 (1^T (S u))) / 2 - c o (S u)), with Xu the
/// row-normalized features, c the diagonal correction, S = D^{-1/2}.
class CosineSimilarityOperator {
 public:
  explicit CosineSimilarityOperator(const Mat& x) : unit_(x) {
    if (x.rows() == 0 || x.cols() == 0) throw EmptyView("cosine operator: empty input");
    require_finite(x, "cosine operator");
    const Index n = x.rows();
    for (Index i = 0; i < n; ++i) {
      const double norm = unit_.row(i).norm();
      if (norm == 0.0)
        zero_rows_.push_back(i);
      else
        unit_.row(i) /= norm;
    }
    // Diagonal of (Xu Xu^T + 1 1^T)/2 that the zero graph diagonal removes.
    diag_correction_ = ((unit_.rowwise().squaredNorm().array() + 1.0) * 0.5).matrix();
    degrees_ = raw_multiply(Mat::Ones(n, 1)).col(0);
    for (Index i = 0; i < n; ++i)
      if (degrees_(i) <= 0.0)
        throw IsolatedNode("cosine operator: zero degree at row " + std::to_string(i));
    inv_sqrt_degrees_ = degrees_.array().rsqrt().matrix();
  }

  Index rows() const { return unit_.rows(); }
  const Vec& degrees() const { return degrees_; }
  const std::vector<Index>& zero_norm_rows() const { return zero_rows_; }

  /// W^1 B for an N x k block.
  Mat multiply(const Mat& b) const {
    if (b.rows() != rows()) throw DimensionMismatch("cosine operator: row mismatch");
    return inv_sqrt_degrees_.asDiagonal() *
           raw_multiply(inv_sqrt_degrees_.asDiagonal() * b);
  }

  /// P W^1 for a k x N block; uses symmetry of W^1.
  Mat left_multiply(const Mat& p) const { return multiply(p.transpose()).transpose(); }

  /// Dense m x N slice W^1[rows, :].
  Mat rows_slice(const std::vector<Index>& rows_wanted) const {
    Mat selector = Mat::Zero(rows(), static_cast<Index>(rows_wanted.size()));
    for (size_t k = 0; k < rows_wanted.size(); ++k) {
      const Index i = rows_wanted[k];
      if (i < 0 || i >= rows()) throw NodeIdOutOfRange("cosine operator: row slice out of range");
      selector(i, static_cast<Index>(k)) = 1.0;
    }
    return multiply(selector).transpose();
  }

  /// Materializes W^1; intended for small problems and tests.
  Mat dense() const { return multiply(Mat::Identity(rows(), rows())); }

 private:
  Mat raw_multiply(const Mat& b) const {
    Mat out = 0.5 * (unit_ * (unit_.transpose() * b));
    out.noalias() += 0.5 * Mat::Ones(rows(), 1) * b.colwise().sum();
    out -= diag_correction_.asDiagonal() * b;
    return out;
  }

  Mat unit_;
  Vec diag_correction_;
  Vec degrees_;
  Vec inv_sqrt_degrees_;
  std::vector<Index> zero_rows_;
};

}  // namespace hmvc
