#pragma once

#include <variant>

#include "hmvc/dataset.hpp"
#include "hmvc/highorder.hpp"
#include "hmvc/types.hpp"

namespace hmvc {

/// Dense, sparse, or operator-backed symmetric graph matrix. The operator
/// backend keeps cosine-similarity graphs out of memory on large problems.
class GraphMatrix {
 public:
  explicit GraphMatrix(Mat m) : backend_(std::move(m)) {}
  explicit GraphMatrix(SpMat m) : backend_(std::move(m)) {}
  explicit GraphMatrix(CosineSimilarityOperator op) : backend_(std::move(op)) {}

  Index rows() const {
    return std::visit([](const auto& b) -> Index { return b.rows(); }, backend_);
  }

  Mat multiply(const Mat& x) const {
    if (x.rows() != rows()) throw DimensionMismatch("graph multiply: row mismatch");
    return std::visit(
        [&](const auto& b) -> Mat {
          if constexpr (std::is_same_v<std::decay_t<decltype(b)>, CosineSimilarityOperator>)
            return b.multiply(x);
          else
            return b * x;
        },
        backend_);
  }

  Mat dense() const {
    return std::visit(
        [&](const auto& b) -> Mat {
          if constexpr (std::is_same_v<std::decay_t<decltype(b)>, CosineSimilarityOperator>)
            return b.dense();
          else
            return Mat(b);
        },
        backend_);
  }

 private:
  std::variant<Mat, SpMat, CosineSimilarityOperator> backend_;
};

struct NormalizedGraph {
  GraphMatrix matrix;
  GraphNorm mode = GraphNorm::symmetric;
  bool self_loops = false;
};

/// L = I - A applied as an operator; `dense()` materializes it for tests and
/// small problems.
struct Laplacian {
  NormalizedGraph source;

  Index rows() const { return source.matrix.rows(); }
  Mat multiply(const Mat& x) const { return x - source.matrix.multiply(x); }
  Mat dense() const { return Mat::Identity(rows(), rows()) - source.matrix.dense(); }
};

/// Symmetric normalization of a sparse adjacency, with optional self-loop
/// addition before computing degrees: D^{-1/2} (A + I) D^{-1/2}.
inline NormalizedGraph normalize_adjacency(const SparseAdjacency& adj, bool add_self_loops = true) {
  const SpMat& a = adj.edges;
  if (a.rows() != a.cols()) throw DimensionMismatch("normalize_adjacency: adjacency must be square");
  const Index n = a.rows();
  SpMat with_loops = a;
  if (add_self_loops) {
    SpMat eye(n, n);
    eye.setIdentity();
    with_loops = a + eye;
  }
  Vec deg = Vec::Zero(n);
  for (int k = 0; k < with_loops.outerSize(); ++k)
    for (SpMat::InnerIterator it(with_loops, k); it; ++it) deg(it.row()) += it.value();
  for (Index i = 0; i < n; ++i)
    if (deg(i) <= 0.0)
      throw IsolatedNode("normalize_adjacency: node " + std::to_string(i) +
                         " has zero degree; add self loops or drop it");
  const Vec s = deg.array().rsqrt().matrix();
  SpMat normalized = s.asDiagonal() * with_loops * s.asDiagonal();
  normalized.makeCompressed();
  return NormalizedGraph{GraphMatrix(std::move(normalized)), GraphNorm::symmetric, add_self_loops};
}

/// Adapts a symmetric-normalized dense similarity graph to the filter input.
inline NormalizedGraph to_normalized_graph(const SimilarityGraph& g) {
  if (g.normalization != GraphNorm::symmetric)
    throw InvalidArgument("to_normalized_graph: requires symmetric normalization");
  return NormalizedGraph{GraphMatrix(g.matrix), GraphNorm::symmetric, false};
}

inline NormalizedGraph to_normalized_graph(CosineSimilarityOperator op) {
  return NormalizedGraph{GraphMatrix(std::move(op)), GraphNorm::symmetric, false};
}

inline Laplacian laplacian(NormalizedGraph a) {
  if (a.mode != GraphNorm::symmetric) throw InvalidArgument("laplacian: requires symmetric mode");
  return Laplacian{std::move(a)};
}

struct FilteredFeatures {
  Mat matrix;
  int filter_order = 0;
};

/// Low-pass filter H = (I - L/2)^k X computed by k repeated applications of
/// (I + A)/2; never materializes a matrix power.
inline FilteredFeatures filter_features(const Mat& x, const Laplacian& l, int k) {
  if (k < 0) throw InvalidArgument("filter_features: order must be >= 0");
  if (x.rows() != l.rows()) throw DimensionMismatch("filter_features: row mismatch");
  require_finite(x, "filter_features");
  FilteredFeatures out{x, k};
  for (int i = 0; i < k; ++i)
    out.matrix = 0.5 * (out.matrix + l.source.matrix.multiply(out.matrix));
  require_finite(out.matrix, "filter_features");
  return out;
}

/// Rayleigh quotient u^T L u / u^T u measuring signal roughness on the graph.
inline double smoothness(const Vec& signal, const Laplacian& l) {
  if (signal.size() != l.rows()) throw DimensionMismatch("smoothness: length mismatch");
  const double denom = signal.squaredNorm();
  if (denom == 0.0) throw ZeroSignal("smoothness: zero signal");
  return signal.dot(l.multiply(signal).col(0)) / denom;
}

}  // namespace hmvc
