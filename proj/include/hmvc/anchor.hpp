#pragma once

#include <Eigen/Cholesky>
#include <numeric>
#include <vector>

#include "hmvc/learner.hpp"

namespace hmvc {

struct AnchorSet {
  std::vector<Index> indices;  // in selection order, no duplicates
  double eta = 2.0;
};

/// Degree-importance anchor selection. Importance is the row sum of A + A^2
/// summed over views; nodes are picked greedily by the renormalized
/// importance-power distribution, which reduces to repeated argmax with ties
/// broken toward lower ids.
inline AnchorSet select_anchors(const std::vector<SparseAdjacency>& adjacencies, int m,
                                double eta = 2.0) {
  if (adjacencies.empty()) throw InvalidArgument("select_anchors: need at least one graph");
  if (eta <= 0.0) throw InvalidArgument("select_anchors: eta must be positive");
  const Index n = adjacencies.front().edges.rows();
  if (m < 1 || m >= n)
    throw MTooLarge("select_anchors: need 1 <= m < N, got m=" + std::to_string(m) +
                    ", N=" + std::to_string(n));
  Vec importance = Vec::Zero(n);
  for (const auto& adj : adjacencies) {
    if (adj.edges.rows() != n) throw RowCountMismatch("select_anchors: views disagree on N");
    const Vec deg1 = adj.edges * Vec::Ones(n);
    importance += deg1 + adj.edges * deg1;  // row sums of A + A^2
  }

  AnchorSet anchors;
  anchors.eta = eta;
  anchors.indices.reserve(static_cast<size_t>(m));
  std::vector<bool> taken(static_cast<size_t>(n), false);
  for (int pick = 0; pick < m; ++pick) {
    // Renormalized selection probabilities over the remaining nodes; the
    // power keeps ordering, so the argmax is the largest remaining importance.
    double denom = 0.0;
    for (Index i = 0; i < n; ++i)
      if (!taken[static_cast<size_t>(i)]) denom += std::pow(importance(i), eta);
    Index best = -1;
    double best_p = -1.0;
    for (Index i = 0; i < n; ++i) {
      if (taken[static_cast<size_t>(i)]) continue;
      const double p = denom > 0.0 ? std::pow(importance(i), eta) / denom
                                   : 0.0;  // all-zero importance: lowest ids win
      if (p > best_p) {
        best_p = p;
        best = i;
      }
    }
    taken[static_cast<size_t>(best)] = true;
    anchors.indices.push_back(best);
  }
  return anchors;
}

/// KNN graph over row-normalized concatenated views; used to derive anchor
/// importance when no adjacency is given.
inline SparseAdjacency anchor_degree_graph(const MultiViewDataset& ds, int knn = 10) {
  if (ds.views.empty()) throw EmptyView("anchor_degree_graph: no views");
  Index total_cols = 0;
  for (const auto& v : ds.views) total_cols += v.data.cols();
  Mat concat(ds.num_samples(), total_cols);
  Index at = 0;
  for (const auto& v : ds.views) {
    Mat block = v.data;
    for (Index i = 0; i < block.rows(); ++i) {
      const double norm = block.row(i).norm();
      if (norm > 0.0) block.row(i) /= norm;
    }
    concat.middleCols(at, block.cols()) = block;
    at += block.cols();
  }
  return knn_graph(concat, knn);
}

namespace anchor_detail {

template <typename Graph>
Mat left_multiply(const Graph& w1, const Mat& p) {
  if constexpr (std::is_same_v<Graph, CosineSimilarityOperator>)
    return w1.left_multiply(p);
  else
    return p * w1;
}

template <typename Graph>
Mat rows_slice(const Graph& w1, const std::vector<Index>& inds) {
  if constexpr (std::is_same_v<Graph, CosineSimilarityOperator>) {
    return w1.rows_slice(inds);
  } else {
    Mat slice(static_cast<Index>(inds.size()), w1.cols());
    for (size_t k = 0; k < inds.size(); ++k) {
      if (inds[k] < 0 || inds[k] >= w1.rows())
        throw NodeIdOutOfRange("anchor rows: index out of range");
      slice.row(static_cast<Index>(k)) = w1.row(inds[k]);
    }
    return slice;
  }
}

}  // namespace anchor_detail

/// Anchor rows of the n-th power: (W^n)[inds,:] = (W^{n-1})[inds,:] W, built
/// from m x N times N x N products only.
template <typename Graph>
Mat anchor_power_rows(const Graph& w1, const std::vector<Index>& inds, int n) {
  if (n < 1) throw InvalidArgument("anchor_power_rows: order must be >= 1");
  Mat rows = anchor_detail::rows_slice(w1, inds);
  for (int i = 1; i < n; ++i) rows = anchor_detail::left_multiply(w1, rows);
  return rows;
}

/// Anchor rows of the mixed graph sum_{i=1..n} W^i. The infinity order has no
/// sliced form (the projector needs the full eigenbasis) and is rejected.
template <typename Graph>
Mat anchor_mixed_rows(const Graph& w1, const std::vector<Index>& inds, int n) {
  if (n == kOrderInfinity)
    throw InvalidArgument("anchor path: infinity order is not available with anchors");
  if (n < 1) throw InvalidArgument("anchor_mixed_rows: order must be >= 1");
  Mat rows = anchor_detail::rows_slice(w1, inds);
  Mat acc = rows;
  for (int i = 2; i <= n; ++i) {
    rows = anchor_detail::left_multiply(w1, rows);
    acc += rows;
  }
  return acc;
}

struct AnchorConfig {
  int m = 100;
  double eta = 2.0;
  int degree_knn = 10;  // KNN order for feature-only anchor importance
};

/// Anchor-factorized learner state; view graphs are N x m.
struct AnchorState {
  std::vector<Mat> view_graphs;  // Z_v
  Mat consensus;                 // Z
  Vec view_weights;
  std::vector<double> objective_trace;
  std::vector<ObjectiveTerms> term_trace;
  AnchorSet anchors;
  int iterations = 0;
};

/// Anchor analogues of the prepared inputs: filtered features, their anchor
/// rows, and anchor rows of the mixed graphs (transposed to N x m).
struct PreparedAnchorViews {
  std::vector<Mat> features;        // H_v (N x d_v)
  std::vector<Mat> anchor_features; // H~_v (m x d_v)
  std::vector<Mat> anchor_mixed;    // F~_v (N x m)
  AnchorSet anchors;
  int resolved_order = 0;
};

inline PreparedAnchorViews prepare_anchor_views(const MultiViewDataset& ds, const HmvcConfig& cfg,
                                                const AnchorSet& anchors) {
  cfg.validate();
  if (ds.views.empty()) throw EmptyView("prepare_anchor_views: dataset has no views");
  PreparedAnchorViews out;
  out.anchors = anchors;
  out.resolved_order = cfg.resolve_order(ds.has_graphs());
  if (out.resolved_order == kOrderInfinity)
    throw InvalidArgument("anchor path: infinity order is not available with anchors");
  if (cfg.sim_normalization != GraphNorm::symmetric)
    throw InvalidArgument("anchor path: requires symmetric normalization");
  for (int v = 0; v < ds.num_views(); ++v) {
    const Mat& x = ds.views[static_cast<size_t>(v)].data;
    CosineSimilarityOperator w1(x);
    out.anchor_mixed.push_back(anchor_mixed_rows(w1, anchors.indices, out.resolved_order).transpose());
    const NormalizedGraph filter_graph =
        ds.has_graphs() ? normalize_adjacency(ds.adjacency_for_view(v), true)
                        : to_normalized_graph(std::move(w1));
    Mat h = filter_features(x, laplacian(filter_graph), cfg.filter_order).matrix;
    Mat h_anchor(static_cast<Index>(anchors.indices.size()), h.cols());
    for (size_t k = 0; k < anchors.indices.size(); ++k)
      h_anchor.row(static_cast<Index>(k)) = h.row(anchors.indices[k]);
    out.features.push_back(std::move(h));
    out.anchor_features.push_back(std::move(h_anchor));
  }
  return out;
}

namespace anchor_detail {

/// Right-side SPD solve X A = B, i.e. X = B A^{-1} with A symmetric.
inline Mat solve_right(const Mat& a, const Mat& b, const char* what) {
  Eigen::LDLT<Mat> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw SolveFailure(std::string(what) + ": factorization failed");
  Mat xt = ldlt.solve(b.transpose());
  if (!xt.allFinite()) throw SolveFailure(std::string(what) + ": non-finite solution");
  return xt.transpose();
}

inline Mat weighted_rest(const AnchorState& st, int skip) {
  Mat rest = Mat::Zero(st.consensus.rows(), st.consensus.cols());
  for (int i = 0; i < static_cast<int>(st.view_graphs.size()); ++i)
    if (i != skip) rest += st.view_weights(i) * st.view_graphs[static_cast<size_t>(i)];
  return rest;
}

}  // namespace anchor_detail

inline AnchorState init_anchor_consensus(const PreparedAnchorViews& prep, double alpha) {
  if (alpha < 0) throw InvalidArgument("init_anchor_consensus: alpha must be >= 0");
  const Index m = static_cast<Index>(prep.anchors.indices.size());
  AnchorState st;
  st.anchors = prep.anchors;
  st.consensus = Mat::Zero(prep.features.front().rows(), m);
  for (size_t v = 0; v < prep.features.size(); ++v) {
    const Mat& h = prep.features[v];
    const Mat& ha = prep.anchor_features[v];
    Mat lhs = ha * ha.transpose() + alpha * Mat::Identity(m, m);
    st.view_graphs.push_back(
        anchor_detail::solve_right(lhs, h * ha.transpose(), "init_anchor_consensus"));
    st.consensus += st.view_graphs.back();
  }
  st.consensus /= static_cast<double>(prep.features.size());
  st.view_weights = Vec::Constant(static_cast<Index>(prep.features.size()),
                                  1.0 / static_cast<double>(prep.features.size()));
  return st;
}

/// Exact minimizer of the anchor objective restricted to view v's graph:
/// Z_v (H~ H~^T + (alpha + beta*w_v) I_m) = H H~^T + alpha F~_v + beta (Z - rest).
inline void update_anchor_view_graph(AnchorState& st, int v, const PreparedAnchorViews& prep,
                                     const HmvcConfig& cfg) {
  const Mat& h = prep.features[static_cast<size_t>(v)];
  const Mat& ha = prep.anchor_features[static_cast<size_t>(v)];
  const Index m = st.consensus.cols();
  const double w = std::max(st.view_weights(v), learner_detail::kWeightFloor);
  Mat lhs = ha * ha.transpose() + (cfg.alpha + cfg.beta * w) * Mat::Identity(m, m);
  Mat rhs = h * ha.transpose() + cfg.alpha * prep.anchor_mixed[static_cast<size_t>(v)] +
            cfg.beta * (st.consensus - anchor_detail::weighted_rest(st, v));
  st.view_graphs[static_cast<size_t>(v)] =
      anchor_detail::solve_right(lhs, rhs, "update_anchor_view_graph");
}

inline void update_anchor_consensus(AnchorState& st, const HmvcConfig& cfg) {
  if (cfg.beta + cfg.mu <= 0.0)
    throw InvalidArgument("update_anchor_consensus: beta + mu must be positive");
  st.consensus = (cfg.beta / (cfg.beta + cfg.mu)) * anchor_detail::weighted_rest(st, -1);
}

inline ObjectiveTerms anchor_objective_terms(const AnchorState& st, const PreparedAnchorViews& prep,
                                             const HmvcConfig& cfg) {
  ObjectiveTerms terms{0.0, 0.0, 0.0, 0.0};
  for (int v = 0; v < static_cast<int>(prep.features.size()); ++v) {
    const Mat& z_v = st.view_graphs[static_cast<size_t>(v)];
    terms[0] += st.view_weights(v) *
                (prep.features[static_cast<size_t>(v)] - z_v * prep.anchor_features[static_cast<size_t>(v)]).squaredNorm();
    terms[1] += st.view_weights(v) * cfg.alpha *
                (z_v - prep.anchor_mixed[static_cast<size_t>(v)]).squaredNorm();
  }
  terms[2] = cfg.beta * (st.consensus - anchor_detail::weighted_rest(st, -1)).squaredNorm();
  terms[3] = cfg.mu * st.consensus.squaredNorm();
  return terms;
}

inline double anchor_objective(const AnchorState& st, const PreparedAnchorViews& prep,
                               const HmvcConfig& cfg) {
  const ObjectiveTerms t = anchor_objective_terms(st, prep, cfg);
  return t[0] + t[1] + t[2] + t[3];
}

inline SimplexQpResult update_anchor_view_weights(AnchorState& st, const PreparedAnchorViews& prep,
                                                  const HmvcConfig& cfg) {
  const int v = static_cast<int>(st.view_graphs.size());
  Mat p(v, v);
  Vec q(v);
  for (int i = 0; i < v; ++i) {
    const Mat& z_i = st.view_graphs[static_cast<size_t>(i)];
    for (int j = i; j < v; ++j) {
      p(i, j) = 2.0 * cfg.beta * z_i.cwiseProduct(st.view_graphs[static_cast<size_t>(j)]).sum();
      p(j, i) = p(i, j);
    }
    const double residual =
        (prep.features[static_cast<size_t>(i)] - z_i * prep.anchor_features[static_cast<size_t>(i)]).squaredNorm() +
        cfg.alpha * (z_i - prep.anchor_mixed[static_cast<size_t>(i)]).squaredNorm();
    q(i) = residual - 2.0 * cfg.beta * st.consensus.cwiseProduct(z_i).sum();
  }
  const Vec start = Vec::Constant(v, 1.0 / static_cast<double>(v));
  SimplexQpResult result = solve_simplex_qp(p, q, start, 1e-10);
  st.view_weights = result.x;
  return result;
}

inline AnchorState fit_anchor_prepared(const PreparedAnchorViews& prep, const HmvcConfig& cfg) {
  cfg.validate();
  AnchorState st = init_anchor_consensus(prep, cfg.alpha);
  st.term_trace.push_back(anchor_objective_terms(st, prep, cfg));
  st.objective_trace.push_back(anchor_objective(st, prep, cfg));
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    for (int v = 0; v < static_cast<int>(prep.features.size()); ++v)
      update_anchor_view_graph(st, v, prep, cfg);
    update_anchor_consensus(st, cfg);
    update_anchor_view_weights(st, prep, cfg);
    st.term_trace.push_back(anchor_objective_terms(st, prep, cfg));
    st.objective_trace.push_back(anchor_objective(st, prep, cfg));
    st.iterations = iter;
    const double prev = st.objective_trace[st.objective_trace.size() - 2];
    const double cur = st.objective_trace.back();
    if (std::abs(prev - cur) <= cfg.rel_tol * std::max(std::abs(prev), 1e-300)) break;
  }
  return st;
}

/// Full anchor pipeline: anchor selection (adjacency degrees when graphs are
/// present, KNN-derived degrees otherwise), preparation, alternating fit.
inline AnchorState fit_anchor(const MultiViewDataset& ds, const HmvcConfig& cfg,
                              const AnchorConfig& anchor_cfg) {
  AnchorSet anchors =
      ds.has_graphs()
          ? select_anchors(ds.adjacencies, anchor_cfg.m, anchor_cfg.eta)
          : select_anchors({anchor_degree_graph(ds, anchor_cfg.degree_knn)}, anchor_cfg.m,
                           anchor_cfg.eta);
  return fit_anchor_prepared(prepare_anchor_views(ds, cfg, anchors), cfg);
}

}  // namespace hmvc
