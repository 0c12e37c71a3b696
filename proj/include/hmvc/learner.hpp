#pragma once

#include <Eigen/Cholesky>
#include <array>
#include <vector>

#include "hmvc/dataset.hpp"
#include "hmvc/graph_filter.hpp"
#include "hmvc/highorder.hpp"
#include "hmvc/simplex_qp.hpp"
#include "hmvc/types.hpp"

namespace hmvc {

struct HmvcConfig {
  double alpha = 1.0;
  double beta = 1.0;
  double mu = 1.0;
  /// Filter order k (number of low-pass applications).
  int filter_order = 2;
  /// Similarity order n; kOrderInfinity, or kOrderAuto (3 with graphs, 2 without).
  int similarity_order = kOrderAuto;
  GraphNorm sim_normalization = GraphNorm::symmetric;
  int max_iters = 50;
  double rel_tol = 1e-6;
  /// Consumed by the downstream clustering step; the fit itself is deterministic.
  std::uint64_t seed = 42;

  void validate() const {
    if (alpha < 0 || beta < 0 || mu < 0) throw InvalidArgument("config: weights must be >= 0");
    if (filter_order < 0) throw InvalidArgument("config: filter order must be >= 0");
    if (similarity_order != kOrderAuto && similarity_order != kOrderInfinity && similarity_order < 1)
      throw InvalidArgument("config: similarity order must be >= 1, infinity, or auto");
    if (max_iters < 1) throw InvalidArgument("config: max_iters must be >= 1");
    if (rel_tol <= 0) throw InvalidArgument("config: rel_tol must be > 0");
  }

  int resolve_order(bool has_graphs) const {
    return similarity_order == kOrderAuto ? (has_graphs ? 3 : 2) : similarity_order;
  }
};

/// Objective value split into its four summands:
/// [self-expression, high-order anchoring, consensus fusion, ridge].
using ObjectiveTerms = std::array<double, 4>;

struct LearnerState {
  std::vector<Mat> view_graphs;   // one self-expression graph per view
  Mat consensus;
  Vec view_weights;               // simplex-constrained
  std::vector<double> objective_trace;
  std::vector<ObjectiveTerms> term_trace;
  int iterations = 0;
};

/// Filtered features and mixed high-order graphs that the updates consume.
struct PreparedViews {
  std::vector<Mat> features;      // H_v, one per view
  std::vector<Mat> mixed_graphs;  // f_v, one per view
  std::vector<int> mixed_unit_rank;
  int resolved_order = 0;
};

namespace learner_detail {

inline constexpr double kWeightFloor = 1e-8;

inline void check_views(const std::vector<Mat>& h) {
  if (h.empty()) throw EmptyView("learner: no views");
  for (const auto& m : h) {
    if (m.rows() != h.front().rows()) throw RowCountMismatch("learner: views disagree on N");
    require_finite(m, "learner");
  }
}

inline Mat solve_spd(const Mat& lhs, const Mat& rhs, const char* what) {
  Eigen::LDLT<Mat> ldlt(lhs);
  if (ldlt.info() != Eigen::Success) throw SolveFailure(std::string(what) + ": factorization failed");
  Mat x = ldlt.solve(rhs);
  if (!x.allFinite()) throw SolveFailure(std::string(what) + ": non-finite solution");
  return x;
}

/// Sum over other views of weight_i * graph_i.
inline Mat weighted_rest(const LearnerState& st, int skip) {
  Mat rest = Mat::Zero(st.consensus.rows(), st.consensus.cols());
  for (int i = 0; i < static_cast<int>(st.view_graphs.size()); ++i)
    if (i != skip) rest += st.view_weights(i) * st.view_graphs[static_cast<size_t>(i)];
  return rest;
}

}  // namespace learner_detail

/// Per-view ridge self-expression init: S_v = (H H^T + alpha I)^{-1} H H^T,
/// consensus = view mean, uniform weights.
inline LearnerState init_consensus(const std::vector<Mat>& h, double alpha) {
  learner_detail::check_views(h);
  if (alpha < 0) throw InvalidArgument("init_consensus: alpha must be >= 0");
  const Index n = h.front().rows();
  const int v = static_cast<int>(h.size());
  LearnerState st;
  st.consensus = Mat::Zero(n, n);
  for (const auto& features : h) {
    Mat gram = features * features.transpose();
    Mat lhs = gram + alpha * Mat::Identity(n, n);
    st.view_graphs.push_back(learner_detail::solve_spd(lhs, gram, "init_consensus"));
    st.consensus += st.view_graphs.back();
  }
  st.consensus /= static_cast<double>(v);
  st.view_weights = Vec::Constant(v, 1.0 / static_cast<double>(v));
  return st;
}

/// Exact minimizer of the objective restricted to view v's graph:
/// (H H^T + (alpha + beta*w_v) I) S_v = H H^T + alpha f_v + beta (S - rest).
/// The view weight is floored at 1e-8 inside the solve; the closed form is
/// invariant to the weight's actual positive value.
inline void update_view_graph_with_gram(LearnerState& st, int v, const Mat& gram, const Mat& f_v,
                                        const HmvcConfig& cfg) {
  const Index n = st.consensus.rows();
  if (gram.rows() != n || f_v.rows() != n || f_v.cols() != n)
    throw DimensionMismatch("update_view_graph: shape mismatch");
  const double w = std::max(st.view_weights(v), learner_detail::kWeightFloor);
  Mat lhs = gram + (cfg.alpha + cfg.beta * w) * Mat::Identity(n, n);
  Mat rhs = gram + cfg.alpha * f_v + cfg.beta * (st.consensus - learner_detail::weighted_rest(st, v));
  st.view_graphs[static_cast<size_t>(v)] = learner_detail::solve_spd(lhs, rhs, "update_view_graph");
}

inline void update_view_graph(LearnerState& st, int v, const Mat& h_v, const Mat& f_v,
                              const HmvcConfig& cfg) {
  update_view_graph_with_gram(st, v, h_v * h_v.transpose(), f_v, cfg);
}

/// Closed-form consensus update S = beta * sum_v w_v S_v / (beta + mu).
inline void update_consensus(LearnerState& st, const HmvcConfig& cfg) {
  if (cfg.beta + cfg.mu <= 0.0)
    throw InvalidArgument("update_consensus: beta + mu must be positive");
  st.consensus = (cfg.beta / (cfg.beta + cfg.mu)) * learner_detail::weighted_rest(st, -1);
}

/// Per-view residual M_v = ||H^T - H^T S_v||_F^2 + alpha ||S_v - f_v||_F^2.
inline double view_residual(const LearnerState& st, int v, const Mat& h_v, const Mat& f_v,
                            const HmvcConfig& cfg) {
  const Mat& s_v = st.view_graphs[static_cast<size_t>(v)];
  const Mat ht = h_v.transpose();
  return (ht - ht * s_v).squaredNorm() + cfg.alpha * (s_v - f_v).squaredNorm();
}

/// View-weight update: exact simplex QP with
/// P_ij = 2 beta Tr(S_i^T S_j), q_v = M_v - 2 beta Tr(S^T S_v).
inline SimplexQpResult update_view_weights(LearnerState& st, const std::vector<Mat>& h,
                                           const std::vector<Mat>& f, const HmvcConfig& cfg) {
  const int v = static_cast<int>(st.view_graphs.size());
  Mat p(v, v);
  Vec q(v);
  for (int i = 0; i < v; ++i) {
    for (int j = i; j < v; ++j) {
      p(i, j) = 2.0 * cfg.beta *
                (st.view_graphs[static_cast<size_t>(i)].cwiseProduct(st.view_graphs[static_cast<size_t>(j)])).sum();
      p(j, i) = p(i, j);
    }
    q(i) = view_residual(st, i, h[static_cast<size_t>(i)], f[static_cast<size_t>(i)], cfg) -
           2.0 * cfg.beta * (st.consensus.cwiseProduct(st.view_graphs[static_cast<size_t>(i)])).sum();
  }
  // Uniform start gives the symmetric tie-break for indistinguishable views.
  const Vec start = Vec::Constant(v, 1.0 / static_cast<double>(v));
  SimplexQpResult result = solve_simplex_qp(p, q, start, 1e-10);
  st.view_weights = result.x;
  return result;
}

inline ObjectiveTerms objective_terms(const LearnerState& st, const std::vector<Mat>& h,
                                      const std::vector<Mat>& f, const HmvcConfig& cfg) {
  ObjectiveTerms terms{0.0, 0.0, 0.0, 0.0};
  for (int v = 0; v < static_cast<int>(h.size()); ++v) {
    const Mat& s_v = st.view_graphs[static_cast<size_t>(v)];
    const Mat ht = h[static_cast<size_t>(v)].transpose();
    terms[0] += st.view_weights(v) * (ht - ht * s_v).squaredNorm();
    terms[1] += st.view_weights(v) * cfg.alpha * (s_v - f[static_cast<size_t>(v)]).squaredNorm();
  }
  terms[2] = cfg.beta * (st.consensus - learner_detail::weighted_rest(st, -1)).squaredNorm();
  terms[3] = cfg.mu * st.consensus.squaredNorm();
  return terms;
}

inline double objective(const LearnerState& st, const std::vector<Mat>& h,
                        const std::vector<Mat>& f, const HmvcConfig& cfg) {
  const ObjectiveTerms t = objective_terms(st, h, f, cfg);
  return t[0] + t[1] + t[2] + t[3];
}

/// Builds per-view filtered features and mixed high-order graphs. The mixed
/// graph always comes from the raw features' cosine similarity; the filter
/// graph is the view's adjacency when present, else the symmetric-normalized
/// cosine graph itself.
inline PreparedViews prepare_views(const MultiViewDataset& ds, const HmvcConfig& cfg) {
  cfg.validate();
  if (ds.views.empty()) throw EmptyView("prepare_views: dataset has no views");
  PreparedViews out;
  out.resolved_order = cfg.resolve_order(ds.has_graphs());
  for (int v = 0; v < ds.num_views(); ++v) {
    const Mat& x = ds.views[static_cast<size_t>(v)].data;
    const SimilarityGraph raw = cosine_similarity_graph(x);
    const SimilarityGraph sym = normalize_similarity(raw, GraphNorm::symmetric);

    const MixedHighOrderGraph mixed =
        mixed_graph(cfg.sim_normalization == GraphNorm::symmetric
                        ? sym
                        : normalize_similarity(raw, cfg.sim_normalization),
                    out.resolved_order);
    out.mixed_graphs.push_back(mixed.matrix);
    out.mixed_unit_rank.push_back(mixed.unit_rank);

    const NormalizedGraph filter_graph =
        ds.has_graphs() ? normalize_adjacency(ds.adjacency_for_view(v), true)
                        : to_normalized_graph(sym);
    out.features.push_back(filter_features(x, laplacian(filter_graph), cfg.filter_order).matrix);
  }
  return out;
}

/// Alternating minimization: per-view graphs (Gauss-Seidel, ascending view
/// order), consensus, then view weights; stops when the relative objective
/// change drops below rel_tol or max_iters is reached.
inline LearnerState fit_prepared(const PreparedViews& prep, const HmvcConfig& cfg) {
  cfg.validate();
  const auto& h = prep.features;
  const auto& f = prep.mixed_graphs;
  LearnerState st = init_consensus(h, cfg.alpha);

  std::vector<Mat> grams;
  grams.reserve(h.size());
  for (const auto& features : h) grams.push_back(features * features.transpose());

  st.term_trace.push_back(objective_terms(st, h, f, cfg));
  st.objective_trace.push_back(objective(st, h, f, cfg));
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    for (int v = 0; v < static_cast<int>(h.size()); ++v)
      update_view_graph_with_gram(st, v, grams[static_cast<size_t>(v)], f[static_cast<size_t>(v)], cfg);
    update_consensus(st, cfg);
    update_view_weights(st, h, f, cfg);

    st.term_trace.push_back(objective_terms(st, h, f, cfg));
    st.objective_trace.push_back(objective(st, h, f, cfg));
    st.iterations = iter;
    const double prev = st.objective_trace[st.objective_trace.size() - 2];
    const double cur = st.objective_trace.back();
    if (std::abs(prev - cur) <= cfg.rel_tol * std::max(std::abs(prev), 1e-300)) break;
  }
  return st;
}

inline LearnerState fit(const MultiViewDataset& ds, const HmvcConfig& cfg) {
  return fit_prepared(prepare_views(ds, cfg), cfg);
}

}  // namespace hmvc
