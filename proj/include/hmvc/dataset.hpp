#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hmvc/matrix_io.hpp"
#include "hmvc/types.hpp"

namespace hmvc {

/// One view's sample-by-feature matrix. Zero rows are legal but recorded so
/// similarity construction can substitute the neutral value for them.
struct FeatureMatrix {
  Mat data;
  int view_id = 0;
  std::vector<Index> zero_rows;
};

/// Symmetric nonnegative sparse adjacency with an empty diagonal.
struct SparseAdjacency {
  SpMat edges;
  bool self_loops_added = false;
};

struct MultiViewDataset {
  std::vector<FeatureMatrix> views;
  /// Empty (no graph), one shared graph, or one graph per view.
  std::vector<SparseAdjacency> adjacencies;
  bool shared_adjacency = false;
  bool shared_features = false;
  std::optional<std::vector<int>> labels;
  /// 0 until labels are attached or the caller sets it explicitly.
  int n_clusters = 0;
  std::string name = "dataset";

  int num_views() const { return static_cast<int>(views.size()); }
  Index num_samples() const { return views.empty() ? 0 : views.front().data.rows(); }
  bool has_graphs() const { return !adjacencies.empty(); }

  const SparseAdjacency& adjacency_for_view(int v) const {
    if (adjacencies.empty()) throw InvalidArgument("dataset has no adjacency");
    return adjacencies.size() == 1 ? adjacencies.front() : adjacencies.at(static_cast<size_t>(v));
  }
};

namespace dataset_detail {

inline void validate_view(FeatureMatrix& view, const std::string& origin) {
  if (view.data.rows() == 0 || view.data.cols() == 0) throw EmptyView(origin + ": empty view");
  require_finite(view.data, origin.c_str());
  view.zero_rows.clear();
  for (Index i = 0; i < view.data.rows(); ++i)
    if (view.data.row(i).norm() == 0.0) view.zero_rows.push_back(i);
}

inline SparseAdjacency build_adjacency(const std::vector<EdgeRecord>& records, Index n,
                                       bool symmetrize, const std::string& origin) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(records.size() * 2);
  for (const auto& e : records) {
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n)
      throw NodeIdOutOfRange(origin + ": node id " + std::to_string(std::max(e.i, e.j)) +
                             " outside [0, " + std::to_string(n) + ")");
    if (!std::isfinite(e.w)) throw NonNumericEntry(origin + ": non-finite edge weight");
    if (e.w < 0.0) throw InvalidArgument(origin + ": negative edge weight");
    if (e.i == e.j) continue;  // stored diagonal stays empty; loops are added at normalization
    triplets.emplace_back(static_cast<int>(e.i), static_cast<int>(e.j), e.w);
    triplets.emplace_back(static_cast<int>(e.j), static_cast<int>(e.i), e.w);
  }
  // Duplicate (i,j) entries collapse to the max weight; with both directions
  // inserted this symmetrizes directed inputs by max(w_ij, w_ji).
  SpMat a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end(),
                    [](double l, double r) { return std::max(l, r); });
  if (!symmetrize) {
    // The max-merge above already made the matrix symmetric, so detect
    // asymmetric inputs from the raw records instead.
    std::map<std::pair<std::int64_t, std::int64_t>, double> w;
    for (const auto& e : records)
      if (e.i != e.j) {
        auto key = std::make_pair(e.i, e.j);
        auto it = w.find(key);
        w[key] = it == w.end() ? e.w : std::max(it->second, e.w);
      }
    for (const auto& [key, value] : w) {
      auto rev = w.find(std::make_pair(key.second, key.first));
      const double other = rev == w.end() ? 0.0 : rev->second;
      if (std::abs(value - other) > 1e-12)
        throw AsymmetricWeights(origin + ": asymmetric weight at (" + std::to_string(key.first) +
                                ", " + std::to_string(key.second) + ")");
    }
  }
  a.makeCompressed();
  return SparseAdjacency{std::move(a), false};
}

}  // namespace dataset_detail

/// Builds a symmetric adjacency from edge records. With `symmetrize` the
/// result uses max(w_ij, w_ji); without it asymmetric inputs are an error.
inline SparseAdjacency build_adjacency(const std::vector<EdgeRecord>& records, Index n,
                                       bool symmetrize = true,
                                       const std::string& origin = "edge list") {
  return dataset_detail::build_adjacency(records, n, symmetrize, origin);
}

inline void validate_adjacency(const SparseAdjacency& adj) {
  const SpMat& a = adj.edges;
  if (a.rows() != a.cols()) throw DimensionMismatch("adjacency must be square");
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it) {
      if (it.value() < 0.0) throw InvalidArgument("adjacency weights must be nonnegative");
      if (it.row() == it.col() && it.value() != 0.0)
        throw InvalidArgument("adjacency diagonal must be empty");
    }
  const SpMat diff = SpMat(a - SpMat(a.transpose()));
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SpMat::InnerIterator it(diff, k); it; ++it)
      if (std::abs(it.value()) > 1e-12) throw AsymmetricWeights("adjacency must be symmetric");
}

/// Attaches ground-truth labels and derives n_clusters. Labels must cover
/// {0..c-1} with every value occupied.
inline void attach_labels(MultiViewDataset& ds, std::vector<int> labels) {
  if (static_cast<Index>(labels.size()) != ds.num_samples())
    throw RowCountMismatch("labels: " + std::to_string(labels.size()) + " entries for " +
                           std::to_string(ds.num_samples()) + " samples");
  const int c = *std::max_element(labels.begin(), labels.end()) + 1;
  if (*std::min_element(labels.begin(), labels.end()) < 0)
    throw InvalidArgument("labels must be nonnegative");
  std::vector<bool> seen(static_cast<size_t>(c), false);
  for (int v : labels) seen[static_cast<size_t>(v)] = true;
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
    throw InvalidArgument("labels must occupy every value in {0..c-1}");
  ds.labels = std::move(labels);
  ds.n_clusters = c;
}

inline void attach_labels_file(MultiViewDataset& ds, const std::string& path) {
  attach_labels(ds, read_labels(path));
}

/// Loads feature-only multi-view data; every view must have the same row count.
inline MultiViewDataset load_feature_views(const std::vector<std::string>& paths,
                                           MatrixFormat format = MatrixFormat::csv,
                                           bool header = false) {
  if (paths.empty()) throw InvalidArgument("no view paths given");
  MultiViewDataset ds;
  for (size_t v = 0; v < paths.size(); ++v) {
    FeatureMatrix fm;
    fm.data = read_matrix(paths[v], format, header);
    fm.view_id = static_cast<int>(v);
    dataset_detail::validate_view(fm, paths[v]);
    if (v > 0 && fm.data.rows() != ds.num_samples())
      throw RowCountMismatch(paths[v] + ": " + std::to_string(fm.data.rows()) +
                             " rows, expected " + std::to_string(ds.num_samples()));
    ds.views.push_back(std::move(fm));
  }
  return ds;
}

/// Loads attributed-graph data. Accepts one feature matrix shared across G
/// graph views, one graph shared across F feature views, or F == G pairs.
inline MultiViewDataset load_attributed_graph(const std::vector<std::string>& feature_paths,
                                              const std::vector<std::string>& adjacency_paths,
                                              MatrixFormat format = MatrixFormat::csv,
                                              bool header = false, bool symmetrize = true) {
  if (feature_paths.empty()) throw InvalidArgument("no feature paths given");
  if (adjacency_paths.empty()) throw InvalidArgument("no adjacency paths given");
  const size_t f = feature_paths.size(), g = adjacency_paths.size();
  if (f != g && f != 1 && g != 1)
    throw InvalidArgument("feature/adjacency view counts must match or one side must be 1");

  MultiViewDataset ds = load_feature_views(feature_paths, format, header);
  const size_t n_views = std::max(f, g);
  if (f == 1 && n_views > 1) {
    ds.shared_features = true;
    for (size_t v = 1; v < n_views; ++v) {
      FeatureMatrix fm = ds.views.front();
      fm.view_id = static_cast<int>(v);
      ds.views.push_back(std::move(fm));
    }
  }
  const Index n = ds.num_samples();
  for (const auto& path : adjacency_paths) {
    auto records = read_edge_list(path);
    ds.adjacencies.push_back(dataset_detail::build_adjacency(records, n, symmetrize, path));
  }
  ds.shared_adjacency = (g == 1 && n_views > 1);
  return ds;
}

/// Two interleaved half-circles with Gaussian noise; the usual benchmark
/// layout (second moon at (1 - cos t, 0.5 - sin t)). Labels are moon ids.
inline MultiViewDataset two_moons(int n_points, double noise, std::uint64_t seed) {
  if (n_points < 4 || n_points % 2 != 0)
    throw InvalidArgument("two_moons: n_points must be even and >= 4");
  if (noise < 0.0) throw InvalidArgument("two_moons: noise must be nonnegative");
  const int half = n_points / 2;
  Mat pts(n_points, 2);
  std::vector<int> labels(static_cast<size_t>(n_points));
  for (int i = 0; i < half; ++i) {
    const double t = M_PI * static_cast<double>(i) / static_cast<double>(half - 1);
    pts(i, 0) = std::cos(t);
    pts(i, 1) = std::sin(t);
    labels[static_cast<size_t>(i)] = 0;
    pts(half + i, 0) = 1.0 - std::cos(t);
    pts(half + i, 1) = 0.5 - std::sin(t);
    labels[static_cast<size_t>(half + i)] = 1;
  }
  std::mt19937_64 rng(seed);
  for (Index i = 0; i < pts.rows(); ++i)
    for (Index j = 0; j < 2; ++j) pts(i, j) += noise * normal_unit(rng);

  MultiViewDataset ds;
  ds.name = "two-moons";
  FeatureMatrix fm;
  fm.data = std::move(pts);
  dataset_detail::validate_view(fm, "two_moons");
  ds.views.push_back(std::move(fm));
  attach_labels(ds, std::move(labels));
  return ds;
}

/// Balanced Gaussian blobs around orthogonal-axis centers separated by
/// `separation` standard deviations, drawn independently per view.
inline MultiViewDataset gaussian_blobs(int n_points, int n_clusters, const std::vector<int>& view_dims,
                                       double separation, std::uint64_t seed) {
  if (n_points < n_clusters || n_clusters < 1) throw InvalidArgument("gaussian_blobs: bad sizes");
  if (view_dims.empty()) throw InvalidArgument("gaussian_blobs: need at least one view");
  for (int d : view_dims)
    if (d < n_clusters) throw InvalidArgument("gaussian_blobs: view dim must be >= n_clusters");

  std::vector<int> labels(static_cast<size_t>(n_points));
  for (int i = 0; i < n_points; ++i) labels[static_cast<size_t>(i)] = i % n_clusters;

  MultiViewDataset ds;
  ds.name = "gaussian-blobs";
  // Centers a*e_c are pairwise sqrt(2)*a apart; a chosen so distance == separation.
  const double scale = separation / std::sqrt(2.0);
  for (size_t v = 0; v < view_dims.size(); ++v) {
    std::mt19937_64 rng(mix_seed(seed, v));
    const int d = view_dims[v];
    Mat x(n_points, d);
    for (int i = 0; i < n_points; ++i) {
      for (int j = 0; j < d; ++j) x(i, j) = normal_unit(rng);
      x(i, labels[static_cast<size_t>(i)]) += scale;
    }
    FeatureMatrix fm;
    fm.data = std::move(x);
    fm.view_id = static_cast<int>(v);
    dataset_detail::validate_view(fm, "gaussian_blobs");
    ds.views.push_back(std::move(fm));
  }
  attach_labels(ds, std::move(labels));
  return ds;
}

/// Binary symmetric K-nearest-neighbor graph under Euclidean distance.
/// Neighbor ties break toward the lower index; `degenerate_ties` reports
/// whether any tie at the K-th distance was broken that way.
inline SparseAdjacency knn_graph(const Mat& points, int k, bool* degenerate_ties = nullptr) {
  const Index n = points.rows();
  if (k < 1 || k >= n) throw InvalidArgument("knn_graph: need 1 <= K < N");
  if (degenerate_ties) *degenerate_ties = false;

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<size_t>(n) * static_cast<size_t>(k) * 2);
  std::vector<std::pair<double, Index>> dist(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j)
      dist[static_cast<size_t>(j)] = {(points.row(i) - points.row(j)).squaredNorm(), j};
    dist[static_cast<size_t>(i)] = {std::numeric_limits<double>::infinity(), i};
    // Stable order: by distance, then index, so ties resolve to lower ids.
    std::sort(dist.begin(), dist.end());
    if (degenerate_ties && !*degenerate_ties) {
      const double kth = dist[static_cast<size_t>(k - 1)].first;
      if (dist[static_cast<size_t>(k)].first == kth) *degenerate_ties = true;
    }
    for (int s = 0; s < k; ++s) {
      const Index j = dist[static_cast<size_t>(s)].second;
      triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), 1.0);
      triplets.emplace_back(static_cast<int>(j), static_cast<int>(i), 1.0);
    }
  }
  SpMat a(n, n);
  // Union symmetrization: an edge exists when either endpoint selected it.
  a.setFromTriplets(triplets.begin(), triplets.end(), [](double, double) { return 1.0; });
  a.makeCompressed();
  return SparseAdjacency{std::move(a), false};
}

}  // namespace hmvc
