#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "hmvc/anchor.hpp"
#include "hmvc/clustering.hpp"
#include "hmvc/dataset.hpp"
#include "hmvc/learner.hpp"
#include "hmvc/matrix_io.hpp"

namespace hmvc {

// ---------------------------------------------------------------------------
// Edge-quality diagnostics

struct EdgeQuality {
  std::int64_t wrong_edges = 0;   // endpoints in different classes
  std::int64_t total_edges = 0;   // undirected, counted once
  double accurate_fraction = 1.0; // intra-class share; 1 when no edges
};

namespace harness_detail {

inline EdgeQuality score_edges(const std::vector<std::pair<Index, Index>>& edges,
                               const std::vector<int>& labels) {
  EdgeQuality q;
  q.total_edges = static_cast<std::int64_t>(edges.size());
  for (const auto& [i, j] : edges)
    if (labels[static_cast<size_t>(i)] != labels[static_cast<size_t>(j)]) ++q.wrong_edges;
  q.accurate_fraction =
      q.total_edges == 0
          ? 1.0
          : static_cast<double>(q.total_edges - q.wrong_edges) / static_cast<double>(q.total_edges);
  return q;
}

inline void check_labels(Index n, const std::vector<int>& labels) {
  if (static_cast<Index>(labels.size()) != n)
    throw LengthMismatch("edge_quality: label count does not match graph size");
}

}  // namespace harness_detail

/// Edge quality of a dense similarity graph, retaining the top-k entries per
/// row (mirroring a KNN display of the graph). Ties break toward lower index.
inline EdgeQuality edge_quality_topk(const Mat& similarity, const std::vector<int>& labels,
                                     int top_k = 5) {
  if (similarity.rows() != similarity.cols()) throw DimensionMismatch("edge_quality: square input");
  const Index n = similarity.rows();
  harness_detail::check_labels(n, labels);
  if (top_k < 1 || top_k >= n) throw InvalidArgument("edge_quality: need 1 <= top_k < N");
  std::set<std::pair<Index, Index>> edge_set;
  std::vector<std::pair<double, Index>> row(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j)
      row[static_cast<size_t>(j)] = {i == j ? -std::numeric_limits<double>::infinity() : similarity(i, j), j};
    std::sort(row.begin(), row.end(), [](const auto& l, const auto& r) {
      return l.first > r.first || (l.first == r.first && l.second < r.second);
    });
    for (int s = 0; s < top_k; ++s) {
      const Index j = row[static_cast<size_t>(s)].second;
      edge_set.emplace(std::min(i, j), std::max(i, j));
    }
  }
  return harness_detail::score_edges({edge_set.begin(), edge_set.end()}, labels);
}

/// Edge quality with edges defined as symmetrized entries above a threshold.
inline EdgeQuality edge_quality_threshold(const Mat& similarity, const std::vector<int>& labels,
                                          double threshold) {
  if (similarity.rows() != similarity.cols()) throw DimensionMismatch("edge_quality: square input");
  const Index n = similarity.rows();
  harness_detail::check_labels(n, labels);
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (std::max(similarity(i, j), similarity(j, i)) > threshold) edges.emplace_back(i, j);
  return harness_detail::score_edges(edges, labels);
}

/// Edge quality of a sparse adjacency; edges are the stored nonzeros.
inline EdgeQuality edge_quality(const SparseAdjacency& adj, const std::vector<int>& labels) {
  const Index n = adj.edges.rows();
  harness_detail::check_labels(n, labels);
  std::vector<std::pair<Index, Index>> edges;
  for (int k = 0; k < adj.edges.outerSize(); ++k)
    for (SpMat::InnerIterator it(adj.edges, k); it; ++it)
      if (it.value() != 0.0 && it.row() < it.col()) edges.emplace_back(it.row(), it.col());
  return harness_detail::score_edges(edges, labels);
}

/// Two-moons diagnostic: KNN graph, symmetric normalization, then per-order
/// edge quality with top-k retention.
struct OrderQualityRow {
  int order = 1;  // kOrderInfinity for the projector
  EdgeQuality quality;
};

inline std::vector<OrderQualityRow> two_moons_order_quality(int n_points, double noise,
                                                            std::uint64_t seed, int knn,
                                                            const std::vector<int>& orders,
                                                            int top_k = 5) {
  const MultiViewDataset ds = two_moons(n_points, noise, seed);
  const SparseAdjacency adj = knn_graph(ds.views.front().data, knn);
  SimilarityGraph base;
  base.matrix = Mat(adj.edges);
  base.order = 1;
  const SimilarityGraph w1 = normalize_similarity(base, GraphNorm::symmetric);
  std::vector<OrderQualityRow> rows;
  for (int order : orders) {
    const Mat graph = order == kOrderInfinity ? infinity_graph(w1).matrix
                                              : power_graph(w1, order).matrix;
    rows.push_back({order, edge_quality_topk(graph, ds.labels.value(), top_k)});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Experiment runner

enum class FitMethod { hmvc, ahmvc };
enum class ClusterMethod { spectral, kmeans_rows };

struct RunConfig {
  std::string dataset_name = "dataset";
  FitMethod method = FitMethod::hmvc;
  HmvcConfig base;
  AnchorConfig anchor;
  ClusterMethod cluster_method = ClusterMethod::spectral;
  int n_clusters = 0;  // 0: take it from the labels
  std::uint64_t seed = 42;

  // Grid axes; each must be nonempty. Single-point grids express plain fits.
  std::vector<double> grid_alpha{1.0};
  std::vector<double> grid_beta{1.0};
  std::vector<double> grid_mu{1.0};
  std::vector<int> grid_k{2};
  std::vector<int> grid_n{kOrderAuto};

  std::string output_dir;  // empty: write no artifacts
  bool save_graphs = true;
  int jobs = 1;

  void validate() const {
    if (grid_alpha.empty() || grid_beta.empty() || grid_mu.empty() || grid_k.empty() ||
        grid_n.empty())
      throw InvalidArgument("run: every grid axis needs at least one value");
    if (jobs < 1) throw InvalidArgument("run: jobs must be >= 1");
  }
};

/// One report row; metrics are NaN when no ground truth is available or the
/// grid point failed.
struct GridPointResult {
  int index = 0;
  double alpha = 0.0, beta = 0.0, mu = 0.0;
  int k = 0, n = 0;          // n as resolved (kOrderInfinity for the projector)
  int m = 0;                 // anchor count; 0 for the full method
  std::uint64_t seed = 0;
  MetricSet metrics{std::nan(""), std::nan(""), std::nan(""), std::nan(""), std::nan("")};
  double seconds = 0.0;      // fit wall-clock only
  int iterations = 0;
  std::string status = "ok";
  std::vector<int> labels;
};

namespace harness_detail {

inline std::string order_to_string(int n) {
  return n == kOrderInfinity ? "inf" : std::to_string(n);
}

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

inline void write_trace_csv(const std::string& path, const LearnerState& st) {
  std::ofstream out(path);
  out << "iteration,objective,self_expression,high_order,fusion,ridge\n";
  out << std::setprecision(17);
  for (size_t i = 0; i < st.objective_trace.size(); ++i) {
    const auto& t = st.term_trace[i];
    out << i << ',' << st.objective_trace[i] << ',' << t[0] << ',' << t[1] << ',' << t[2] << ','
        << t[3] << '\n';
  }
}

inline void write_trace_csv(const std::string& path, const AnchorState& st) {
  std::ofstream out(path);
  out << "iteration,objective,self_expression,high_order,fusion,ridge\n";
  out << std::setprecision(17);
  for (size_t i = 0; i < st.objective_trace.size(); ++i) {
    const auto& t = st.term_trace[i];
    out << i << ',' << st.objective_trace[i] << ',' << t[0] << ',' << t[1] << ',' << t[2] << ','
        << t[3] << '\n';
  }
}

inline std::string sanitize_status(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

}  // namespace harness_detail

/// Runs every grid point (alpha x beta x mu x k x n), never aborting the
/// sweep on per-point failures. Deterministic for a fixed config: reports are
/// byte-identical across runs except for the seconds column.
inline std::vector<GridPointResult> run(const RunConfig& cfg, const MultiViewDataset& ds) {
  cfg.validate();
  const int c = cfg.n_clusters > 0 ? cfg.n_clusters : ds.n_clusters;
  const bool want_artifacts = !cfg.output_dir.empty();
  if (want_artifacts) std::filesystem::create_directories(cfg.output_dir);

  struct GridPoint {
    double alpha, beta, mu;
    int k, n;
  };
  std::vector<GridPoint> points;
  for (double alpha : cfg.grid_alpha)
    for (double beta : cfg.grid_beta)
      for (double mu : cfg.grid_mu)
        for (int k : cfg.grid_k)
          for (int n : cfg.grid_n) points.push_back({alpha, beta, mu, k, n});

  const bool single = points.size() == 1;
  std::vector<GridPointResult> results(points.size());
  std::atomic<size_t> next{0};

  auto artifact_path = [&](const std::string& stem, int index, const std::string& ext) {
    const std::string name = single ? stem + ext : stem + "_" + std::to_string(index) + ext;
    return (std::filesystem::path(cfg.output_dir) / name).string();
  };

  auto run_point = [&](size_t idx) {
    const GridPoint& gp = points[idx];
    GridPointResult& row = results[idx];
    row.index = static_cast<int>(idx);
    row.alpha = gp.alpha;
    row.beta = gp.beta;
    row.mu = gp.mu;
    row.k = gp.k;
    row.seed = cfg.seed;
    row.m = cfg.method == FitMethod::ahmvc ? cfg.anchor.m : 0;
    HmvcConfig point_cfg = cfg.base;
    point_cfg.alpha = gp.alpha;
    point_cfg.beta = gp.beta;
    point_cfg.mu = gp.mu;
    point_cfg.filter_order = gp.k;
    point_cfg.similarity_order = gp.n;
    point_cfg.seed = cfg.seed;
    row.n = point_cfg.resolve_order(ds.has_graphs());
    try {
      if (c < 1) throw InvalidArgument("run: n_clusters unset and no labels attached");
      if (cfg.method == FitMethod::hmvc) {
        const auto t0 = std::chrono::steady_clock::now();
        LearnerState st = fit(ds, point_cfg);
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        row.iterations = st.iterations;
        row.labels = cfg.cluster_method == ClusterMethod::spectral
                         ? spectral_cluster(st.consensus, c, cfg.seed)
                         : kmeans(st.consensus, c, cfg.seed).labels;
        if (want_artifacts) {
          harness_detail::write_trace_csv(artifact_path("trace", row.index, ".csv"), st);
          if (cfg.save_graphs)
            write_binary_matrix(artifact_path("S", row.index, ".hmat"), st.consensus);
        }
      } else {
        const auto t0 = std::chrono::steady_clock::now();
        AnchorState st = fit_anchor(ds, point_cfg, cfg.anchor);
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        row.iterations = st.iterations;
        row.labels = svd_cluster(st.consensus, c, cfg.seed);
        if (want_artifacts) {
          harness_detail::write_trace_csv(artifact_path("trace", row.index, ".csv"), st);
          if (cfg.save_graphs)
            write_binary_matrix(artifact_path("Z", row.index, ".hmat"), st.consensus);
          std::ofstream anchors(artifact_path("anchors", row.index, ".txt"));
          for (Index a : st.anchors.indices) anchors << a << '\n';
        }
      }
      if (ds.labels) row.metrics = evaluate_labels(row.labels, ds.labels.value());
      if (want_artifacts && !row.labels.empty())
        write_labels(artifact_path("pred_labels", row.index, ".txt"), row.labels);
    } catch (const Error& e) {
      row.status = "error: " + harness_detail::sanitize_status(e.what());
    }
  };

  if (cfg.jobs == 1 || points.size() == 1) {
    for (size_t i = 0; i < points.size(); ++i) run_point(i);
  } else {
    const int workers = static_cast<int>(std::min(static_cast<size_t>(cfg.jobs), points.size()));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < points.size(); i = next.fetch_add(1)) run_point(i);
      });
    for (auto& t : pool) t.join();
  }
  return results;
}

inline void write_report_csv(const std::string& path, const RunConfig& cfg,
                             const std::vector<GridPointResult>& rows) {
  std::ofstream out(path);
  out << "dataset,method,alpha,beta,mu,k,n,m,seed,acc,nmi,ari,f1,pur,seconds,iterations,status\n";
  for (const auto& r : rows) {
    out << cfg.dataset_name << ',' << (cfg.method == FitMethod::hmvc ? "hmvc" : "ahmvc") << ','
        << harness_detail::format_double(r.alpha) << ',' << harness_detail::format_double(r.beta)
        << ',' << harness_detail::format_double(r.mu) << ',' << r.k << ','
        << harness_detail::order_to_string(r.n) << ',' << r.m << ',' << r.seed << ','
        << harness_detail::format_double(r.metrics.acc) << ','
        << harness_detail::format_double(r.metrics.nmi) << ','
        << harness_detail::format_double(r.metrics.ari) << ','
        << harness_detail::format_double(r.metrics.f1) << ','
        << harness_detail::format_double(r.metrics.purity) << ','
        << harness_detail::format_double(r.seconds) << ',' << r.iterations << ',' << r.status
        << '\n';
  }
}

inline void write_report_json(const std::string& path, const RunConfig& cfg,
                              const std::vector<GridPointResult>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  auto number_or_null = [](double v) {
    return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
  };
  for (const auto& r : rows) {
    nlohmann::json row{
        {"dataset", cfg.dataset_name},
        {"method", cfg.method == FitMethod::hmvc ? "hmvc" : "ahmvc"},
        {"alpha", r.alpha},
        {"beta", r.beta},
        {"mu", r.mu},
        {"k", r.k},
        {"n", harness_detail::order_to_string(r.n)},
        {"m", r.m},
        {"seed", r.seed},
        {"acc", number_or_null(r.metrics.acc)},
        {"nmi", number_or_null(r.metrics.nmi)},
        {"ari", number_or_null(r.metrics.ari)},
        {"f1", number_or_null(r.metrics.f1)},
        {"pur", number_or_null(r.metrics.purity)},
        {"seconds", r.seconds},
        {"iterations", r.iterations},
        {"status", r.status},
    };
    arr.push_back(std::move(row));
  }
  std::ofstream out(path);
  out << arr.dump(2) << '\n';
}

/// Runs a config and writes report.csv / report.json (plus per-point
/// artifacts) under cfg.output_dir.
inline std::vector<GridPointResult> run_and_report(const RunConfig& cfg,
                                                   const MultiViewDataset& ds) {
  auto rows = run(cfg, ds);
  if (!cfg.output_dir.empty()) {
    write_report_csv((std::filesystem::path(cfg.output_dir) / "report.csv").string(), cfg, rows);
    write_report_json((std::filesystem::path(cfg.output_dir) / "report.json").string(), cfg, rows);
  }
  return rows;
}

/// Filter-order ablation: same config, k swept, everything else fixed.
inline std::vector<GridPointResult> ablation_filter_order(RunConfig cfg, const MultiViewDataset& ds,
                                                          const std::vector<int>& k_values) {
  if (k_values.empty()) throw InvalidArgument("ablation: empty k grid");
  cfg.grid_k = k_values;
  cfg.output_dir.clear();
  return run(cfg, ds);
}

/// Similarity-order ablation: n swept (kOrderInfinity allowed).
inline std::vector<GridPointResult> ablation_similarity_order(RunConfig cfg,
                                                              const MultiViewDataset& ds,
                                                              const std::vector<int>& n_values) {
  if (n_values.empty()) throw InvalidArgument("ablation: empty n grid");
  cfg.grid_n = n_values;
  cfg.output_dir.clear();
  return run(cfg, ds);
}

}  // namespace hmvc
