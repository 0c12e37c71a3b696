#include <catch2/catch_amalgamated.hpp>

#include <numeric>

#include "hmvc/anchor.hpp"
#include "test_support.hpp"

using namespace hmvc;

namespace {

std::vector<Index> identity_anchors(Index n) {
  std::vector<Index> inds(static_cast<size_t>(n));
  std::iota(inds.begin(), inds.end(), Index{0});
  return inds;
}

}  // namespace

TEST_CASE("anchor selection prefers hubs and breaks ties toward lower ids", "[anchor]") {
  // Star: node 0 touches everyone, so its degree importance dominates.
  std::vector<EdgeRecord> star;
  for (int leaf = 1; leaf <= 4; ++leaf) star.push_back({0, leaf, 1.0});
  const auto adj = build_adjacency(star, 5);
  const AnchorSet anchors = select_anchors({adj}, 3);
  REQUIRE(anchors.indices.size() == 3);
  CHECK(anchors.indices[0] == 0);
  CHECK(anchors.indices[1] == 1);  // leaves tie; lower ids first
  CHECK(anchors.indices[2] == 2);
}

TEST_CASE("anchor selection drops the least important node at m = N - 1", "[anchor]") {
  // Path 0-1-2-3: the endpoints are least important; and of the tied
  // endpoints, the higher id (3) is dropped.
  std::vector<EdgeRecord> path{{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}};
  const auto adj = build_adjacency(path, 4);
  const AnchorSet anchors = select_anchors({adj}, 3);
  std::vector<Index> sorted = anchors.indices;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<Index>{0, 1, 2});
}

TEST_CASE("anchor selection matches a brute-force importance ranking", "[anchor]") {
  for (std::uint64_t seed : {3u, 4u}) {
    const auto a0 = knn_graph(support::random_matrix(20, 3, seed), 4);
    const auto a1 = knn_graph(support::random_matrix(20, 2, seed + 50), 3);
    const AnchorSet anchors = select_anchors({a0, a1}, 8);

    // Dense importance: row sums of A + A^2 summed over views.
    Vec importance = Vec::Zero(20);
    for (const auto* adj : {&a0, &a1}) {
      const Mat a = Mat(adj->edges);
      importance += (a + a * a).rowwise().sum();
    }
    std::vector<Index> order(20);
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index l, Index r) { return importance(l) > importance(r); });
    order.resize(8);
    CHECK(anchors.indices == order);
  }
}

TEST_CASE("anchor selection validates its arguments", "[anchor]") {
  const auto adj = knn_graph(support::random_matrix(10, 2, 1), 2);
  CHECK_THROWS_AS(select_anchors({adj}, 10), MTooLarge);
  CHECK_THROWS_AS(select_anchors({adj}, 0), MTooLarge);
  CHECK_THROWS_AS(select_anchors({}, 2), InvalidArgument);
  CHECK_THROWS_AS(select_anchors({adj}, 2, -1.0), InvalidArgument);
}

TEST_CASE("sliced power rows equal rows of the full power", "[anchor]") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Index n = 9 + static_cast<Index>(seed % 3);
    const auto w1 = support::random_cosine_graph(n, 3, 500 + seed);
    const std::vector<Index> inds{0, 2, n - 1};
    for (int order = 1; order <= 5; ++order) {
      const Mat sliced = anchor_power_rows(w1.matrix, inds, order);
      const Mat full = power_graph(w1, order).matrix;
      for (size_t k = 0; k < inds.size(); ++k)
        CHECK((sliced.row(static_cast<Index>(k)) - full.row(inds[k])).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("sliced mixed rows equal rows of the full mixed graph", "[anchor]") {
  const auto w1 = support::random_cosine_graph(10, 4, 600);
  const std::vector<Index> inds{1, 4, 7};
  for (int order : {1, 2, 3, 4}) {
    const Mat sliced = anchor_mixed_rows(w1.matrix, inds, order);
    const Mat full = mixed_graph(w1, order).matrix;
    for (size_t k = 0; k < inds.size(); ++k)
      CHECK((sliced.row(static_cast<Index>(k)) - full.row(inds[k])).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK_THROWS_AS(anchor_mixed_rows(w1.matrix, inds, kOrderInfinity), InvalidArgument);
  CHECK_THROWS_AS(anchor_mixed_rows(w1.matrix, inds, 0), InvalidArgument);
}

TEST_CASE("operator-backed slices match the dense route", "[anchor]") {
  const Mat x = support::random_matrix(14, 4, 700);
  const CosineSimilarityOperator op(x);
  const Mat dense = normalize_similarity(cosine_similarity_graph(x), GraphNorm::symmetric).matrix;
  const std::vector<Index> inds{0, 3, 9, 13};
  for (int order : {1, 2, 3}) {
    CHECK((anchor_power_rows(op, inds, order) - anchor_power_rows(dense, inds, order))
              .cwiseAbs().maxCoeff() < 1e-12);
    CHECK((anchor_mixed_rows(op, inds, order) - anchor_mixed_rows(dense, inds, order))
              .cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("with all nodes as anchors the factor is the transposed graph", "[anchor]") {
  const auto ds = gaussian_blobs(16, 2, {3, 4}, 3.5, 21);
  HmvcConfig cfg;
  cfg.similarity_order = 2;
  cfg.max_iters = 8;

  const LearnerState full = fit(ds, cfg);
  AnchorSet all;
  all.indices = identity_anchors(16);
  const AnchorState factored = fit_anchor_prepared(prepare_anchor_views(ds, cfg, all), cfg);

  REQUIRE(factored.consensus.rows() == 16);
  REQUIRE(factored.consensus.cols() == 16);
  CHECK(factored.iterations == full.iterations);
  CHECK((factored.consensus - full.consensus.transpose()).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((factored.view_weights - full.view_weights).cwiseAbs().maxCoeff() < 1e-6);
  REQUIRE(factored.objective_trace.size() == full.objective_trace.size());
  for (size_t i = 0; i < full.objective_trace.size(); ++i)
    CHECK(factored.objective_trace[i] ==
          Catch::Approx(full.objective_trace[i]).epsilon(1e-6));
}

TEST_CASE("anchor view-graph update is stationary for the anchor objective", "[anchor]") {
  const auto ds = gaussian_blobs(12, 2, {3, 3}, 3.0, 31);
  HmvcConfig cfg;
  cfg.alpha = 0.7;
  cfg.beta = 1.4;
  cfg.mu = 0.6;
  cfg.similarity_order = 2;
  const AnchorSet anchors = select_anchors({anchor_degree_graph(ds, 4)}, 5);
  const PreparedAnchorViews prep = prepare_anchor_views(ds, cfg, anchors);
  AnchorState st = init_anchor_consensus(prep, cfg.alpha);
  st.view_weights << 0.6, 0.4;

  for (int v = 0; v < 2; ++v) {
    update_anchor_view_graph(st, v, prep, cfg);
    auto restricted = [&](const Mat& z) {
      AnchorState probe = st;
      probe.view_graphs[static_cast<size_t>(v)] = z;
      return anchor_objective(probe, prep, cfg);
    };
    CHECK(support::fd_max_abs_gradient(restricted, st.view_graphs[static_cast<size_t>(v)]) < 1e-6);
  }

  update_anchor_consensus(st, cfg);
  auto restricted_consensus = [&](const Mat& z) {
    AnchorState probe = st;
    probe.consensus = z;
    return anchor_objective(probe, prep, cfg);
  };
  CHECK(support::fd_max_abs_gradient(restricted_consensus, st.consensus) < 1e-7);
}

TEST_CASE("anchor fit keeps a non-increasing objective and clusters blobs", "[anchor]") {
  const auto ds = gaussian_blobs(60, 3, {4, 4}, 4.0, 42);
  HmvcConfig cfg;
  AnchorConfig anchor_cfg;
  anchor_cfg.m = 20;
  anchor_cfg.degree_knn = 6;
  const AnchorState st = fit_anchor(ds, cfg, anchor_cfg);

  CHECK(st.iterations <= 25);
  REQUIRE(st.anchors.indices.size() == 20);
  for (size_t i = 1; i < st.objective_trace.size(); ++i)
    CHECK(st.objective_trace[i] <=
          st.objective_trace[i - 1] + 1e-9 * std::max(1.0, std::abs(st.objective_trace[i - 1])));

  const auto labels = svd_cluster(st.consensus, 3, cfg.seed);
  CHECK(clustering_accuracy(labels, ds.labels.value()) >= 0.9);

  const AnchorState again = fit_anchor(ds, cfg, anchor_cfg);
  CHECK(st.consensus == again.consensus);
}

TEST_CASE("anchor preparation rejects unsupported modes", "[anchor]") {
  const auto ds = gaussian_blobs(12, 2, {3}, 3.0, 3);
  AnchorSet anchors;
  anchors.indices = {0, 1, 2, 3};

  HmvcConfig inf_cfg;
  inf_cfg.similarity_order = kOrderInfinity;
  CHECK_THROWS_AS(prepare_anchor_views(ds, inf_cfg, anchors), InvalidArgument);

  HmvcConfig rw_cfg;
  rw_cfg.sim_normalization = GraphNorm::row_stochastic;
  CHECK_THROWS_AS(prepare_anchor_views(ds, rw_cfg, anchors), InvalidArgument);
}

TEST_CASE("feature-only anchor importance uses the concatenated knn graph", "[anchor]") {
  const auto ds = gaussian_blobs(30, 2, {3, 5}, 3.0, 7);
  const auto adj = anchor_degree_graph(ds, 5);
  CHECK(adj.edges.rows() == 30);
  validate_adjacency(adj);
  // Every node has at least K neighbors after union symmetrization.
  const Vec deg = adj.edges * Vec::Ones(30);
  CHECK(deg.minCoeff() >= 5.0);
}

TEST_CASE("anchor pipeline stays practical at large N", "[anchor]") {
  const auto ds = gaussian_blobs(7500, 3, {5}, 5.0, 13);
  HmvcConfig cfg;
  cfg.max_iters = 3;
  AnchorConfig anchor_cfg;
  anchor_cfg.m = 50;
  anchor_cfg.degree_knn = 10;

  const auto start = std::chrono::steady_clock::now();
  const AnchorState st = fit_anchor(ds, cfg, anchor_cfg);
  KmeansOptions quick;
  quick.restarts = 10;
  quick.max_iters = 100;
  const auto labels = svd_cluster(st.consensus, 3, cfg.seed, quick);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  REQUIRE(st.consensus.rows() == 7500);
  REQUIRE(st.consensus.cols() == 50);
  CHECK(clustering_accuracy(labels, ds.labels.value()) >= 0.9);
  CHECK(seconds < 60.0);
}
