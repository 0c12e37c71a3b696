#include <catch2/catch_amalgamated.hpp>

#include "hmvc/graph_filter.hpp"
#include "test_support.hpp"

using namespace hmvc;

namespace {

SparseAdjacency path_graph(int n) {
  std::vector<EdgeRecord> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
  return build_adjacency(edges, n);
}

SparseAdjacency cycle_graph(int n) {
  std::vector<EdgeRecord> edges;
  for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 1.0});
  return build_adjacency(edges, n);
}

}  // namespace

TEST_CASE("adjacency normalization matches the hand-computed two-node case", "[graph_filter]") {
  const auto adj = path_graph(2);
  const Mat with_loops = normalize_adjacency(adj, true).matrix.dense();
  CHECK(with_loops(0, 0) == Catch::Approx(0.5).margin(1e-15));
  CHECK(with_loops(0, 1) == Catch::Approx(0.5).margin(1e-15));
  CHECK(with_loops(1, 1) == Catch::Approx(0.5).margin(1e-15));

  const Mat bare = normalize_adjacency(adj, false).matrix.dense();
  CHECK(bare(0, 0) == 0.0);
  CHECK(bare(0, 1) == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("adjacency normalization matches a dense brute-force oracle", "[graph_filter]") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Mat pts = support::random_matrix(12, 3, seed);
    const auto adj = knn_graph(pts, 3);
    const Mat got = normalize_adjacency(adj, true).matrix.dense();

    Mat a = Mat(adj.edges) + Mat::Identity(12, 12);
    const Vec deg = a.rowwise().sum();
    Mat expect(12, 12);
    for (Index i = 0; i < 12; ++i)
      for (Index j = 0; j < 12; ++j) expect(i, j) = a(i, j) / std::sqrt(deg(i) * deg(j));
    CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("zero-degree nodes are rejected unless self loops rescue them", "[graph_filter]") {
  // Node 2 is isolated in a 3-node graph with one edge.
  const auto adj = build_adjacency({{0, 1, 1.0}}, 3);
  CHECK_THROWS_AS(normalize_adjacency(adj, false), IsolatedNode);
  CHECK_NOTHROW(normalize_adjacency(adj, true));
}

TEST_CASE("laplacian spectrum lies in [0, 2] with a zero mode at sqrt-degrees", "[graph_filter]") {
  const Mat pts = support::random_matrix(15, 4, 77);
  const auto graph = normalize_adjacency(knn_graph(pts, 4), true);
  const Laplacian l = laplacian(graph);
  const Mat dense = l.dense();
  CHECK((dense - dense.transpose()).cwiseAbs().maxCoeff() < 1e-14);

  Eigen::SelfAdjointEigenSolver<Mat> eig(dense);
  CHECK(eig.eigenvalues().minCoeff() > -1e-12);
  CHECK(eig.eigenvalues().maxCoeff() < 2.0 + 1e-12);
  CHECK(eig.eigenvalues().minCoeff() < 1e-12);  // connected or not, 0 is present

  // The sqrt-degree vector of A+I is annihilated by L.
  Mat a = Mat(SpMat(knn_graph(pts, 4).edges)) + Mat::Identity(15, 15);
  Vec null_vec = a.rowwise().sum().array().sqrt().matrix();
  CHECK(l.multiply(null_vec).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("filtering by repeated averaging equals the spectral-gain route", "[graph_filter]") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Index n = 8 + static_cast<Index>(seed);
    const Mat x = support::random_matrix(n, 3, 1000 + seed);

    // Alternate between dense similarity graphs and sparse KNN adjacencies.
    const Laplacian l = (seed % 2 == 0)
                            ? laplacian(to_normalized_graph(support::random_cosine_graph(n, 4, seed)))
                            : laplacian(normalize_adjacency(knn_graph(support::random_matrix(n, 3, seed), 3), true));
    const Mat ldense = l.dense();
    for (int k : {0, 1, 2, 5}) {
      const Mat iterative = filter_features(x, l, k).matrix;
      const Mat spectral = support::filter_by_eigen(x, ldense, k);
      CHECK((iterative - spectral).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("filter order composes additively", "[graph_filter]") {
  const Mat x = support::random_matrix(10, 2, 5);
  const Laplacian l = laplacian(to_normalized_graph(support::random_cosine_graph(10, 3, 5)));
  const Mat once = filter_features(x, l, 5).matrix;
  const Mat split = filter_features(filter_features(x, l, 2).matrix, l, 3).matrix;
  CHECK((once - split).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(filter_features(x, l, 0).matrix == x);
}

TEST_CASE("filter input validation", "[graph_filter]") {
  const Mat x = support::random_matrix(6, 2, 9);
  const Laplacian l = laplacian(to_normalized_graph(support::random_cosine_graph(6, 3, 9)));
  CHECK_THROWS_AS(filter_features(x, l, -1), InvalidArgument);
  CHECK_THROWS_AS(filter_features(support::random_matrix(5, 2, 9), l, 1), DimensionMismatch);
}

TEST_CASE("smoothness of a laplacian eigenvector is its eigenvalue", "[graph_filter]") {
  const Laplacian l = laplacian(to_normalized_graph(support::random_cosine_graph(9, 3, 21)));
  Eigen::SelfAdjointEigenSolver<Mat> eig(l.dense());
  for (Index i = 0; i < 9; ++i) {
    const Vec u = eig.eigenvectors().col(i);
    CHECK(smoothness(u, l) == Catch::Approx(eig.eigenvalues()(i)).margin(1e-8));
  }
}

TEST_CASE("smoothness matches the hand-computed two-node value", "[graph_filter]") {
  const Laplacian l = laplacian(normalize_adjacency(path_graph(2), false));
  Vec u(2);
  u << 1.0, -1.0;
  CHECK(smoothness(u, l) == Catch::Approx(2.0).margin(1e-14));
  Vec flat(2);
  flat << 1.0, 1.0;
  CHECK(smoothness(flat, l) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("filtering never raises smoothness", "[graph_filter]") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Laplacian l = laplacian(normalize_adjacency(
        knn_graph(support::random_matrix(14, 3, 200 + seed), 3), true));
    Vec signal = support::random_matrix(14, 1, 300 + seed).col(0);
    double previous = smoothness(signal, l);
    for (int step = 0; step < 4; ++step) {
      signal = filter_features(signal, l, 1).matrix.col(0);
      const double current = smoothness(signal, l);
      CHECK(current <= previous + 1e-12);
      previous = current;
    }
  }
}

TEST_CASE("constant signals on a regular graph are perfectly smooth", "[graph_filter]") {
  const Laplacian l = laplacian(normalize_adjacency(cycle_graph(8), true));
  const Vec ones = Vec::Ones(8);
  CHECK(smoothness(ones, l) == Catch::Approx(0.0).margin(1e-14));
  CHECK_THROWS_AS(smoothness(Vec::Zero(8), l), ZeroSignal);
  CHECK_THROWS_AS(smoothness(Vec::Ones(5), l), DimensionMismatch);
}

TEST_CASE("operator-backed graphs act identically to their dense form", "[graph_filter]") {
  const Mat x = support::random_matrix(11, 4, 31);
  CosineSimilarityOperator op(x);
  const NormalizedGraph via_op = to_normalized_graph(op);
  const NormalizedGraph via_dense = to_normalized_graph(
      normalize_similarity(cosine_similarity_graph(x), GraphNorm::symmetric));

  const Mat b = support::random_matrix(11, 3, 32);
  CHECK((via_op.matrix.multiply(b) - via_dense.matrix.multiply(b)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((via_op.matrix.dense() - via_dense.matrix.dense()).cwiseAbs().maxCoeff() < 1e-12);

  const Mat h_op = filter_features(x, laplacian(via_op), 2).matrix;
  const Mat h_dense = filter_features(x, laplacian(via_dense), 2).matrix;
  CHECK((h_op - h_dense).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("only symmetric normalization feeds the filter", "[graph_filter]") {
  const Mat x = support::random_matrix(6, 3, 41);
  const auto rw = normalize_similarity(cosine_similarity_graph(x), GraphNorm::row_stochastic);
  CHECK_THROWS_AS(to_normalized_graph(rw), InvalidArgument);
  NormalizedGraph bad{GraphMatrix(rw.matrix), GraphNorm::row_stochastic, false};
  CHECK_THROWS_AS(laplacian(std::move(bad)), InvalidArgument);
}
