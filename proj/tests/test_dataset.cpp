#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <numbers>

#include "hmvc/dataset.hpp"
#include "hmvc/matrix_io.hpp"
#include "test_support.hpp"

using namespace hmvc;
using support::TempDir;

namespace {

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
}

}  // namespace

TEST_CASE("csv matrix parsing handles plain, quoted, and CRLF input", "[dataset]") {
  TempDir dir("csv");
  write_text(dir.file("a.csv"), "1.5,2,3\r\n-4,5e-1,\"6.25\"\r\n");
  const Mat m = read_csv_matrix(dir.file("a.csv"));
  REQUIRE(m.rows() == 2);
  REQUIRE(m.cols() == 3);
  CHECK(m(0, 0) == 1.5);
  CHECK(m(1, 1) == 0.5);
  CHECK(m(1, 2) == 6.25);

  write_text(dir.file("h.csv"), "f1,f2\n1,2\n3,4\n");
  const Mat h = read_csv_matrix(dir.file("h.csv"), /*header=*/true);
  REQUIRE(h.rows() == 2);
  CHECK(h(1, 0) == 3.0);
}

TEST_CASE("csv matrix parsing rejects malformed input", "[dataset]") {
  TempDir dir("csvbad");
  write_text(dir.file("ragged.csv"), "1,2\n3\n");
  CHECK_THROWS_AS(read_csv_matrix(dir.file("ragged.csv")), RowCountMismatch);

  write_text(dir.file("alpha.csv"), "1,2\n3,abc\n");
  CHECK_THROWS_AS(read_csv_matrix(dir.file("alpha.csv")), NonNumericEntry);

  write_text(dir.file("nan.csv"), "1,2\n3,nan\n");
  CHECK_THROWS_AS(read_csv_matrix(dir.file("nan.csv")), NonNumericEntry);

  write_text(dir.file("empty.csv"), "");
  CHECK_THROWS_AS(read_csv_matrix(dir.file("empty.csv")), EmptyView);

  CHECK_THROWS_AS(read_csv_matrix(dir.file("missing.csv")), Error);
}

TEST_CASE("binary matrix round trip is exact", "[dataset]") {
  TempDir dir("bin");
  const Mat m = support::random_matrix(7, 3, 99);
  write_binary_matrix(dir.file("m.bin"), m);
  const Mat back = read_binary_matrix(dir.file("m.bin"));
  REQUIRE(back.rows() == m.rows());
  REQUIRE(back.cols() == m.cols());
  CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);

  write_text(dir.file("junk.bin"), "NOTAMATRIXFILE");
  CHECK_THROWS_AS(read_binary_matrix(dir.file("junk.bin")), Error);
}

TEST_CASE("csv matrix round trip preserves values to full precision", "[dataset]") {
  TempDir dir("csvrt");
  const Mat m = support::random_matrix(5, 4, 123, 10.0);
  write_csv_matrix(dir.file("m.csv"), m);
  const Mat back = read_csv_matrix(dir.file("m.csv"));
  CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("edge list IO supports comments, weights, and round trip", "[dataset]") {
  TempDir dir("edges");
  write_text(dir.file("g.txt"), "# comment line\n0 1\n1 2 0.5\n\n");
  const auto edges = read_edge_list(dir.file("g.txt"));
  REQUIRE(edges.size() == 2);
  CHECK(edges[0].i == 0);
  CHECK(edges[0].j == 1);
  CHECK(edges[0].w == 1.0);
  CHECK(edges[1].w == 0.5);

  write_text(dir.file("bad.txt"), "0 1 2 3\n");
  CHECK_THROWS_AS(read_edge_list(dir.file("bad.txt")), Error);

  const auto adj = build_adjacency(edges, 3);
  write_edge_list(dir.file("out.txt"), adj.edges);
  const auto back = read_edge_list(dir.file("out.txt"));
  const auto adj2 = build_adjacency(back, 3);
  CHECK(Mat(adj.edges).isApprox(Mat(adj2.edges)));
}

TEST_CASE("label file round trip", "[dataset]") {
  TempDir dir("labels");
  const std::vector<int> y{2, 0, 1, 1, 0};
  write_labels(dir.file("y.txt"), y);
  CHECK(read_labels(dir.file("y.txt")) == y);
}

TEST_CASE("adjacency construction symmetrizes with max merge and skips loops", "[dataset]") {
  std::vector<EdgeRecord> edges{{0, 1, 2.0}, {1, 0, 5.0}, {2, 2, 9.0}, {1, 2, 1.0}};
  const auto adj = build_adjacency(edges, 3);
  const Mat d = Mat(adj.edges);
  CHECK(d(0, 1) == 5.0);
  CHECK(d(1, 0) == 5.0);
  CHECK(d(2, 2) == 0.0);  // self loops dropped at build time
  CHECK(d(1, 2) == 1.0);
  CHECK(d(2, 1) == 1.0);
}

TEST_CASE("adjacency construction validates ids and weights", "[dataset]") {
  CHECK_THROWS_AS(build_adjacency({{0, 3, 1.0}}, 3), NodeIdOutOfRange);
  CHECK_THROWS_AS(build_adjacency({{-1, 0, 1.0}}, 3), NodeIdOutOfRange);
  CHECK_THROWS_AS(build_adjacency({{0, 1, -1.0}}, 3), InvalidArgument);
  // Asymmetric input without symmetrization is an error...
  CHECK_THROWS_AS(build_adjacency({{0, 1, 1.0}}, 3, /*symmetrize=*/false), AsymmetricWeights);
  // ...but symmetric input passes through.
  const auto ok = build_adjacency({{0, 1, 2.0}, {1, 0, 2.0}}, 3, /*symmetrize=*/false);
  CHECK(Mat(ok.edges)(0, 1) == 2.0);
}

TEST_CASE("feature view loading stamps ids and flags zero rows", "[dataset]") {
  TempDir dir("views");
  write_text(dir.file("v0.csv"), "1,0\n0,0\n2,1\n");
  write_text(dir.file("v1.csv"), "5\n6\n7\n");
  const auto ds = load_feature_views({dir.file("v0.csv"), dir.file("v1.csv")});
  REQUIRE(ds.num_views() == 2);
  REQUIRE(ds.num_samples() == 3);
  CHECK(ds.views[0].view_id == 0);
  CHECK(ds.views[1].view_id == 1);
  REQUIRE(ds.views[0].zero_rows.size() == 1);
  CHECK(ds.views[0].zero_rows[0] == 1);
  CHECK(ds.views[1].zero_rows.empty());
  CHECK_FALSE(ds.has_graphs());

  write_text(dir.file("short.csv"), "1\n2\n");
  CHECK_THROWS_AS(load_feature_views({dir.file("v0.csv"), dir.file("short.csv")}),
                  RowCountMismatch);
}

TEST_CASE("attributed graph loading handles shared-feature and shared-graph layouts", "[dataset]") {
  TempDir dir("attr");
  write_text(dir.file("x.csv"), "1,0\n0,1\n1,1\n");
  write_text(dir.file("x2.csv"), "2,0\n0,2\n2,2\n");
  write_text(dir.file("g0.txt"), "0 1\n1 2\n");
  write_text(dir.file("g1.txt"), "0 2\n");

  SECTION("one feature matrix, many graphs replicates features") {
    const auto ds = load_attributed_graph({dir.file("x.csv")}, {dir.file("g0.txt"), dir.file("g1.txt")});
    REQUIRE(ds.num_views() == 2);
    REQUIRE(ds.adjacencies.size() == 2);
    CHECK(ds.shared_features);
    CHECK_FALSE(ds.shared_adjacency);
    CHECK(ds.views[0].data == ds.views[1].data);
    CHECK(ds.has_graphs());
  }
  SECTION("many feature matrices, one graph shares the graph") {
    const auto ds = load_attributed_graph({dir.file("x.csv"), dir.file("x2.csv")}, {dir.file("g0.txt")});
    REQUIRE(ds.num_views() == 2);
    REQUIRE(ds.adjacencies.size() == 1);
    CHECK(ds.shared_adjacency);
    CHECK(&ds.adjacency_for_view(0) == &ds.adjacency_for_view(1));
  }
  SECTION("matched counts pair one-to-one") {
    const auto ds = load_attributed_graph({dir.file("x.csv"), dir.file("x2.csv")},
                                          {dir.file("g0.txt"), dir.file("g1.txt")});
    REQUIRE(ds.num_views() == 2);
    CHECK(&ds.adjacency_for_view(0) != &ds.adjacency_for_view(1));
  }
  SECTION("incompatible counts are rejected") {
    write_text(dir.file("x3.csv"), "3\n3\n3\n");
    CHECK_THROWS_AS(load_attributed_graph({dir.file("x.csv"), dir.file("x2.csv"), dir.file("x3.csv")},
                                          {dir.file("g0.txt"), dir.file("g1.txt")}),
                    InvalidArgument);
  }
  SECTION("graph node ids beyond the sample count are rejected") {
    write_text(dir.file("big.txt"), "0 7\n");
    CHECK_THROWS_AS(load_attributed_graph({dir.file("x.csv")}, {dir.file("big.txt")}),
                    NodeIdOutOfRange);
  }
}

TEST_CASE("label attachment validates coverage and derives cluster count", "[dataset]") {
  TempDir dir("attach");
  write_text(dir.file("x.csv"), "1\n2\n3\n4\n");
  auto ds = load_feature_views({dir.file("x.csv")});
  attach_labels(ds, {1, 0, 2, 1});
  REQUIRE(ds.labels.has_value());
  CHECK(ds.n_clusters == 3);

  auto ds2 = load_feature_views({dir.file("x.csv")});
  CHECK_THROWS_AS(attach_labels(ds2, {0, 1}), RowCountMismatch);
  CHECK_THROWS_AS(attach_labels(ds2, {0, 2, 2, 0}), InvalidArgument);  // class 1 missing
  CHECK_THROWS_AS(attach_labels(ds2, {0, -1, 1, 0}), InvalidArgument);

  write_text(dir.file("y.txt"), "0\n1\n0\n1\n");
  attach_labels_file(ds2, dir.file("y.txt"));
  CHECK(ds2.n_clusters == 2);
}

TEST_CASE("two moons matches the noiseless parametric arcs", "[dataset]") {
  const auto ds = two_moons(8, 0.0, 1);
  REQUIRE(ds.num_samples() == 8);
  REQUIRE(ds.num_views() == 1);
  REQUIRE(ds.views[0].data.cols() == 2);
  REQUIRE(ds.labels.has_value());
  CHECK(ds.n_clusters == 2);

  const Mat& x = ds.views[0].data;
  constexpr double pi = std::numbers::pi;
  for (int i = 0; i < 4; ++i) {
    const double t = pi * i / 3.0;  // inclusive grid over [0, pi]
    CHECK(x(i, 0) == Catch::Approx(std::cos(t)).margin(1e-12));
    CHECK(x(i, 1) == Catch::Approx(std::sin(t)).margin(1e-12));
    CHECK((*ds.labels)[static_cast<size_t>(i)] == 0);
    CHECK(x(4 + i, 0) == Catch::Approx(1.0 - std::cos(t)).margin(1e-12));
    CHECK(x(4 + i, 1) == Catch::Approx(0.5 - std::sin(t)).margin(1e-12));
    CHECK((*ds.labels)[static_cast<size_t>(4 + i)] == 1);
  }

  CHECK_THROWS_AS(two_moons(9, 0.0, 1), InvalidArgument);
  CHECK_THROWS_AS(two_moons(2, 0.0, 1), InvalidArgument);

  // Same seed reproduces bitwise; different seed does not.
  const auto a = two_moons(40, 0.1, 7);
  const auto b = two_moons(40, 0.1, 7);
  const auto c = two_moons(40, 0.1, 8);
  CHECK(a.views[0].data == b.views[0].data);
  CHECK(a.views[0].data != c.views[0].data);
}

TEST_CASE("gaussian blob views are balanced, labeled, and view-independent", "[dataset]") {
  const auto ds = gaussian_blobs(30, 3, {4, 6}, 5.0, 11);
  REQUIRE(ds.num_views() == 2);
  REQUIRE(ds.num_samples() == 30);
  CHECK(ds.views[0].data.cols() == 4);
  CHECK(ds.views[1].data.cols() == 6);
  CHECK(ds.n_clusters == 3);
  REQUIRE(ds.labels.has_value());
  std::array<int, 3> counts{};
  for (int y : *ds.labels) ++counts[static_cast<size_t>(y)];
  CHECK(counts[0] == 10);
  CHECK(counts[1] == 10);
  CHECK(counts[2] == 10);

  // Views use distinct noise streams: the shared centers cancel within a
  // class, the noise should not.
  const auto d2 = gaussian_blobs(30, 3, {4, 4}, 5.0, 11);
  CHECK(d2.views[0].data != d2.views[1].data);

  // With large separation, class means are far apart relative to noise.
  Mat mean0 = Mat::Zero(1, 4), mean1 = Mat::Zero(1, 4);
  for (int i = 0; i < 30; ++i) {
    if ((*ds.labels)[static_cast<size_t>(i)] == 0) mean0 += ds.views[0].data.row(i) / 10.0;
    if ((*ds.labels)[static_cast<size_t>(i)] == 1) mean1 += ds.views[0].data.row(i) / 10.0;
  }
  CHECK((mean0 - mean1).norm() > 3.0);

  CHECK_THROWS_AS(gaussian_blobs(5, 9, {2}, 1.0, 1), InvalidArgument);
  CHECK_THROWS_AS(gaussian_blobs(10, 2, {}, 1.0, 1), InvalidArgument);
}

TEST_CASE("knn graph connects nearest neighbours symmetrically", "[dataset]") {
  // Four points on a line: 0 - 1 -- 2 - 3 with a wide middle gap.
  Mat pts(4, 1);
  pts << 0.0, 1.0, 5.0, 6.0;
  const auto adj = knn_graph(pts, 1);
  const Mat d = Mat(adj.edges);
  CHECK(d(0, 1) == 1.0);
  CHECK(d(1, 0) == 1.0);  // union symmetrization
  CHECK(d(2, 3) == 1.0);
  CHECK(d(3, 2) == 1.0);
  CHECK(d(0, 2) == 0.0);
  CHECK(d.diagonal().cwiseAbs().sum() == 0.0);

  CHECK_THROWS_AS(knn_graph(pts, 0), InvalidArgument);
  CHECK_THROWS_AS(knn_graph(pts, 4), InvalidArgument);
}

TEST_CASE("knn graph breaks distance ties by lower index and reports them", "[dataset]") {
  // Point 0 is equidistant from 1 and 2; the lower id must win.
  Mat pts(3, 2);
  pts << 0.0, 0.0, 1.0, 0.0, -1.0, 0.0;
  bool ties = false;
  const auto adj = knn_graph(pts, 1, &ties);
  CHECK(ties);
  const Mat d = Mat(adj.edges);
  CHECK(d(0, 1) == 1.0);
  // 1's nearest is 0 and 2's nearest is 0, so 0-2 appears via 2's list.
  CHECK(d(0, 2) == 1.0);

  Mat apart(3, 2);
  apart << 0.0, 0.0, 1.0, 0.0, 10.0, 0.0;
  bool no_ties = true;
  knn_graph(apart, 1, &no_ties);
  CHECK_FALSE(no_ties);
}

TEST_CASE("view validation rejects empty and non-finite data", "[dataset]") {
  TempDir dir("valid");
  write_text(dir.file("ok.csv"), "1,2\n3,4\n");
  CHECK_NOTHROW(load_feature_views({dir.file("ok.csv")}));
  CHECK_THROWS_AS(load_feature_views({}), InvalidArgument);
}
