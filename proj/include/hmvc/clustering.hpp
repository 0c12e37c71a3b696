#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "hmvc/types.hpp"

namespace hmvc {

// ---------------------------------------------------------------------------
// k-means

struct KmeansOptions {
  int restarts = 50;
  int max_iters = 300;
  double tol = 1e-7;
};

struct KmeansResult {
  std::vector<int> labels;
  double inertia = 0.0;
  int repairs = 0;       // empty-cluster repairs across the winning restart
  int best_restart = 0;  // lowest index among inertia ties
};

namespace kmeans_detail {

template <typename Rng>
Mat plus_plus_init(const Mat& pts, int c, Rng& rng) {
  const Index n = pts.rows();
  Mat centers(c, pts.cols());
  std::vector<bool> chosen(static_cast<size_t>(n), false);
  Index first = static_cast<Index>(uniform_unit(rng) * static_cast<double>(n));
  first = std::min(first, n - 1);
  centers.row(0) = pts.row(first);
  chosen[static_cast<size_t>(first)] = true;
  Vec dist2 = (pts.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int k = 1; k < c; ++k) {
    const double total = dist2.sum();
    Index pick = -1;
    if (total > 0.0) {
      const double r = uniform_unit(rng) * total;
      double cum = 0.0;
      for (Index i = 0; i < n; ++i) {
        cum += dist2(i);
        if (cum > r) {
          pick = i;
          break;
        }
      }
      if (pick < 0) pick = n - 1;
    }
    if (pick < 0 || chosen[static_cast<size_t>(pick)]) {
      // Degenerate weights (duplicate points): lowest unchosen index.
      for (Index i = 0; i < n; ++i)
        if (!chosen[static_cast<size_t>(i)]) {
          pick = i;
          break;
        }
    }
    chosen[static_cast<size_t>(pick)] = true;
    centers.row(k) = pts.row(pick);
    dist2 = dist2.cwiseMin((pts.rowwise() - centers.row(k)).rowwise().squaredNorm());
  }
  return centers;
}

struct LloydOutcome {
  std::vector<int> labels;
  double inertia = 0.0;
  int repairs = 0;
};

inline LloydOutcome lloyd(const Mat& pts, Mat centers, int max_iters, double tol) {
  const Index n = pts.rows();
  const int c = static_cast<int>(centers.rows());
  LloydOutcome out;
  out.labels.assign(static_cast<size_t>(n), -1);
  Mat dists(n, c);
  for (int iter = 0; iter < max_iters; ++iter) {
    for (int k = 0; k < c; ++k)
      dists.col(k) = (pts.rowwise() - centers.row(k)).rowwise().squaredNorm();
    // Assignment; ties keep the current cluster so repairs cannot oscillate.
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      const int current = out.labels[static_cast<size_t>(i)];
      int best = 0;
      for (int k = 1; k < c; ++k)
        if (dists(i, k) < dists(i, best)) best = k;
      if (current >= 0 && dists(i, current) == dists(i, best)) best = current;
      if (best != current) changed = true;
      out.labels[static_cast<size_t>(i)] = best;
    }
    // Empty-cluster repair: move the point farthest from its centroid.
    std::vector<Index> counts(static_cast<size_t>(c), 0);
    for (int l : out.labels) ++counts[static_cast<size_t>(l)];
    std::vector<bool> moved(static_cast<size_t>(n), false);
    for (int k = 0; k < c; ++k) {
      if (counts[static_cast<size_t>(k)] > 0) continue;
      Index farthest = -1;
      double far_d = -1.0;
      for (Index i = 0; i < n; ++i) {
        const int l = out.labels[static_cast<size_t>(i)];
        if (moved[static_cast<size_t>(i)] || counts[static_cast<size_t>(l)] <= 1) continue;
        if (dists(i, l) > far_d) {
          far_d = dists(i, l);
          farthest = i;
        }
      }
      if (farthest < 0) continue;  // fewer distinct points than clusters
      --counts[static_cast<size_t>(out.labels[static_cast<size_t>(farthest)])];
      out.labels[static_cast<size_t>(farthest)] = k;
      ++counts[static_cast<size_t>(k)];
      moved[static_cast<size_t>(farthest)] = true;
      ++out.repairs;
      changed = true;
    }
    // Centroid update.
    Mat next = Mat::Zero(c, pts.cols());
    for (Index i = 0; i < n; ++i) next.row(out.labels[static_cast<size_t>(i)]) += pts.row(i);
    for (int k = 0; k < c; ++k)
      if (counts[static_cast<size_t>(k)] > 0) next.row(k) /= static_cast<double>(counts[static_cast<size_t>(k)]);
      else next.row(k) = centers.row(k);
    const double shift = (next - centers).norm();
    centers = std::move(next);
    if (!changed || shift < tol) break;
  }
  out.inertia = 0.0;
  for (Index i = 0; i < n; ++i)
    out.inertia += (pts.row(i) - centers.row(out.labels[static_cast<size_t>(i)])).squaredNorm();
  return out;
}

}  // namespace kmeans_detail

/// Seeded k-means with k-means++ restarts; the best restart is the lowest
/// inertia, ties broken by restart index. Deterministic for a fixed seed.
inline KmeansResult kmeans(const Mat& pts, int c, std::uint64_t seed, KmeansOptions opts = {}) {
  if (pts.rows() == 0) throw EmptyView("kmeans: no points");
  if (c < 1 || c > pts.rows()) throw InvalidArgument("kmeans: need 1 <= c <= N");
  require_finite(pts, "kmeans");
  KmeansResult best;
  bool have = false;
  for (int r = 0; r < opts.restarts; ++r) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
    Mat centers = kmeans_detail::plus_plus_init(pts, c, rng);
    auto outcome = kmeans_detail::lloyd(pts, std::move(centers), opts.max_iters, opts.tol);
    if (!have || outcome.inertia < best.inertia) {
      best.labels = std::move(outcome.labels);
      best.inertia = outcome.inertia;
      best.repairs = outcome.repairs;
      best.best_restart = r;
      have = true;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Cluster-to-class matching

namespace assign_detail {

/// O(n^3) shortest-augmenting-path assignment; returns the column matched to
/// each row of the square cost matrix.
inline std::vector<int> min_cost_assignment(const Mat& cost) {
  const int n = static_cast<int>(cost.rows());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<size_t>(n) + 1, 0.0), v(static_cast<size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<size_t>(n) + 1, 0), way(static_cast<size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<size_t>(n) + 1, kInf);
    std::vector<char> used(static_cast<size_t>(n) + 1, 0);
    do {
      used[static_cast<size_t>(j0)] = 1;
      const int i0 = p[static_cast<size_t>(j0)];
      int j1 = 0;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
        if (cur < minv[static_cast<size_t>(j)]) {
          minv[static_cast<size_t>(j)] = cur;
          way[static_cast<size_t>(j)] = j0;
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(p[static_cast<size_t>(j)])] += delta;
          v[static_cast<size_t>(j)] -= delta;
        } else {
          minv[static_cast<size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<size_t>(j0)];
      p[static_cast<size_t>(j0)] = p[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(static_cast<size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (p[static_cast<size_t>(j)] > 0) row_to_col[static_cast<size_t>(p[static_cast<size_t>(j)]) - 1] = j - 1;
  return row_to_col;
}

inline double assignment_total(const Mat& gain, const std::vector<int>& row_to_col) {
  double total = 0.0;
  for (size_t i = 0; i < row_to_col.size(); ++i) total += gain(static_cast<Index>(i), row_to_col[i]);
  return total;
}

inline double best_assignment_total(const Mat& gain) {
  if (gain.rows() == 0) return 0.0;
  const double shift = gain.maxCoeff();
  const Mat cost = Mat::Constant(gain.rows(), gain.cols(), shift) - gain;
  return assignment_total(gain, min_cost_assignment(cost));
}

/// Maximum-gain assignment, canonicalized to the lexicographically smallest
/// optimal column sequence so tied optima give one well-defined mapping.
inline std::vector<int> canonical_max_assignment(const Mat& gain) {
  const int s = static_cast<int>(gain.rows());
  const double best_total = best_assignment_total(gain);
  std::vector<int> result(static_cast<size_t>(s), -1);
  std::vector<bool> col_used(static_cast<size_t>(s), false);
  double fixed = 0.0;
  // Counts are integers, so exact total comparisons below are safe.
  for (int row = 0; row < s; ++row) {
    const int remaining = s - row - 1;
    for (int col = 0; col < s; ++col) {
      if (col_used[static_cast<size_t>(col)]) continue;
      double sub_best = 0.0;
      if (remaining > 0) {
        std::vector<int> cols;
        for (int j = 0; j < s; ++j)
          if (j != col && !col_used[static_cast<size_t>(j)]) cols.push_back(j);
        Mat sub(remaining, remaining);
        for (int i = row + 1; i < s; ++i)
          for (size_t k = 0; k < cols.size(); ++k) sub(i - row - 1, static_cast<Index>(k)) = gain(i, cols[k]);
        sub_best = best_assignment_total(sub);
      }
      if (fixed + gain(row, col) + sub_best == best_total) {
        result[static_cast<size_t>(row)] = col;
        col_used[static_cast<size_t>(col)] = true;
        fixed += gain(row, col);
        break;
      }
    }
  }
  return result;
}

}  // namespace assign_detail

struct Contingency {
  Mat counts;                     // predicted clusters x truth classes
  std::vector<int> pred_ids;      // compact id per sample
  std::vector<int> truth_ids;
  Index n = 0;
};

inline Contingency contingency_table(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size())
    throw LengthMismatch("metrics: " + std::to_string(pred.size()) + " vs " +
                         std::to_string(truth.size()) + " labels");
  if (pred.empty()) throw EmptyView("metrics: no labels");
  auto compact = [](const std::vector<int>& raw, std::vector<int>& ids) {
    std::map<int, int> remap;
    for (int v : raw) remap.emplace(v, 0);
    int next = 0;
    for (auto& [key, id] : remap) id = next++;
    ids.resize(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) ids[i] = remap[raw[i]];
    return next;
  };
  Contingency c;
  const int rp = compact(pred, c.pred_ids);
  const int rt = compact(truth, c.truth_ids);
  c.counts = Mat::Zero(rp, rt);
  for (size_t i = 0; i < pred.size(); ++i) c.counts(c.pred_ids[i], c.truth_ids[i]) += 1.0;
  c.n = static_cast<Index>(pred.size());
  return c;
}

/// Cluster-to-class map maximizing matched samples (optimal assignment on the
/// zero-padded square contingency), canonicalized lexicographically.
inline std::vector<int> optimal_cluster_map(const Contingency& c) {
  const int s = static_cast<int>(std::max(c.counts.rows(), c.counts.cols()));
  Mat gain = Mat::Zero(s, s);
  gain.topLeftCorner(c.counts.rows(), c.counts.cols()) = c.counts;
  return assign_detail::canonical_max_assignment(gain);
}

/// Fraction of samples matched under the optimal cluster-to-class assignment.
inline double clustering_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  const Contingency c = contingency_table(pred, truth);
  const auto map = optimal_cluster_map(c);
  double matched = 0.0;
  for (Index p = 0; p < c.counts.rows(); ++p) {
    const int col = map[static_cast<size_t>(p)];
    if (col < c.counts.cols()) matched += c.counts(p, col);
  }
  return matched / static_cast<double>(c.n);
}

/// Mutual information normalized by the arithmetic mean of the entropies
/// (natural log). Two zero-entropy partitions are identical, hence 1.
inline double normalized_mutual_information(const std::vector<int>& pred,
                                            const std::vector<int>& truth) {
  const Contingency c = contingency_table(pred, truth);
  const double n = static_cast<double>(c.n);
  const Vec a = c.counts.rowwise().sum();
  const Vec b = c.counts.colwise().sum().transpose();
  double mi = 0.0;
  for (Index i = 0; i < c.counts.rows(); ++i)
    for (Index j = 0; j < c.counts.cols(); ++j) {
      const double nij = c.counts(i, j);
      if (nij > 0.0) mi += (nij / n) * std::log(n * nij / (a(i) * b(j)));
    }
  auto entropy = [&](const Vec& counts) {
    double h = 0.0;
    for (Index i = 0; i < counts.size(); ++i)
      if (counts(i) > 0.0) h -= (counts(i) / n) * std::log(counts(i) / n);
    return h;
  };
  const double denom = 0.5 * (entropy(a) + entropy(b));
  if (denom == 0.0) return 1.0;  // both partitions are single clusters
  return std::clamp(mi / denom, 0.0, 1.0);
}

/// Adjusted Rand index from the contingency table; a zero adjustment
/// denominator (both partitions pair-trivial) is defined as 1.
inline double adjusted_rand_index(const std::vector<int>& pred, const std::vector<int>& truth) {
  const Contingency c = contingency_table(pred, truth);
  auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (Index i = 0; i < c.counts.rows(); ++i)
    for (Index j = 0; j < c.counts.cols(); ++j) index += choose2(c.counts(i, j));
  const Vec a = c.counts.rowwise().sum();
  const Vec b = c.counts.colwise().sum().transpose();
  for (Index i = 0; i < a.size(); ++i) sum_a += choose2(a(i));
  for (Index j = 0; j < b.size(); ++j) sum_b += choose2(b(j));
  const double total = choose2(static_cast<double>(c.n));
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) return 1.0;
  return (index - expected) / denom;
}

/// Macro F1 after mapping clusters to classes with the accuracy-optimal
/// assignment; averaged over the union of truth classes and mapped labels.
inline double assignment_f1(const std::vector<int>& pred, const std::vector<int>& truth) {
  const Contingency c = contingency_table(pred, truth);
  const auto map = optimal_cluster_map(c);
  const int k = static_cast<int>(c.counts.cols());
  std::vector<int> mapped(c.pred_ids.size());
  std::vector<bool> in_union(map.size(), false);
  for (size_t i = 0; i < c.pred_ids.size(); ++i) {
    mapped[i] = map[static_cast<size_t>(c.pred_ids[i])];
    in_union[static_cast<size_t>(mapped[i])] = true;
  }
  for (int j = 0; j < k; ++j) in_union[static_cast<size_t>(j)] = true;
  double f1_sum = 0.0;
  int classes = 0;
  for (size_t j = 0; j < in_union.size(); ++j) {
    if (!in_union[j]) continue;
    ++classes;
    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (size_t i = 0; i < mapped.size(); ++i) {
      const bool in_pred = mapped[i] == static_cast<int>(j);
      const bool in_truth = static_cast<int>(j) < k && c.truth_ids[i] == static_cast<int>(j);
      tp += in_pred && in_truth;
      fp += in_pred && !in_truth;
      fn += !in_pred && in_truth;
    }
    const double denom = 2.0 * tp + fp + fn;
    f1_sum += denom > 0.0 ? 2.0 * tp / denom : 0.0;
  }
  return f1_sum / static_cast<double>(classes);
}

/// Fraction of samples in their cluster's majority class.
inline double purity(const std::vector<int>& pred, const std::vector<int>& truth) {
  const Contingency c = contingency_table(pred, truth);
  double sum = 0.0;
  for (Index p = 0; p < c.counts.rows(); ++p) sum += c.counts.row(p).maxCoeff();
  return sum / static_cast<double>(c.n);
}

struct MetricSet {
  double acc = 0.0, nmi = 0.0, ari = 0.0, f1 = 0.0, purity = 0.0;
};

inline MetricSet evaluate_labels(const std::vector<int>& pred, const std::vector<int>& truth) {
  return MetricSet{clustering_accuracy(pred, truth), normalized_mutual_information(pred, truth),
                   adjusted_rand_index(pred, truth), assignment_f1(pred, truth),
                   hmvc::purity(pred, truth)};
}

// ---------------------------------------------------------------------------
// Graph embeddings

/// Spectral clustering of an affinity matrix: symmetrize, clamp negatives,
/// degree-normalize, embed with the top-c eigenvectors, row-normalize, then
/// seeded k-means.
inline std::vector<int> spectral_cluster(const Mat& affinity, int c, std::uint64_t seed,
                                         KmeansOptions opts = {}) {
  if (affinity.rows() != affinity.cols()) throw DimensionMismatch("spectral_cluster: square input");
  const Index n = affinity.rows();
  if (c < 1 || c > n) throw DegenerateEigenbasis("spectral_cluster: need 1 <= c <= N");
  Mat w = 0.5 * (affinity + affinity.transpose());
  w = w.cwiseMax(0.0);
  Vec deg = w.rowwise().sum();
  for (Index i = 0; i < n; ++i)
    if (deg(i) <= 0.0) deg(i) = 1.0;  // isolated rows stay zero in the embedding
  const Vec s = deg.array().rsqrt().matrix();
  const Mat normalized = s.asDiagonal() * w * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat> eig(normalized);
  if (eig.info() != Eigen::Success) throw SolveFailure("spectral_cluster: eigensolver failed");
  Mat embedding = eig.eigenvectors().rightCols(c);
  for (Index i = 0; i < n; ++i) {
    const double norm = embedding.row(i).norm();
    if (norm > 0.0) embedding.row(i) /= norm;
  }
  return kmeans(embedding, c, seed, opts).labels;
}

/// Clusters an anchor factor: k-means on the top-c left singular vectors.
inline std::vector<int> svd_cluster(const Mat& z, int c, std::uint64_t seed,
                                    KmeansOptions opts = {}) {
  if (c < 1 || c > std::min(z.rows(), z.cols()))
    throw DegenerateEigenbasis("svd_cluster: need 1 <= c <= min(N, m)");
  Eigen::BDCSVD<Mat> svd(z, Eigen::ComputeThinU);
  const Mat embedding = svd.matrixU().leftCols(c);
  return kmeans(embedding, c, seed, opts).labels;
}

}  // namespace hmvc
