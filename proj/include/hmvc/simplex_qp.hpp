#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>

#include "hmvc/types.hpp"

namespace hmvc {

/// Euclidean projection onto the probability simplex (sort-based).
inline Vec project_to_simplex(const Vec& v) {
  const Index n = v.size();
  if (n == 0) throw InvalidArgument("project_to_simplex: empty vector");
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumulative = 0.0, tau = 0.0;
  int support = 0;
  for (Index k = 0; k < n; ++k) {
    cumulative += u[static_cast<size_t>(k)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (u[static_cast<size_t>(k)] - candidate > 0.0) {
      tau = candidate;
      support = static_cast<int>(k + 1);
    }
  }
  (void)support;
  return (v.array() - tau).cwiseMax(0.0).matrix();
}

struct SimplexQpResult {
  Vec x;
  double kkt_residual = 0.0;
  int iterations = 0;
};

/// Minimizes (1/2) x^T P x + q^T x over the probability simplex by projected
/// gradient on a scale-normalized copy of the problem. The reported residual
/// is the fixed-point gap ||x - proj(x - grad)||_inf of the normalized
/// problem, which is scale-invariant.
inline SimplexQpResult solve_simplex_qp(const Mat& p, const Vec& q, const Vec& x0,
                                        double tol = 1e-10, int max_iters = 200000) {
  const Index n = q.size();
  if (p.rows() != n || p.cols() != n) throw DimensionMismatch("simplex qp: shape mismatch");
  if (x0.size() != n) throw DimensionMismatch("simplex qp: bad start point");

  const double scale = std::max({p.cwiseAbs().maxCoeff(), q.cwiseAbs().maxCoeff(), 1.0});
  const Mat ps = p / scale;
  const Vec qs = q / scale;

  double lipschitz = 1e-12;
  if (n > 0) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(ps);
    if (eig.info() == Eigen::Success)
      lipschitz = std::max(lipschitz, eig.eigenvalues().cwiseAbs().maxCoeff());
  }
  const double step = 1.0 / lipschitz;

  SimplexQpResult out;
  out.x = project_to_simplex(x0);
  auto residual = [&](const Vec& x) {
    const Vec grad = ps * x + qs;
    return (x - project_to_simplex(x - grad)).cwiseAbs().maxCoeff();
  };
  for (out.iterations = 0; out.iterations < max_iters; ++out.iterations) {
    out.kkt_residual = residual(out.x);
    if (out.kkt_residual <= tol) return out;
    const Vec grad = ps * out.x + qs;
    out.x = project_to_simplex(out.x - step * grad);
  }
  out.kkt_residual = residual(out.x);
  if (out.kkt_residual > tol)
    throw QpIterationLimit("simplex qp: residual " + std::to_string(out.kkt_residual) +
                           " after " + std::to_string(max_iters) + " iterations");
  return out;
}

}  // namespace hmvc
