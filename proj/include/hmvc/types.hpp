#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <cstdint>
#include <limits>

#include "hmvc/errors.hpp"

namespace hmvc {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Index = Eigen::Index;

/// Normalization applied to a similarity or adjacency matrix.
enum class GraphNorm { symmetric, row_stochastic };

/// Sentinel for the infinity similarity order (the unit-eigenvalue projector).
inline constexpr int kOrderInfinity = std::numeric_limits<int>::max();

/// Sentinel meaning "pick the order from the data type" (3 with graphs, 2 without).
inline constexpr int kOrderAuto = 0;

inline bool all_finite(const Mat& m) { return m.allFinite(); }

inline void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) throw NonNumericEntry(std::string(what) + ": non-finite entry");
}

/// Deterministic 53-bit uniform in [0, 1); avoids the implementation-defined
/// std::uniform_real_distribution so seeded streams are portable.
template <typename Rng>
double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on the portable uniform stream.
template <typename Rng>
double normal_unit(Rng& rng) {
  const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// splitmix64 step; used to derive independent sub-seeds from one master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace hmvc
