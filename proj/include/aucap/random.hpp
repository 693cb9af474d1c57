#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace aucap {

using Rng = std::mt19937_64;

/// Uniform in [0, 1) from the top 53 bits of one draw. Unlike the standard
/// distributions this is identical across standard-library implementations.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Standard normal via Box-Muller.
double standard_normal(Rng& rng);

Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi, Rng& rng);
Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng);

/// Glorot-uniform limit sqrt(6 / (fan_in + fan_out)).
Eigen::MatrixXd glorot_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Square orthogonal matrix from the QR factorization of a Gaussian matrix.
Eigen::MatrixXd orthogonal(Eigen::Index n, Rng& rng);

/// Fisher-Yates with uniform01; reproducible across platforms.
template <typename Vec>
void shuffle(Vec& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(v[i - 1], v[std::min(j, i - 1)]);
  }
}

}  // namespace aucap
