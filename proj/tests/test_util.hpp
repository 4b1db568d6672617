#pragma once

#include <random>

#include <Eigen/QR>

#include "slrma/matrix.hpp"

namespace slrma::testing {

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

inline Matrix random_symmetric(Index n, std::mt19937_64& rng) {
  const Matrix a = random_matrix(n, n, rng);
  return 0.5 * (a + a.transpose());
}

// Columns of a Householder Q: orthonormal rows×cols.
inline Matrix random_orthonormal(Index rows, Index cols, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(rows, rows, rng));
  return Matrix(qr.householderQ()).leftCols(cols);
}

inline Matrix low_rank_plus_noise(Index m, Index n, Index rank, double noise, std::mt19937_64& rng) {
  return random_matrix(m, rank, rng) * random_matrix(rank, n, rng) * 3.0 + noise * random_matrix(m, n, rng);
}

}  // namespace slrma::testing
