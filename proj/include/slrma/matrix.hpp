#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string>

#include "slrma/error.hpp"

namespace slrma {

// Column-major real matrix; carrier for data, factors and transforms.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Per-axis vertex coordinates of a mesh sequence: x, y, z, each m×n.
using MeshCoords = std::array<Matrix, 3>;

// Largest absolute entry (0 for empty matrices).
inline double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

inline bool all_finite(const Matrix& a) { return a.allFinite(); }

inline void require_finite(const Matrix& a, const std::string& what) {
  if (!a.allFinite()) fail(Errc::InvalidArgument, what + " contains NaN or Inf");
}

inline void require_nonempty(const Matrix& a, const std::string& what) {
  if (a.rows() == 0 || a.cols() == 0) fail(Errc::InvalidArgument, what + " is empty");
}

// ‖AᵀA − I‖∞ (entrywise max).
inline double orthonormality_error(const Matrix& a) {
  return max_abs(a.transpose() * a - Matrix::Identity(a.cols(), a.cols()));
}

inline Index count_zeros(const Matrix& a) { return (a.array() == 0.0).count(); }

}  // namespace slrma
