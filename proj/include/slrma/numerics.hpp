#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "slrma/matrix.hpp"

namespace slrma {

struct SymEig {
  Vector eigenvalues;   // descending
  Matrix eigenvectors;  // column i pairs with eigenvalues(i)
};

struct ThinSvd {
  Matrix u;                // m x r, orthonormal columns
  Vector singular_values;  // r = min(m, n), descending, >= 0
  Matrix v;                // n x r, orthonormal columns
};

namespace detail {

// Flip column j of `a` (and of `partner`, if given) so that its first
// nonzero entry is positive.
inline void fix_column_signs(Matrix& a, Matrix* partner = nullptr) {
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      const double x = a(i, j);
      if (std::abs(x) > 1e-12) {
        if (x < 0.0) {
          a.col(j) = -a.col(j);
          if (partner != nullptr) partner->col(j) = -partner->col(j);
        }
        break;
      }
    }
  }
}

// One-sided (Hestenes) Jacobi SVD for a tall matrix (rows >= cols).
inline ThinSvd jacobi_svd_tall(const Matrix& a) {
  const Index m = a.rows();
  const Index n = a.cols();
  Matrix w = a;
  Matrix v = Matrix::Identity(n, n);
  // Rounding in an m-term dot product is about m·ε; asking for less never terminates.
  const double tol = std::numeric_limits<double>::epsilon() * static_cast<double>(std::max<Index>(m, 8));
  constexpr int kMaxSweeps = 80;

  // Columns below this squared norm are roundoff next to the largest one;
  // they cannot be made orthogonal to relative precision, so leave them.
  double largest = 0.0;
  for (Index j = 0; j < n; ++j) largest = std::max(largest, w.col(j).squaredNorm());
  const double negligible_sq = largest * tol * tol;

  bool rotated = true;
  int sweep = 0;
  for (; rotated && sweep < kMaxSweeps; ++sweep) {
    rotated = false;
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double alpha = w.col(p).squaredNorm();
        const double beta = w.col(q).squaredNorm();
        if (std::min(alpha, beta) <= negligible_sq) continue;
        const double gamma = w.col(p).dot(w.col(q));
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha) * std::sqrt(beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Index i = 0; i < m; ++i) {
          const double wp = w(i, p);
          const double wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
        for (Index i = 0; i < n; ++i) {
          const double vp = v(i, p);
          const double vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
  }
  if (rotated) fail(Errc::NoConvergence, "one-sided Jacobi SVD exceeded sweep cap");

  Vector sigma(n);
  for (Index j = 0; j < n; ++j) sigma(j) = w.col(j).norm();

  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return sigma(x) > sigma(y); });

  ThinSvd out;
  out.u = Matrix::Zero(m, n);
  out.v = Matrix::Zero(n, n);
  out.singular_values = Vector::Zero(n);
  const double smax = n > 0 ? sigma(order[0]) : 0.0;
  const double negligible = std::max(smax * static_cast<double>(std::max(m, n)) * std::numeric_limits<double>::epsilon(),
                                     2.0 * std::sqrt(negligible_sq));

  std::vector<Index> deficient;
  for (Index j = 0; j < n; ++j) {
    const Index src = order[static_cast<size_t>(j)];
    out.singular_values(j) = sigma(src);
    out.v.col(j) = v.col(src);
    if (sigma(src) > negligible && sigma(src) > 0.0) {
      out.u.col(j) = w.col(src) / sigma(src);
    } else {
      deficient.push_back(j);
    }
  }

  // Complete U with standard basis directions orthogonal to what we have.
  Index probe = 0;
  for (Index j : deficient) {
    for (; probe < m; ++probe) {
      Vector e = Vector::Unit(m, probe);
      for (int pass = 0; pass < 2; ++pass) {
        for (Index c = 0; c < n; ++c) {
          if (c == j) continue;
          e -= out.u.col(c).dot(e) * out.u.col(c);
        }
      }
      const double len = e.norm();
      if (len > 0.5) {
        out.u.col(j) = e / len;
        ++probe;
        break;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Symmetric eigendecomposition, eigenvalues sorted descending. Each
/// eigenvector is signed so that its first nonzero entry is positive.
inline SymEig sym_eig(const Matrix& a) {
  if (a.rows() != a.cols()) fail(Errc::NonSymmetric, "matrix is not square");
  require_finite(a, "sym_eig input");
  const double scale = max_abs(a);
  if (max_abs(a - a.transpose()) > 1e-10 * scale) fail(Errc::NonSymmetric, "‖A − Aᵀ‖∞ exceeds 1e-10·‖A‖∞");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success) fail(Errc::NoConvergence, "symmetric eigensolver did not converge");

  // Stable descending order, so tied eigenvalues keep the solver's order.
  const Vector& values = solver.eigenvalues();
  std::vector<Index> order(static_cast<size_t>(values.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return values(x) > values(y); });
  SymEig out;
  out.eigenvalues.resize(values.size());
  out.eigenvectors.resize(a.rows(), a.cols());
  for (Index i = 0; i < values.size(); ++i) {
    out.eigenvalues(i) = values(order[static_cast<size_t>(i)]);
    out.eigenvectors.col(i) = solver.eigenvectors().col(order[static_cast<size_t>(i)]);
  }
  detail::fix_column_signs(out.eigenvectors);
  return out;
}

/// Thin SVD A = U·diag(σ)·Vᵀ with r = min(m, n) and σ descending. Columns of
/// U are signed so that their first nonzero entry is positive.
inline ThinSvd thin_svd(const Matrix& a) {
  require_nonempty(a, "thin_svd input");
  require_finite(a, "thin_svd input");
  ThinSvd out;
  if (a.rows() >= a.cols()) {
    out = detail::jacobi_svd_tall(a);
  } else {
    ThinSvd t = detail::jacobi_svd_tall(a.transpose());
    out.u = std::move(t.v);
    out.v = std::move(t.u);
    out.singular_values = std::move(t.singular_values);
  }
  detail::fix_column_signs(out.u, &out.v);
  return out;
}

inline constexpr std::int64_t kDefaultKroneckerBudget = std::int64_t{1} << 26;

/// A ⊗ B: block (i, j) of the result is a(i, j)·B.
inline Matrix kronecker(const Matrix& a, const Matrix& b, std::int64_t max_elements = kDefaultKroneckerBudget) {
  require_nonempty(a, "kronecker lhs");
  require_nonempty(b, "kronecker rhs");
  const double elems = static_cast<double>(a.rows()) * static_cast<double>(b.rows()) *
                       static_cast<double>(a.cols()) * static_cast<double>(b.cols());
  if (elems > static_cast<double>(max_elements)) fail(Errc::SizeOverflow, "Kronecker product exceeds element budget");

  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Solves (2ρI − 2ZZᵀ)W = M repeatedly for one Z without forming the m×m
/// system: with Z = UΣVᵀ,
///   W = M/(2ρ) + U[diag(1/(2ρ − 2σᵢ²)) − I/(2ρ)]UᵀM.
/// The SVD of Z is computed once on construction. For small ρ the closed
/// form loses digits (‖W‖ ≫ ‖M‖), so one refinement step follows with the
/// residual taken in extended precision.
class ShiftedGramSolver {
 public:
  explicit ShiftedGramSolver(const Matrix& z) : rows_(z.rows()), z_(z.cast<long double>()), svd_(thin_svd(z)) {
    sigma_sq_ = svd_.singular_values.array().square();
  }

  Index rows() const { return rows_; }
  const ThinSvd& svd() const { return svd_; }

  // Relative distance from 2ρ to the nearest 2σᵢ².
  double min_relative_gap(double rho) const {
    double gap = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < sigma_sq_.size(); ++i) {
      const double denom = std::max(2.0 * rho, 2.0 * sigma_sq_(i));
      gap = std::min(gap, std::abs(2.0 * rho - 2.0 * sigma_sq_(i)) / denom);
    }
    return gap;
  }

  Matrix solve(double rho, const Matrix& m) const {
    if (!(rho > 0.0)) fail(Errc::InvalidArgument, "rho must be positive");
    if (m.rows() != rows_) fail(Errc::ShapeMismatch, "right-hand side row count does not match Z");
    if (min_relative_gap(rho) < 1e-10) fail(Errc::SingularShift, "2ρ coincides with some 2σᵢ²");

    Matrix w = closed_form(rho, m);
    using Wide = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    const Wide wl = w.cast<long double>();
    const long double two_rho = 2.0L * static_cast<long double>(rho);
    const Wide r = m.cast<long double>() - (two_rho * wl - 2.0L * (z_ * (z_.transpose() * wl)));
    w += closed_form(rho, r.cast<double>());
    return w;
  }

 private:
  Matrix closed_form(double rho, const Matrix& m) const {
    const double inv_shift = 1.0 / (2.0 * rho);
    Vector scale(sigma_sq_.size());
    for (Index i = 0; i < sigma_sq_.size(); ++i) scale(i) = 1.0 / (2.0 * rho - 2.0 * sigma_sq_(i)) - inv_shift;
    Matrix proj = svd_.u.transpose() * m;
    proj = scale.asDiagonal() * proj;
    return m * inv_shift + svd_.u * proj;
  }

  Index rows_;
  Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> z_;
  ThinSvd svd_;
  Vector sigma_sq_;
};

inline Matrix solve_shifted_gram(const Matrix& z, double rho, const Matrix& m) {
  return ShiftedGramSolver(z).solve(rho, m);
}

}  // namespace slrma
