#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "slrma/numerics.hpp"
#include "slrma/transforms.hpp"

namespace slrma {

struct LrmaResult {
  Matrix b;                       // m×k, orthonormal columns
  Matrix c;                       // k×n
  double discarded_energy = 0.0;  // Σ_{i>k} σᵢ² = ‖X − BC‖²_F
};

/// Best rank-k approximation X ≈ BC with BᵀB = I: B holds the k leading
/// eigenvectors of XXᵀ (left singular vectors of X) and C = BᵀX.
inline LrmaResult lrma(const Matrix& x, Index k) {
  require_nonempty(x, "lrma input");
  require_finite(x, "lrma input");
  if (k < 1 || k > std::min(x.rows(), x.cols()))
    fail(Errc::RankTooLarge, "k must lie in [1, min(m, n)]");

  const ThinSvd svd = thin_svd(x);
  LrmaResult out;
  out.b = svd.u.leftCols(k);
  out.c = out.b.transpose() * x;
  out.discarded_energy = svd.singular_values.tail(svd.singular_values.size() - k).squaredNorm();
  return out;
}

struct StepwiseResult {
  Matrix b;             // Φ · (thresholded ΦᵀB): densified basis
  Matrix c;             // C from LRMA, unchanged
  Matrix coefficients;  // thresholded ΦᵀB (exact zeros)
  double rmse = 0.0;    // RMSE of X against b·c
};

/// Zeroes the ⌊fraction·size⌋ smallest-magnitude entries of `a`, ranked
/// globally. Equal magnitudes keep the entry that comes first in
/// column-major order.
inline Matrix zero_smallest(const Matrix& a, double fraction) {
  const Index total = a.size();
  const Index count = static_cast<Index>(std::floor(fraction * static_cast<double>(total)));
  std::vector<Index> order(static_cast<size_t>(total));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
    const double ax = std::abs(a.data()[x]);
    const double ay = std::abs(a.data()[y]);
    if (ax != ay) return ax < ay;
    return x > y;
  });
  Matrix out = a;
  for (Index i = 0; i < std::min(count, total); ++i) out.data()[order[static_cast<size_t>(i)]] = 0.0;
  return out;
}

/// Stepwise baseline: LRMA first, then sparsify ΦᵀB by magnitude and
/// transform back.
inline StepwiseResult stepwise_baseline(const Matrix& x, const OrthogonalTransform& phi, Index k, double p_b) {
  if (phi.dimension() != x.rows()) fail(Errc::ShapeMismatch, "transform size does not match data rows");
  if (!(p_b >= 0.0 && p_b <= 1.0)) fail(Errc::InvalidArgument, "p_B must lie in [0, 1]");
  const LrmaResult base = lrma(x, k);

  StepwiseResult out;
  out.coefficients = zero_smallest(phi.analyze(base.b), p_b);
  out.b = phi.synthesize(out.coefficients);
  out.c = base.c;
  out.rmse = (x - out.b * out.c).norm() / std::sqrt(static_cast<double>(x.size()));
  return out;
}

}  // namespace slrma
