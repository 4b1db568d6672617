#pragma once

#include <cmath>
#include <optional>

#include "slrma/matrix.hpp"

namespace slrma {

inline void require_same_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) fail(Errc::ShapeMismatch, "matrices differ in shape");
}

/// √(‖X − X̂‖²_F / (rows·cols)).
inline double rmse(const Matrix& x, const Matrix& xhat) {
  require_same_shape(x, xhat);
  require_nonempty(x, "rmse input");
  return std::sqrt((x - xhat).squaredNorm() / static_cast<double>(x.size()));
}

/// [Xx; Xy; Xz], 3m×n.
inline Matrix stack_coords(const MeshCoords& c) {
  Matrix out(3 * c[0].rows(), c[0].cols());
  for (int d = 0; d < 3; ++d) {
    require_same_shape(c[0], c[d]);
    out.middleRows(d * c[0].rows(), c[0].rows()) = c[d];
  }
  return out;
}

/// RMSE over the stacked 3m×n matrices.
inline double rmse(const MeshCoords& x, const MeshCoords& xhat) { return rmse(stack_coords(x), stack_coords(xhat)); }

/// 20·log10(peak / rmse).
inline double psnr_from_rmse(double e, double peak = 255.0) {
  if (e == 0.0) fail(Errc::InfinitePsnr, "identical inputs have infinite PSNR");
  return 20.0 * std::log10(peak / e);
}

inline double psnr(const Matrix& x, const Matrix& xhat, double peak = 255.0) { return psnr_from_rmse(rmse(x, xhat), peak); }

/// E(X): every vertex replaced by its frame's per-axis mean.
inline MeshCoords frame_centroids(const MeshCoords& x) {
  MeshCoords out;
  for (int d = 0; d < 3; ++d) {
    const Eigen::RowVectorXd mean = x[d].colwise().mean();
    out[d] = mean.replicate(x[d].rows(), 1);
  }
  return out;
}

/// 100·‖X − X̂‖_F / ‖X − E(X)‖_F on the stacked matrices.
inline double kg_error(const MeshCoords& x, const MeshCoords& xhat) {
  const Matrix xs = stack_coords(x);
  const Matrix hs = stack_coords(xhat);
  require_same_shape(xs, hs);
  const double spread = (xs - stack_coords(frame_centroids(x))).norm();
  if (spread == 0.0) fail(Errc::DegenerateSequence, "every frame coincides with its centroid");
  return 100.0 * ((xs - hs).norm() / spread);
}

/// psnr is set for image sets with nonzero error; kg_error for meshes.
struct MetricsReport {
  double rmse = 0.0;
  std::optional<double> psnr;
  bool infinite_psnr = false;
  std::optional<double> kg_error;
  double rate = 0.0;  // bpp or bpfv
  std::uint64_t bits = 0;
};

inline double bits_per_pixel(std::uint64_t bits, Index w, Index h, Index n) {
  return static_cast<double>(bits) / static_cast<double>(w * h * n);
}

inline double bits_per_frame_vertex(std::uint64_t bits, Index m, Index n) {
  return static_cast<double>(bits) / static_cast<double>(m * n);
}

inline MetricsReport measure_images(const Matrix& x, const Matrix& xhat, Index w, Index h, std::uint64_t bits) {
  MetricsReport r;
  r.rmse = rmse(x, xhat);
  if (r.rmse == 0.0)
    r.infinite_psnr = true;
  else
    r.psnr = psnr_from_rmse(r.rmse);
  r.bits = bits;
  r.rate = bits_per_pixel(bits, w, h, x.cols());
  return r;
}

inline MetricsReport measure_mesh(const MeshCoords& x, const MeshCoords& xhat, std::uint64_t bits) {
  MetricsReport r;
  r.rmse = rmse(x, xhat);
  r.kg_error = kg_error(x, xhat);
  r.bits = bits;
  r.rate = bits_per_frame_vertex(bits, x[0].rows(), x[0].cols());
  return r;
}

}  // namespace slrma
