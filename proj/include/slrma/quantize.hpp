#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "slrma/matrix.hpp"

namespace slrma {

/// Uniformly quantized matrix. Significance and levels are laid out in
/// row-major scan order; only significant entries carry a level.
struct QuantizedSparseMatrix {
  Index rows = 0;
  Index cols = 0;
  double step = 1.0;
  std::vector<std::uint8_t> significance;  // rows*cols flags, 1 = nonzero
  std::vector<std::int64_t> levels;        // one per set flag, never 0

  Index nonzeros() const { return static_cast<Index>(levels.size()); }
  bool operator==(const QuantizedSparseMatrix&) const = default;
};

// Level magnitudes beyond this would not survive the Exp-Golomb binarization.
inline constexpr double kMaxLevelMagnitude = 4.0e18;

/// level = round_half_away_from_zero(v / step).
inline QuantizedSparseMatrix quantize(const Matrix& m, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) fail(Errc::InvalidArgument, "quantization step must be positive");
  require_finite(m, "quantizer input");
  QuantizedSparseMatrix q;
  q.rows = m.rows();
  q.cols = m.cols();
  q.step = step;
  q.significance.assign(static_cast<size_t>(m.size()), 0);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      const double scaled = std::round(m(r, c) / step);
      if (std::abs(scaled) > kMaxLevelMagnitude) fail(Errc::InvalidArgument, "quantization step too small for value range");
      if (scaled == 0.0) continue;
      q.significance[static_cast<size_t>(r * m.cols() + c)] = 1;
      q.levels.push_back(static_cast<std::int64_t>(scaled));
    }
  }
  return q;
}

inline Matrix dequantize(const QuantizedSparseMatrix& q) {
  if (static_cast<Index>(q.significance.size()) != q.rows * q.cols)
    fail(Errc::InvalidArgument, "significance map size does not match shape");
  Matrix out = Matrix::Zero(q.rows, q.cols);
  size_t next = 0;
  for (Index r = 0; r < q.rows; ++r) {
    for (Index c = 0; c < q.cols; ++c) {
      if (!q.significance[static_cast<size_t>(r * q.cols + c)]) continue;
      if (next >= q.levels.size()) fail(Errc::InvalidArgument, "fewer levels than significant entries");
      out(r, c) = static_cast<double>(q.levels[next++]) * q.step;
    }
  }
  if (next != q.levels.size()) fail(Errc::InvalidArgument, "more levels than significant entries");
  return out;
}

}  // namespace slrma
