#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "slrma/quantize.hpp"
#include "slrma/range_coder.hpp"

namespace slrma {

namespace detail {

inline constexpr int kMagnitudeContexts = 16;
inline constexpr int kMaxPrefix = 63;

// All adaptive models for one matrix stream.
struct LevelModels {
  // Significance, keyed by the already-coded left and upper neighbours.
  std::array<BitModel, 4> significance;
  BitModel sign;
  std::array<BitModel, kMagnitudeContexts> prefix;
  std::array<BitModel, kMagnitudeContexts> suffix;
};

inline int significance_context(const std::vector<std::uint8_t>& sig, Index r, Index c, Index cols) {
  const int left = c > 0 ? sig[static_cast<size_t>(r * cols + c - 1)] : 0;
  const int up = r > 0 ? sig[static_cast<size_t>((r - 1) * cols + c)] : 0;
  return left + 2 * up;
}

inline int magnitude_context(int i) { return i < kMagnitudeContexts ? i : kMagnitudeContexts - 1; }

// Order-0 Exp-Golomb of v: prefix of L ones and a terminating zero, then
// the L low bits of v + 1, most significant first.
inline void encode_exp_golomb(RangeEncoder& enc, LevelModels& models, std::uint64_t v) {
  const std::uint64_t value = v + 1;
  const int len = std::bit_width(value) - 1;
  for (int i = 0; i < len; ++i) enc.encode(models.prefix[magnitude_context(i)], 1);
  enc.encode(models.prefix[magnitude_context(len)], 0);
  for (int i = len - 1; i >= 0; --i) enc.encode(models.suffix[magnitude_context(i)], static_cast<int>((value >> i) & 1u));
}

inline std::uint64_t decode_exp_golomb(RangeDecoder& dec, LevelModels& models) {
  int len = 0;
  while (dec.decode(models.prefix[magnitude_context(len)]) == 1) {
    if (++len > kMaxPrefix - 1) fail(Errc::CorruptStream, "Exp-Golomb prefix too long");
  }
  std::uint64_t value = 1;
  for (int i = len - 1; i >= 0; --i)
    value = (value << 1) | static_cast<std::uint64_t>(dec.decode(models.suffix[magnitude_context(i)]));
  return value - 1;
}

}  // namespace detail

/// Significance map, then for each significant entry its sign and
/// Exp-Golomb(|level| − 1), interleaved in row-major scan order.
inline std::vector<std::uint8_t> entropy_encode(const QuantizedSparseMatrix& q) {
  if (static_cast<Index>(q.significance.size()) != q.rows * q.cols)
    fail(Errc::InvalidArgument, "significance map size does not match shape");
  RangeEncoder enc;
  detail::LevelModels models;
  size_t next = 0;
  for (Index r = 0; r < q.rows; ++r) {
    for (Index c = 0; c < q.cols; ++c) {
      const int sig = q.significance[static_cast<size_t>(r * q.cols + c)] ? 1 : 0;
      enc.encode(models.significance[detail::significance_context(q.significance, r, c, q.cols)], sig);
      if (!sig) continue;
      if (next >= q.levels.size()) fail(Errc::InvalidArgument, "fewer levels than significant entries");
      const std::int64_t level = q.levels[next++];
      if (level == 0) fail(Errc::InvalidArgument, "stored level is zero");
      enc.encode(models.sign, level < 0 ? 1 : 0);
      const auto magnitude = static_cast<std::uint64_t>(level < 0 ? -level : level);
      detail::encode_exp_golomb(enc, models, magnitude - 1);
    }
  }
  if (next != q.levels.size()) fail(Errc::InvalidArgument, "more levels than significant entries");
  return enc.finish();
}

inline QuantizedSparseMatrix entropy_decode(std::span<const std::uint8_t> bytes, Index rows, Index cols, double step) {
  if (rows < 0 || cols < 0) fail(Errc::InvalidArgument, "negative shape");
  RangeDecoder dec(bytes);
  detail::LevelModels models;
  QuantizedSparseMatrix q;
  q.rows = rows;
  q.cols = cols;
  q.step = step;
  q.significance.assign(static_cast<size_t>(rows * cols), 0);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const int sig = dec.decode(models.significance[detail::significance_context(q.significance, r, c, cols)]);
      if (!sig) continue;
      q.significance[static_cast<size_t>(r * cols + c)] = 1;
      const bool negative = dec.decode(models.sign) == 1;
      const std::uint64_t magnitude = detail::decode_exp_golomb(dec, models) + 1;
      if (magnitude > static_cast<std::uint64_t>(INT64_MAX)) fail(Errc::CorruptStream, "level out of range");
      const auto level = static_cast<std::int64_t>(magnitude);
      q.levels.push_back(negative ? -level : level);
    }
  }
  dec.expect_end();
  return q;
}

}  // namespace slrma
