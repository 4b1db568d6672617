#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slrma/transforms.hpp"

namespace slrma {

inline constexpr std::uint8_t kContainerVersion = 1;
inline constexpr char kContainerMagic[4] = {'S', 'L', 'R', 'M'};

enum class Pipeline : std::uint8_t { ImageSet = 0, Mesh = 1 };

/// Fixed-layout header; see docs/container_format.md for the byte map.
struct ContainerHeader {
  Pipeline pipeline = Pipeline::ImageSet;
  TransformKind transform = TransformKind::Identity;
  std::uint8_t levels = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t m = 0;
  std::uint32_t n = 0;
  std::uint32_t k = 0;
  double step_b = 0.0;
  double step_c = 0.0;
  std::uint64_t connectivity_digest = 0;  // mesh pipeline only

  bool operator==(const ContainerHeader&) const = default;
};

struct Container {
  ContainerHeader header;
  std::vector<std::vector<std::uint8_t>> streams;
};

/// FNV-1a over the sorted edge list, each endpoint as u32 little-endian.
inline std::uint64_t connectivity_digest(const GraphSpec& g) {
  std::vector<Edge> edges = g.edges;
  for (auto& e : edges)
    if (e.first > e.second) std::swap(e.first, e.second);
  std::sort(edges.begin(), edges.end());
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
      h ^= (v >> (8 * i)) & 0xFFu;
      h *= 0x100000001b3ull;
    }
  };
  for (const auto& [a, b] : edges) {
    mix(static_cast<std::uint32_t>(a));
    mix(static_cast<std::uint32_t>(b));
  }
  return h;
}

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return need(1)[0]; }
  std::uint32_t u32() {
    const auto b = need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[static_cast<size_t>(i)];
    return v;
  }
  std::uint64_t u64() {
    const auto b = need(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<size_t>(i)];
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::span<const std::uint8_t> bytes(size_t n) { return need(n); }
  size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> need(size_t n) {
    if (remaining() < n) fail(Errc::CorruptStream, "container truncated");
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::span<const std::uint8_t> in_;
  size_t pos_ = 0;
};

inline void check_header(const ContainerHeader& h) {
  if (h.pipeline != Pipeline::ImageSet && h.pipeline != Pipeline::Mesh)
    fail(Errc::FormatError, "unknown pipeline tag");
  if (static_cast<std::uint8_t>(h.transform) > static_cast<std::uint8_t>(TransformKind::Graph))
    fail(Errc::FormatError, "unknown transform kind");
  if (!(h.step_b > 0.0) || !(h.step_c > 0.0) || !std::isfinite(h.step_b) || !std::isfinite(h.step_c))
    fail(Errc::FormatError, "quantization steps must be positive");
}

inline size_t expected_streams(Pipeline p) { return p == Pipeline::Mesh ? 6 : 2; }

}  // namespace detail

inline std::vector<std::uint8_t> write_container(const Container& c) {
  const ContainerHeader& h = c.header;
  detail::check_header(h);
  if (c.streams.size() != detail::expected_streams(h.pipeline)) fail(Errc::InvalidArgument, "wrong stream count for pipeline");

  detail::ByteWriter w;
  for (char ch : kContainerMagic) w.u8(static_cast<std::uint8_t>(ch));
  w.u8(kContainerVersion);
  w.u8(static_cast<std::uint8_t>(h.pipeline));
  w.u8(static_cast<std::uint8_t>(h.transform));
  w.u8(h.levels);
  w.u32(h.width);
  w.u32(h.height);
  w.u32(h.m);
  w.u32(h.n);
  w.u32(h.k);
  w.f64(h.step_b);
  w.f64(h.step_c);
  if (h.pipeline == Pipeline::Mesh) w.u64(h.connectivity_digest);
  w.u8(static_cast<std::uint8_t>(c.streams.size()));
  for (const auto& s : c.streams) {
    if (s.size() > UINT32_MAX) fail(Errc::SizeOverflow, "stream exceeds 4 GiB");
    w.u32(static_cast<std::uint32_t>(s.size()));
  }
  for (const auto& s : c.streams) w.bytes(s);
  return w.take();
}

/// Parses header and stream table; stream payloads are not decoded here.
inline Container read_container(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) fail(Errc::CorruptStream, "container shorter than its magic");
  if (std::memcmp(bytes.data(), kContainerMagic, 4) != 0) fail(Errc::BadMagic, "not an SLRM container");
  detail::ByteReader r(bytes.subspan(4));
  const std::uint8_t version = r.u8();
  if (version != kContainerVersion) fail(Errc::VersionUnsupported, "container version " + std::to_string(version));

  Container c;
  ContainerHeader& h = c.header;
  h.pipeline = static_cast<Pipeline>(r.u8());
  h.transform = static_cast<TransformKind>(r.u8());
  h.levels = r.u8();
  h.width = r.u32();
  h.height = r.u32();
  h.m = r.u32();
  h.n = r.u32();
  h.k = r.u32();
  h.step_b = r.f64();
  h.step_c = r.f64();
  detail::check_header(h);
  if (h.pipeline == Pipeline::Mesh) h.connectivity_digest = r.u64();

  const std::uint8_t count = r.u8();
  if (count != detail::expected_streams(h.pipeline)) fail(Errc::FormatError, "unexpected stream count");
  std::vector<std::uint32_t> lengths(count);
  for (auto& len : lengths) len = r.u32();
  for (std::uint32_t len : lengths) {
    const auto payload = r.bytes(len);
    c.streams.emplace_back(payload.begin(), payload.end());
  }
  if (r.remaining() != 0) fail(Errc::CorruptStream, "container has trailing bytes");
  return c;
}

/// Header only, for inspection tools.
inline ContainerHeader read_container_header(std::span<const std::uint8_t> bytes) { return read_container(bytes).header; }

}  // namespace slrma
