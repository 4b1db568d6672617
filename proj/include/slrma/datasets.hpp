#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "slrma/matrix.hpp"
#include "slrma/transforms.hpp"

namespace slrma {

/// 8-bit grayscale frames, one column-major vectorized frame per column.
struct ImageSet {
  Index width = 0;
  Index height = 0;
  Matrix x;  // (width·height)×n, values in [0, 255]

  Index frames() const { return x.cols(); }
};

struct MeshSequence {
  std::vector<Face> faces;
  MeshCoords coords;  // column j of coords[d] is axis d of frame j

  Index vertex_count() const { return coords[0].rows(); }
  Index frames() const { return coords[0].cols(); }
};

// ---- PGM (binary P5, maxval 255) ---------------------------------------

struct GrayImage {
  Index width = 0;
  Index height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, as stored in the file
};

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::FormatError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::FormatError, "cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) fail(Errc::FormatError, "short write to " + path.string());
}

// Reads one whitespace-delimited header token, skipping '#' comments.
inline std::string pgm_token(const std::vector<std::uint8_t>& b, size_t& pos) {
  for (;;) {
    while (pos < b.size() && std::isspace(b[pos])) ++pos;
    if (pos < b.size() && b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  const size_t start = pos;
  while (pos < b.size() && !std::isspace(b[pos])) ++pos;
  if (start == pos) fail(Errc::FormatError, "PGM header truncated");
  return {b.begin() + static_cast<std::ptrdiff_t>(start), b.begin() + static_cast<std::ptrdiff_t>(pos)};
}

inline long parse_count(const std::string& s, const char* what) {
  long v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size() || v < 1) fail(Errc::FormatError, std::string("bad ") + what + ": " + s);
  return v;
}

}  // namespace detail

inline GrayImage parse_pgm(const std::vector<std::uint8_t>& bytes) {
  size_t pos = 0;
  if (detail::pgm_token(bytes, pos) != "P5") fail(Errc::FormatError, "not a binary PGM (P5)");
  GrayImage img;
  img.width = detail::parse_count(detail::pgm_token(bytes, pos), "width");
  img.height = detail::parse_count(detail::pgm_token(bytes, pos), "height");
  if (detail::parse_count(detail::pgm_token(bytes, pos), "maxval") != 255) fail(Errc::FormatError, "PGM maxval must be 255");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) fail(Errc::FormatError, "PGM header not terminated");
  ++pos;
  const size_t count = static_cast<size_t>(img.width * img.height);
  if (bytes.size() - pos != count) fail(Errc::FormatError, "PGM pixel data has the wrong length");
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  return img;
}

inline std::string format_pgm(const GrayImage& img) {
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(img.pixels.begin(), img.pixels.end());
  return out;
}

/// Column j of the set as an 8-bit frame; values are rounded and clamped.
inline GrayImage frame_image(const ImageSet& set, Index j) {
  GrayImage img{set.width, set.height, {}};
  img.pixels.resize(static_cast<size_t>(set.width * set.height));
  for (Index r = 0; r < set.height; ++r)
    for (Index c = 0; c < set.width; ++c) {
      const double v = std::clamp(std::round(set.x(c * set.height + r, j)), 0.0, 255.0);
      img.pixels[static_cast<size_t>(r * set.width + c)] = static_cast<std::uint8_t>(v);
    }
  return img;
}

inline ImageSet image_set_from_frames(const std::vector<GrayImage>& frames) {
  if (frames.empty()) fail(Errc::InvalidArgument, "no frames");
  ImageSet set;
  set.width = frames[0].width;
  set.height = frames[0].height;
  set.x.resize(set.width * set.height, static_cast<Index>(frames.size()));
  for (size_t j = 0; j < frames.size(); ++j) {
    const GrayImage& f = frames[j];
    if (f.width != set.width || f.height != set.height)
      fail(Errc::DimensionMismatch, "frame " + std::to_string(j) + " differs in size");
    for (Index r = 0; r < set.height; ++r)
      for (Index c = 0; c < set.width; ++c)
        set.x(c * set.height + r, static_cast<Index>(j)) = f.pixels[static_cast<size_t>(r * set.width + c)];
  }
  return set;
}

inline ImageSet load_image_set(const std::vector<std::filesystem::path>& paths) {
  std::vector<GrayImage> frames;
  for (const auto& p : paths) {
    try {
      frames.push_back(parse_pgm(detail::read_file(p)));
    } catch (const Error& e) {
      fail(e.code(), p.string() + ": " + e.what());
    }
  }
  return image_set_from_frames(frames);
}

/// Writes frame_0000.pgm, frame_0001.pgm, ... into `dir`; returns the paths.
inline std::vector<std::filesystem::path> save_image_set(const ImageSet& set, const std::filesystem::path& dir,
                                                         const std::string& stem = "frame") {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  for (Index j = 0; j < set.frames(); ++j) {
    char name[64];
    std::snprintf(name, sizeof name, "%s_%04ld.pgm", stem.c_str(), static_cast<long>(j));
    paths.push_back(dir / name);
    detail::write_file(paths.back(), format_pgm(frame_image(set, j)));
  }
  return paths;
}

// ---- OFF (ASCII, triangles) ---------------------------------------------

struct OffMesh {
  Matrix vertices;  // m×3
  std::vector<Face> faces;
};

inline OffMesh parse_off(const std::string& text) {
  // Strip comments, then read tokens.
  std::string clean;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    clean += line.substr(0, line.find('#'));
    clean += '\n';
  }
  std::istringstream in(clean);
  std::string magic;
  if (!(in >> magic) || magic != "OFF") fail(Errc::FormatError, "missing OFF header");
  long nv = 0, nf = 0, ne = 0;
  if (!(in >> nv >> nf >> ne) || nv < 1 || nf < 0) fail(Errc::FormatError, "bad OFF counts");
  OffMesh mesh;
  mesh.vertices.resize(nv, 3);
  for (long i = 0; i < nv; ++i)
    for (int d = 0; d < 3; ++d)
      if (!(in >> mesh.vertices(i, d))) fail(Errc::FormatError, "OFF vertex list truncated");
  for (long i = 0; i < nf; ++i) {
    long arity = 0;
    if (!(in >> arity)) fail(Errc::FormatError, "OFF face list truncated");
    if (arity != 3) fail(Errc::FormatError, "only triangular faces are supported");
    Face f{};
    for (auto& v : f) {
      if (!(in >> v)) fail(Errc::FormatError, "OFF face list truncated");
      if (v < 0 || v >= nv) fail(Errc::FormatError, "OFF face index out of range");
    }
    mesh.faces.push_back(f);
    // Per-face colour or other trailing values are ignored.
    std::string rest;
    std::getline(in, rest);
  }
  if (!mesh.vertices.allFinite()) fail(Errc::FormatError, "OFF vertex is not finite");
  return mesh;
}

inline std::string format_off(const OffMesh& mesh) {
  std::string out = "OFF\n" + std::to_string(mesh.vertices.rows()) + " " + std::to_string(mesh.faces.size()) + " 0\n";
  char buf[128];
  for (Index i = 0; i < mesh.vertices.rows(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", mesh.vertices(i, 0), mesh.vertices(i, 1), mesh.vertices(i, 2));
    out += buf;
  }
  for (const Face& f : mesh.faces) {
    std::snprintf(buf, sizeof buf, "3 %ld %ld %ld\n", static_cast<long>(f[0]), static_cast<long>(f[1]), static_cast<long>(f[2]));
    out += buf;
  }
  return out;
}

inline OffMesh frame_mesh(const MeshSequence& seq, Index j) {
  OffMesh mesh;
  mesh.faces = seq.faces;
  mesh.vertices.resize(seq.vertex_count(), 3);
  for (int d = 0; d < 3; ++d) mesh.vertices.col(d) = seq.coords[d].col(j);
  return mesh;
}

inline MeshSequence mesh_sequence_from_frames(const std::vector<OffMesh>& frames) {
  if (frames.empty()) fail(Errc::InvalidArgument, "no frames");
  MeshSequence seq;
  seq.faces = frames[0].faces;
  const Index m = frames[0].vertices.rows();
  const Index n = static_cast<Index>(frames.size());
  for (auto& c : seq.coords) c.resize(m, n);
  for (Index j = 0; j < n; ++j) {
    const OffMesh& f = frames[static_cast<size_t>(j)];
    if (f.vertices.rows() != m || f.faces != seq.faces)
      fail(Errc::ConnectivityMismatch, "frame " + std::to_string(j) + " has different connectivity");
    for (int d = 0; d < 3; ++d) seq.coords[d].col(j) = f.vertices.col(d);
  }
  return seq;
}

inline MeshSequence load_mesh_sequence(const std::vector<std::filesystem::path>& paths) {
  std::vector<OffMesh> frames;
  for (const auto& p : paths) {
    const auto bytes = detail::read_file(p);
    try {
      frames.push_back(parse_off(std::string(bytes.begin(), bytes.end())));
    } catch (const Error& e) {
      fail(e.code(), p.string() + ": " + e.what());
    }
  }
  return mesh_sequence_from_frames(frames);
}

inline std::vector<std::filesystem::path> save_mesh_sequence(const MeshSequence& seq, const std::filesystem::path& dir,
                                                             const std::string& stem = "frame") {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  for (Index j = 0; j < seq.frames(); ++j) {
    char name[64];
    std::snprintf(name, sizeof name, "%s_%04ld.off", stem.c_str(), static_cast<long>(j));
    paths.push_back(dir / name);
    detail::write_file(paths.back(), format_off(frame_mesh(seq, j)));
  }
  return paths;
}

// ---- synthetic corpora --------------------------------------------------

/// Sum of `rank` separable Gaussian bumps, each with its own sinusoidal
/// brightness over time, plus white noise, clipped to [0, 255]. With
/// noise_sigma = 0 the matrix has rank exactly `rank`.
inline ImageSet synth_image_set(Index w, Index h, Index n, Index rank, double noise_sigma, std::uint64_t seed) {
  if (w < 1 || h < 1 || n < 1) fail(Errc::InvalidArgument, "image set dimensions must be positive");
  if (rank < 1 || rank > std::min(w * h, n)) fail(Errc::InvalidArgument, "rank must lie in [1, min(w·h, n)]");
  if (!(noise_sigma >= 0.0)) fail(Errc::InvalidArgument, "noise sigma must be >= 0");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ImageSet set;
  set.width = w;
  set.height = h;
  set.x = Matrix::Zero(w * h, n);
  const double amplitude = 200.0 / static_cast<double>(rank);
  for (Index i = 0; i < rank; ++i) {
    const double cr = unit(rng) * static_cast<double>(h - 1);
    const double cc = unit(rng) * static_cast<double>(w - 1);
    const double sr = (0.12 + 0.2 * unit(rng)) * static_cast<double>(h);
    const double sc = (0.12 + 0.2 * unit(rng)) * static_cast<double>(w);
    const double phase = 2.0 * std::numbers::pi * unit(rng);
    const double freq = static_cast<double>(i + 1);
    Vector spatial(w * h);
    for (Index c = 0; c < w; ++c)
      for (Index r = 0; r < h; ++r) {
        const double dr = (static_cast<double>(r) - cr) / sr;
        const double dc = (static_cast<double>(c) - cc) / sc;
        spatial(c * h + r) = amplitude * std::exp(-0.5 * dr * dr) * std::exp(-0.5 * dc * dc);
      }
    Vector temporal(n);
    for (Index t = 0; t < n; ++t)
      temporal(t) = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(t) / static_cast<double>(n) + phase);
    set.x += spatial * temporal.transpose();
  }
  if (noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < w * h; ++i) set.x(i, j) = std::clamp(set.x(i, j) + noise(rng), 0.0, 255.0);
  }
  return set;
}

/// Rows × cols vertex grid with rows the largest divisor of m not above √m;
/// each cell split into two triangles. A prime m falls back to a one-row
/// strip of consecutive triangles.
inline std::vector<Face> grid_strip_faces(Index m, Index& rows, Index& cols) {
  rows = 1;
  for (Index d = 1; d * d <= m; ++d)
    if (m % d == 0) rows = d;
  cols = m / rows;
  std::vector<Face> faces;
  if (rows == 1) {
    for (Index i = 0; i + 2 < m; ++i) faces.push_back({i, i + 1, i + 2});
    return faces;
  }
  auto at = [cols](Index r, Index c) { return r * cols + c; };
  for (Index r = 0; r + 1 < rows; ++r)
    for (Index c = 0; c + 1 < cols; ++c) {
      faces.push_back({at(r, c), at(r, c + 1), at(r + 1, c)});
      faces.push_back({at(r, c + 1), at(r + 1, c + 1), at(r + 1, c)});
    }
  return faces;
}

/// Grid strip on the integer lattice (rest position of vertex (r, c) is
/// (c, r, 0)) whose vertices follow a few low-frequency travelling
/// sinusoids on every axis; amplitude is in grid spacings.
inline MeshSequence synth_mesh_seq(Index m, Index n, double amplitude, std::uint64_t seed) {
  if (m < 3 || n < 1) fail(Errc::InvalidArgument, "need at least 3 vertices and 1 frame");
  Index rows = 0, cols = 0;
  MeshSequence seq;
  seq.faces = grid_strip_faces(m, rows, cols);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  constexpr int kTerms = 4;
  for (auto& c : seq.coords) c.resize(m, n);
  for (int d = 0; d < 3; ++d) {
    struct Term { double weight, freq, ku, kv, phase; };
    std::vector<Term> terms;
    for (int t = 0; t < kTerms; ++t)
      terms.push_back({(0.4 + 0.6 * unit(rng)) / (t + 1), static_cast<double>(t + 1), two_pi * unit(rng), two_pi * unit(rng),
                       two_pi * unit(rng)});
    for (Index v = 0; v < m; ++v) {
      const Index r = v / cols;
      const Index c = v % cols;
      const double u = cols > 1 ? static_cast<double>(c) / static_cast<double>(cols - 1) : 0.0;
      const double w = rows > 1 ? static_cast<double>(r) / static_cast<double>(rows - 1) : 0.0;
      const double rest = d == 0 ? static_cast<double>(c) : d == 1 ? static_cast<double>(r) : 0.0;
      for (Index j = 0; j < n; ++j) {
        double offset = 0.0;
        for (const Term& term : terms)
          offset += term.weight *
                    std::sin(two_pi * term.freq * static_cast<double>(j) / static_cast<double>(n) + term.ku * u + term.kv * w + term.phase);
        seq.coords[d](v, j) = rest + amplitude * offset;
      }
    }
  }
  return seq;
}

}  // namespace slrma
