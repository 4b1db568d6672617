#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "slrma/container.hpp"
#include "slrma/entropy.hpp"
#include "slrma/quantize.hpp"
#include "slrma/solver.hpp"
#include "slrma/transforms.hpp"

namespace slrma {

/// Settings shared by both pipelines. Exactly one of gamma / target_pb
/// drives sparsity; with neither set the solve runs at γ = 0.
struct CodecParams {
  Index k = 1;
  std::optional<double> gamma;
  std::optional<double> target_pb;
  double tol_pb = 0.01;
  double step_b = 1e-2;
  double step_c = 1.0;
  std::optional<SolverConfig> solver;  // hyperparameters; pipeline defaults when unset
};

struct ImageCodecParams : CodecParams {
  TransformKind transform = TransformKind::Dct2d;
  int levels = 0;  // Haar depth for Dwt2d
};

struct SolveOutcome {
  Factorization factorization;
  std::vector<SparsityProbe> probes;
};

inline SolveOutcome solve_with(const Matrix& z, const CodecParams& p, const SolverConfig& defaults) {
  if (p.gamma && p.target_pb) fail(Errc::InvalidArgument, "give either gamma or a target p_B, not both");
  SolverConfig cfg = p.solver.value_or(defaults);
  cfg.k = p.k;
  SolveOutcome out;
  if (p.target_pb) {
    SparsitySearch search = gamma_for_sparsity(z, cfg, *p.target_pb, p.tol_pb);
    out.factorization = std::move(search.result);
    out.probes = std::move(search.probes);
  } else {
    cfg.gamma = p.gamma.value_or(0.0);
    out.factorization = slrma_solve(z, cfg);
  }
  return out;
}

/// Frobenius bound on ‖B̂Ĉ − BC‖ (equivalently on the reconstruction, since
/// the transform is an isometry) from uniform quantization of both factors:
///   e_B = (s_B/2)√nnz(B),  e_C = (s_C/2)√(k·n),
///   ‖E_B C + B̂ E_C‖ ≤ e_B‖C‖ + (1 + e_B)e_C   using ‖B‖₂ = 1.
inline double quantization_error_bound(Index nnz_b, double c_norm, Index k, Index n, double step_b, double step_c) {
  const double e_b = 0.5 * step_b * std::sqrt(static_cast<double>(nnz_b));
  const double e_c = 0.5 * step_c * std::sqrt(static_cast<double>(k * n));
  return e_b * c_norm + (1.0 + e_b) * e_c;
}

inline double quantization_error_bound(const Factorization& f, double step_b, double step_c) {
  return quantization_error_bound(f.b.size() - count_zeros(f.b), f.c.norm(), f.b.cols(), f.c.cols(), step_b, step_c);
}

namespace detail {

inline std::uint32_t checked_u32(Index v, const char* what) {
  if (v < 0 || v > static_cast<Index>(UINT32_MAX)) fail(Errc::SizeOverflow, std::string(what) + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

inline std::vector<std::uint8_t> code_factor(const Matrix& m, double step) { return entropy_encode(quantize(m, step)); }

inline Matrix decode_factor(const std::vector<std::uint8_t>& stream, Index rows, Index cols, double step) {
  return dequantize(entropy_decode(stream, rows, cols, step));
}

}  // namespace detail

// ---- image sets ---------------------------------------------------------

inline OrthogonalTransform image_transform(TransformKind kind, int levels, Index w, Index h) {
  switch (kind) {
    case TransformKind::Dct2d: return dct2d(w, h);
    case TransformKind::Dwt2d: return dwt2d(w, h, levels);
    case TransformKind::Identity: return identity_transform(w * h);
    default: fail(Errc::InvalidArgument, "transform " + transform_name(kind, levels) + " is not available for image sets");
  }
}

/// Serializes already-solved factors: B is m×k in the transform domain,
/// C is k×n.
inline std::vector<std::uint8_t> encode_image_factors(const Matrix& b, const Matrix& c, const OrthogonalTransform& phi,
                                                      double step_b, double step_c) {
  if (b.rows() != phi.dimension() || b.cols() != c.rows()) fail(Errc::ShapeMismatch, "factor shapes disagree");
  Container out;
  ContainerHeader& h = out.header;
  h.pipeline = Pipeline::ImageSet;
  h.transform = phi.kind;
  h.levels = static_cast<std::uint8_t>(phi.levels);
  // Identity carries no image shape of its own; record it as one row.
  const bool flat = phi.kind == TransformKind::Identity;
  h.width = detail::checked_u32(flat ? phi.dimension() : phi.width, "width");
  h.height = detail::checked_u32(flat ? 1 : phi.height, "height");
  h.m = detail::checked_u32(b.rows(), "m");
  h.n = detail::checked_u32(c.cols(), "n");
  h.k = detail::checked_u32(b.cols(), "k");
  h.step_b = step_b;
  h.step_c = step_c;
  out.streams.push_back(detail::code_factor(b, step_b));
  out.streams.push_back(detail::code_factor(c, step_c));
  return write_container(out);
}

struct ImageEncoding {
  std::vector<std::uint8_t> bytes;
  Factorization factorization;
  std::vector<SparsityProbe> probes;
};

/// X is (w·h)×n, one column-major vectorized frame per column.
inline ImageEncoding compress_image_set(const Matrix& x, Index w, Index h, const ImageCodecParams& p,
                                        const OrthogonalTransform* phi_cache = nullptr) {
  if (w < 1 || h < 1 || x.rows() != w * h) fail(Errc::ShapeMismatch, "image matrix rows must equal w·h");
  const OrthogonalTransform phi_local = phi_cache ? OrthogonalTransform{} : image_transform(p.transform, p.levels, w, h);
  const OrthogonalTransform& phi = phi_cache ? *phi_cache : phi_local;
  SolveOutcome solved = solve_with(phi.analyze(x), p, SolverConfig::image_defaults(p.k));
  ImageEncoding out;
  out.bytes = encode_image_factors(solved.factorization.b, solved.factorization.c, phi, p.step_b, p.step_c);
  out.factorization = std::move(solved.factorization);
  out.probes = std::move(solved.probes);
  return out;
}

struct DecodedImages {
  Matrix x;  // (w·h)×n
  Index width = 0;
  Index height = 0;
};

inline DecodedImages decompress_image_set(std::span<const std::uint8_t> bytes) {
  const Container c = read_container(bytes);
  const ContainerHeader& h = c.header;
  if (h.pipeline != Pipeline::ImageSet) fail(Errc::FormatError, "container holds a mesh sequence");
  if (static_cast<std::uint64_t>(h.width) * h.height != h.m) fail(Errc::FormatError, "w·h does not match m");
  if (h.k < 1 || h.k > h.m || h.n < 1) fail(Errc::FormatError, "invalid factor dimensions");
  const OrthogonalTransform phi = image_transform(h.transform, h.levels, h.width, h.height);
  const Matrix b = detail::decode_factor(c.streams[0], h.m, h.k, h.step_b);
  const Matrix coeff = detail::decode_factor(c.streams[1], h.k, h.n, h.step_c);
  DecodedImages out;
  out.x = phi.synthesize(b * coeff);
  out.width = h.width;
  out.height = h.height;
  return out;
}

// ---- mesh sequences -----------------------------------------------------

/// Per-dimension factors with the coefficient rows already DCT'd:
/// c_dct[d] = U_dctᵀ C_dᵀ (n×k).
struct MeshFactors {
  std::array<Matrix, 3> b;
  std::array<Matrix, 3> c_dct;
};

inline MeshFactors to_mesh_factors(const std::array<Factorization, 3>& f) {
  MeshFactors out;
  const OrthogonalTransform u = dct1d(f[0].c.cols());
  for (int d = 0; d < 3; ++d) {
    out.b[d] = f[d].b;
    out.c_dct[d] = u.analyze(f[d].c.transpose());
  }
  return out;
}

inline std::vector<std::uint8_t> encode_mesh_factors(const MeshFactors& fac, std::uint64_t digest, double step_b,
                                                     double step_c) {
  const Index m = fac.b[0].rows();
  const Index k = fac.b[0].cols();
  const Index n = fac.c_dct[0].rows();
  for (int d = 0; d < 3; ++d) {
    if (fac.b[d].rows() != m || fac.b[d].cols() != k || fac.c_dct[d].rows() != n || fac.c_dct[d].cols() != k)
      fail(Errc::ShapeMismatch, "mesh factor shapes disagree across dimensions");
  }
  Container out;
  ContainerHeader& h = out.header;
  h.pipeline = Pipeline::Mesh;
  h.transform = TransformKind::Graph;
  h.m = detail::checked_u32(m, "m");
  h.n = detail::checked_u32(n, "n");
  h.k = detail::checked_u32(k, "k");
  h.step_b = step_b;
  h.step_c = step_c;
  h.connectivity_digest = digest;
  for (int d = 0; d < 3; ++d) {
    out.streams.push_back(detail::code_factor(fac.b[d], step_b));
    out.streams.push_back(detail::code_factor(fac.c_dct[d], step_c));
  }
  return write_container(out);
}

struct MeshEncoding {
  std::vector<std::uint8_t> bytes;
  std::array<Factorization, 3> factorizations;
  std::array<std::vector<SparsityProbe>, 3> probes;
};

/// Graph transform and digest for a face list; built once per mesh.
struct MeshBasis {
  GraphSpec graph;
  OrthogonalTransform gt;
  std::uint64_t digest = 0;
};

inline MeshBasis mesh_basis(const std::vector<Face>& faces, Index m) {
  MeshBasis out;
  out.graph = mesh_adjacency(faces, m);
  out.gt = graph_transform(out.graph);
  out.digest = connectivity_digest(out.graph);
  return out;
}

inline MeshEncoding compress_mesh_seq(const MeshCoords& x, const MeshBasis& basis, const CodecParams& p) {
  const Index m = x[0].rows();
  const Index n = x[0].cols();
  for (const Matrix& xd : x)
    if (xd.rows() != m || xd.cols() != n) fail(Errc::ShapeMismatch, "coordinate matrices differ in shape");
  if (basis.gt.dimension() != m) fail(Errc::ShapeMismatch, "mesh vertex count does not match connectivity");

  MeshEncoding out;
  for (int d = 0; d < 3; ++d) {
    SolveOutcome solved = solve_with(basis.gt.analyze(x[d]), p, SolverConfig::mesh_defaults(p.k));
    out.factorizations[d] = std::move(solved.factorization);
    out.probes[d] = std::move(solved.probes);
  }
  out.bytes = encode_mesh_factors(to_mesh_factors(out.factorizations), basis.digest, p.step_b, p.step_c);
  return out;
}

inline MeshEncoding compress_mesh_seq(const MeshCoords& x, const std::vector<Face>& faces, const CodecParams& p) {
  return compress_mesh_seq(x, mesh_basis(faces, x[0].rows()), p);
}

inline MeshCoords decompress_mesh_seq(std::span<const std::uint8_t> bytes, const MeshBasis& basis) {
  const Container c = read_container(bytes);
  const ContainerHeader& h = c.header;
  if (h.pipeline != Pipeline::Mesh) fail(Errc::FormatError, "container holds an image set");
  if (h.transform != TransformKind::Graph) fail(Errc::FormatError, "mesh container must use the graph transform");
  if (h.k < 1 || h.k > h.m || h.n < 1) fail(Errc::FormatError, "invalid factor dimensions");
  if (basis.gt.dimension() != static_cast<Index>(h.m)) fail(Errc::DigestMismatch, "vertex count differs from container");
  if (basis.digest != h.connectivity_digest) fail(Errc::DigestMismatch, "connectivity digest mismatch");

  const OrthogonalTransform u = dct1d(h.n);
  MeshCoords out;
  for (int d = 0; d < 3; ++d) {
    const Matrix b = detail::decode_factor(c.streams[static_cast<size_t>(2 * d)], h.m, h.k, h.step_b);
    const Matrix c_dct = detail::decode_factor(c.streams[static_cast<size_t>(2 * d + 1)], h.n, h.k, h.step_c);
    const Matrix coeff = u.synthesize(c_dct).transpose();
    out[d] = basis.gt.synthesize(b * coeff);
  }
  return out;
}

inline MeshCoords decompress_mesh_seq(std::span<const std::uint8_t> bytes, const std::vector<Face>& faces) {
  const ContainerHeader h = read_container_header(bytes);
  if (h.pipeline != Pipeline::Mesh) fail(Errc::FormatError, "container holds an image set");
  for (const Face& f : faces)
    for (Index v : f)
      if (v < 0 || v >= static_cast<Index>(h.m)) fail(Errc::DigestMismatch, "faces reference vertices the container does not have");
  return decompress_mesh_seq(bytes, mesh_basis(faces, h.m));
}

/// Root-sum-of-squares of the per-dimension bounds, i.e. a Frobenius bound
/// on the stacked 3m×n error.
inline double mesh_quantization_error_bound(const std::array<Factorization, 3>& f, double step_b, double step_c) {
  double sum = 0.0;
  for (const auto& fd : f) sum += std::pow(quantization_error_bound(fd, step_b, step_c), 2);
  return std::sqrt(sum);
}

}  // namespace slrma
