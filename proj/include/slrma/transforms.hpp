#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "slrma/numerics.hpp"

namespace slrma {

// Numeric values are part of the container format.
enum class TransformKind : std::uint8_t {
  Identity = 0,
  Dct1d = 1,
  Dwt1d = 2,
  Dct2d = 3,
  Dwt2d = 4,
  Graph = 5,
};

inline std::string transform_name(TransformKind kind, int levels) {
  switch (kind) {
    case TransformKind::Identity: return "identity";
    case TransformKind::Dct1d: return "dct1d";
    case TransformKind::Dwt1d: return "dwt1d:" + std::to_string(levels);
    case TransformKind::Dct2d: return "dct";
    case TransformKind::Dwt2d: return "dwt:" + std::to_string(levels);
    case TransformKind::Graph: return "gt";
  }
  return "unknown";
}

/// An m×m orthonormal matrix Φ (columns are basis vectors) plus the
/// parameters it was built from. Analysis is Φᵀx, synthesis Φc.
struct OrthogonalTransform {
  Matrix matrix;
  TransformKind kind = TransformKind::Identity;
  int levels = 0;      // Haar depth for Dwt1d/Dwt2d
  Index width = 0;     // 2D kinds: image width (columns)
  Index height = 0;    // 2D kinds: image height (rows)
  Vector spectrum;     // Graph: Laplacian eigenvalues, ascending

  Index dimension() const { return matrix.rows(); }
  Matrix analyze(const Matrix& x) const { return matrix.transpose() * x; }
  Matrix synthesize(const Matrix& c) const { return matrix * c; }
};

inline OrthogonalTransform identity_transform(Index m) {
  if (m < 1) fail(Errc::InvalidArgument, "transform size must be positive");
  OrthogonalTransform t;
  t.matrix = Matrix::Identity(m, m);
  t.kind = TransformKind::Identity;
  return t;
}

/// Orthonormal DCT-II; column j is the frequency-j basis vector.
inline OrthogonalTransform dct1d(Index m) {
  if (m < 1) fail(Errc::InvalidArgument, "transform size must be positive");
  OrthogonalTransform t;
  t.kind = TransformKind::Dct1d;
  t.matrix.resize(m, m);
  const double md = static_cast<double>(m);
  for (Index j = 0; j < m; ++j) {
    const double a = j == 0 ? std::sqrt(1.0 / md) : std::sqrt(2.0 / md);
    for (Index i = 0; i < m; ++i)
      t.matrix(i, j) = a * std::cos(std::numbers::pi * (2.0 * static_cast<double>(i) + 1.0) *
                                    static_cast<double>(j) / (2.0 * md));
  }
  return t;
}

/// Multi-level orthonormal Haar synthesis matrix. Coefficient order in Φᵀx:
/// coarsest scaling band first, then detail bands from coarse to fine.
inline OrthogonalTransform haar1d(Index m, int levels) {
  if (m < 1 || levels < 1) fail(Errc::BadLevels, "size and levels must be positive");
  if (levels >= 63 || m % (Index{1} << levels) != 0)
    fail(Errc::BadLevels, "size " + std::to_string(m) + " not divisible by 2^" + std::to_string(levels));

  // Rows of `analysis` are the basis functions; each level splits the
  // current scaling band into (sums, differences).
  Matrix analysis = Matrix::Identity(m, m);
  const double r = 1.0 / std::sqrt(2.0);
  Index len = m;
  for (int level = 0; level < levels; ++level) {
    const Index half = len / 2;
    Matrix band = analysis.topRows(len);
    for (Index i = 0; i < half; ++i) {
      analysis.row(i) = r * (band.row(2 * i) + band.row(2 * i + 1));
      analysis.row(half + i) = r * (band.row(2 * i) - band.row(2 * i + 1));
    }
    len = half;
  }

  OrthogonalTransform t;
  t.kind = TransformKind::Dwt1d;
  t.levels = levels;
  t.matrix = analysis.transpose();
  return t;
}

/// 2D DCT for h-row × w-col images vectorized column-major (pixel (r, c) at
/// index c·h + r): Φ = Φ_w ⊗ Φ_h.
inline OrthogonalTransform dct2d(Index w, Index h) {
  OrthogonalTransform t;
  t.matrix = kronecker(dct1d(w).matrix, dct1d(h).matrix);
  t.kind = TransformKind::Dct2d;
  t.width = w;
  t.height = h;
  return t;
}

inline OrthogonalTransform dwt2d(Index w, Index h, int levels) {
  OrthogonalTransform t;
  t.matrix = kronecker(haar1d(w, levels).matrix, haar1d(h, levels).matrix);
  t.kind = TransformKind::Dwt2d;
  t.levels = levels;
  t.width = w;
  t.height = h;
  return t;
}

using Face = std::array<Index, 3>;
using Edge = std::pair<Index, Index>;

/// Undirected, unweighted graph on vertices [0, vertex_count).
struct GraphSpec {
  Index vertex_count = 0;
  std::vector<Edge> edges;  // stored with first < second
};

inline bool is_connected(const GraphSpec& g) {
  if (g.vertex_count == 0) return false;
  std::vector<std::vector<Index>> adj(static_cast<size_t>(g.vertex_count));
  for (const auto& [a, b] : g.edges) {
    adj[static_cast<size_t>(a)].push_back(b);
    adj[static_cast<size_t>(b)].push_back(a);
  }
  std::vector<bool> seen(static_cast<size_t>(g.vertex_count), false);
  std::queue<Index> frontier;
  frontier.push(0);
  seen[0] = true;
  Index visited = 1;
  while (!frontier.empty()) {
    const Index v = frontier.front();
    frontier.pop();
    for (Index u : adj[static_cast<size_t>(v)]) {
      if (!seen[static_cast<size_t>(u)]) {
        seen[static_cast<size_t>(u)] = true;
        ++visited;
        frontier.push(u);
      }
    }
  }
  return visited == g.vertex_count;
}

inline void validate(const GraphSpec& g) {
  if (g.vertex_count < 1) fail(Errc::InvalidArgument, "graph has no vertices");
  std::set<Edge> seen;
  for (auto [a, b] : g.edges) {
    if (a < 0 || b < 0 || a >= g.vertex_count || b >= g.vertex_count)
      fail(Errc::IndexOutOfRange, "edge endpoint out of range");
    if (a == b) fail(Errc::InvalidArgument, "self-loop at vertex " + std::to_string(a));
    if (a > b) std::swap(a, b);
    if (!seen.insert({a, b}).second) fail(Errc::InvalidArgument, "duplicate edge");
  }
  if (!is_connected(g)) fail(Errc::Disconnected, "graph is not connected");
}

/// Union of triangle edges, deduplicated and sorted.
inline GraphSpec mesh_adjacency(const std::vector<Face>& faces, Index m) {
  std::set<Edge> edges;
  for (const Face& f : faces) {
    for (Index v : f)
      if (v < 0 || v >= m) fail(Errc::IndexOutOfRange, "face references vertex " + std::to_string(v));
    const Edge candidates[3] = {{f[0], f[1]}, {f[1], f[2]}, {f[0], f[2]}};
    for (auto [a, b] : candidates) {
      if (a == b) continue;
      edges.insert(a < b ? Edge{a, b} : Edge{b, a});
    }
  }
  GraphSpec g;
  g.vertex_count = m;
  g.edges.assign(edges.begin(), edges.end());
  return g;
}

/// Combinatorial Laplacian L = F − E.
inline Matrix laplacian(const GraphSpec& g) {
  Matrix l = Matrix::Zero(g.vertex_count, g.vertex_count);
  for (const auto& [a, b] : g.edges) {
    l(a, b) -= 1.0;
    l(b, a) -= 1.0;
    l(a, a) += 1.0;
    l(b, b) += 1.0;
  }
  return l;
}

/// Graph transform: Laplacian eigenvectors ordered by ascending eigenvalue.
inline OrthogonalTransform graph_transform(const GraphSpec& g) {
  validate(g);
  SymEig eig = sym_eig(laplacian(g));

  OrthogonalTransform t;
  t.kind = TransformKind::Graph;
  const Index m = eig.eigenvalues.size();
  std::vector<Index> order(static_cast<size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return eig.eigenvalues(x) < eig.eigenvalues(y); });
  t.spectrum.resize(m);
  t.matrix.resize(m, m);
  for (Index i = 0; i < m; ++i) {
    t.spectrum(i) = eig.eigenvalues(order[static_cast<size_t>(i)]);
    t.matrix.col(i) = eig.eigenvectors.col(order[static_cast<size_t>(i)]);
  }

  Index zero_modes = 0;
  for (Index i = 0; i < t.spectrum.size(); ++i)
    if (t.spectrum(i) < 1e-9) ++zero_modes;
  if (zero_modes != 1) fail(Errc::Disconnected, "Laplacian has " + std::to_string(zero_modes) + " zero eigenvalues");
  return t;
}

}  // namespace slrma
