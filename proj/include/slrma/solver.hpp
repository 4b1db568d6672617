#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "slrma/numerics.hpp"
#include "slrma/transforms.hpp"

namespace slrma {

/// Hyperparameters of the sparse low-rank solver. `gamma` weighs the ℓ₀
/// penalty on B; ρ grows geometrically from rho0 by alpha up to rho_max.
struct SolverConfig {
  double gamma = 0.0;
  Index k = 1;
  double rho0 = 1e-4;
  double alpha = 1.05;
  double rho_max = 1e10;
  double tol = 1e-6;
  int max_iters = 1000;
  int objective_window = 10;

  static SolverConfig image_defaults(Index k, double gamma = 0.0) {
    SolverConfig cfg;
    cfg.k = k;
    cfg.gamma = gamma;
    cfg.rho0 = 1e-4;
    cfg.alpha = 1.05;
    cfg.rho_max = 1e10;
    return cfg;
  }

  static SolverConfig mesh_defaults(Index k, double gamma = 0.0) {
    SolverConfig cfg;
    cfg.k = k;
    cfg.gamma = gamma;
    cfg.rho0 = 1e7;
    cfg.alpha = 1.003;
    cfg.rho_max = 1e12;
    return cfg;
  }

  void validate() const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) fail(Errc::InvalidArgument, "gamma must be finite and >= 0");
    if (k < 1) fail(Errc::InvalidArgument, "k must be positive");
    if (!(rho0 > 0.0)) fail(Errc::InvalidArgument, "rho0 must be positive");
    if (!(alpha > 1.0)) fail(Errc::InvalidArgument, "alpha must exceed 1");
    if (!(rho0 <= rho_max)) fail(Errc::InvalidArgument, "rho0 must not exceed rho_max");
    if (!(tol > 0.0)) fail(Errc::InvalidArgument, "tol must be positive");
    if (max_iters < 1) fail(Errc::InvalidArgument, "max_iters must be positive");
    if (objective_window < 1) fail(Errc::InvalidArgument, "objective_window must be positive");
  }
};

/// Iterates of the augmented Lagrangian scheme: B (unconstrained), P (sparse
/// copy), Q (orthonormal copy) and the multipliers for B = P and B = Q.
struct SolverState {
  Matrix b, p, q;
  Matrix y_p, y_q;
  double rho = 0.0;
  int iter = 0;
  std::vector<double> objective_trace;

  /// P = Q = leftmost k columns of I_m, zero multipliers, ρ = rho0.
  static SolverState initial(Index m, const SolverConfig& cfg) {
    SolverState s;
    s.p = Matrix::Identity(m, cfg.k);
    s.q = s.p;
    s.b = s.p;
    s.y_p = Matrix::Zero(m, cfg.k);
    s.y_q = Matrix::Zero(m, cfg.k);
    s.rho = cfg.rho0;
    return s;
  }
};

struct Factorization {
  Matrix b;  // m×k, sparse, orthonormal columns
  Matrix c;  // k×n
  double p_b_achieved = 0.0;
  int iterations = 0;
  bool converged = false;
  double final_objective = 0.0;
  double gamma = 0.0;
  std::vector<double> objective_trace;
};

/// −‖ZᵀB‖²_F + γ·#{b ≠ 0}.
inline double objective(const Matrix& z, const Matrix& b, double gamma) {
  if (z.rows() != b.rows()) fail(Errc::ShapeMismatch, "Z and B row counts differ");
  const double fit = (z.transpose() * b).squaredNorm();
  const double nnz = static_cast<double>(b.size() - count_zeros(b));
  return -fit + gamma * nnz;
}

/// ρ(P + Q) − Y_P − Y_Q, the right-hand side of the B-subproblem.
inline Matrix b_update_rhs(const SolverState& s) { return s.rho * (s.p + s.q) - s.y_p - s.y_q; }

/// B = (2ρI − 2ZZᵀ)⁻¹(ρ(P + Q) − Y_P − Y_Q).
inline Matrix update_B(const SolverState& s, const ShiftedGramSolver& gram) { return gram.solve(s.rho, b_update_rhs(s)); }

inline Matrix update_B(const SolverState& s, const Matrix& z) { return update_B(s, ShiftedGramSolver(z)); }

/// Keeps entries with |x| > tau, zeroes the rest.
inline Matrix hard_threshold(const Matrix& x, double tau) {
  return x.unaryExpr([tau](double v) { return std::abs(v) > tau ? v : 0.0; });
}

/// Entrywise minimizer of γ·1(p ≠ 0) + (ρ/2)(p − b̃)² with B̃ = B + Y_P/ρ.
inline Matrix update_P(const SolverState& s, const SolverConfig& cfg) {
  if (!(s.rho > 0.0)) fail(Errc::InvalidArgument, "rho must be positive");
  return hard_threshold(s.b + s.y_p / s.rho, std::sqrt(2.0 * cfg.gamma / s.rho));
}

/// Nearest matrix with orthonormal columns: A·V·D^{-1/2}·Vᵀ where
/// AᵀA = VDVᵀ. V and D are read off the thin SVD of A, which keeps the
/// result orthonormal even when AᵀA is badly conditioned.
inline Matrix polar_factor(const Matrix& a) {
  const ThinSvd svd = thin_svd(a);
  const double smax = svd.singular_values(0);
  const double smin = svd.singular_values(svd.singular_values.size() - 1);
  if (!(smax > 0.0) || smin <= 1e-12 * smax) fail(Errc::RankDeficient, "matrix is numerically rank deficient");
  return svd.u * svd.v.transpose();
}

/// Q = argmin ‖Q − (B + Y_Q/ρ)‖_F subject to QᵀQ = I.
inline Matrix update_Q(const SolverState& s) { return polar_factor(s.b + s.y_q / s.rho); }

/// Y_P += ρ(B − P), Y_Q += ρ(B − Q), then ρ ← min(ρα, ρ_max).
inline SolverState update_multipliers(SolverState s, const SolverConfig& cfg) {
  s.y_p += s.rho * (s.b - s.p);
  s.y_q += s.rho * (s.b - s.q);
  s.rho = std::min(s.rho * cfg.alpha, cfg.rho_max);
  return s;
}

/// What an observer sees after each completed iteration.
struct IterationView {
  int iter;
  double rho;         // ρ used by this iteration's subproblems
  const Matrix& rhs;  // right-hand side of the B-subproblem
  const SolverState& state;
};

using IterationObserver = std::function<void(const IterationView&)>;

namespace detail {

inline Matrix jitter_pattern(Index rows, Index cols) {
  Matrix j(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) j(r, c) = static_cast<double>((r * 131 + c * 71) % 17 - 8) / 8.0;
  return j;
}

// Orthonormalize the columns of `masked` in order while keeping each
// column's support. Falls back to the dense column of `dense` when the
// support cannot hold a direction orthogonal to the earlier columns.
inline Matrix orthonormalize_on_support(const Matrix& masked, const Matrix& dense) {
  const Index m = masked.rows();
  const Index k = masked.cols();
  Matrix out = Matrix::Zero(m, k);
  for (Index j = 0; j < k; ++j) {
    std::vector<Index> support;
    for (Index i = 0; i < m; ++i)
      if (masked(i, j) != 0.0) support.push_back(i);
    const Index s = static_cast<Index>(support.size());

    bool placed = false;
    if (s > 0) {
      Vector v(s);
      Matrix prev(s, j);
      for (Index i = 0; i < s; ++i) {
        v(i) = masked(support[static_cast<size_t>(i)], j);
        for (Index c = 0; c < j; ++c) prev(i, c) = out(support[static_cast<size_t>(i)], c);
      }
      if (j > 0) {
        Eigen::ColPivHouseholderQR<Matrix> qr(prev);
        const Index rank = qr.rank();
        if (rank > 0) {
          const Matrix basis = Matrix(qr.householderQ()).leftCols(rank);
          for (int pass = 0; pass < 2; ++pass) v -= basis * (basis.transpose() * v);
        }
      }
      const double len = v.norm();
      if (len > 1e-8) {
        for (Index i = 0; i < s; ++i) out(support[static_cast<size_t>(i)], j) = v(i) / len;
        placed = true;
      }
    }
    if (!placed) {
      Vector v = dense.col(j);
      for (int pass = 0; pass < 2; ++pass)
        for (Index c = 0; c < j; ++c) v -= out.col(c).dot(v) * out.col(c);
      out.col(j) = v / v.norm();
    }
  }
  return out;
}

}  // namespace detail

/// Final basis: Q (exactly orthonormal) restricted to P's nonzero pattern,
/// re-orthonormalized on that pattern if masking broke orthonormality.
inline Matrix reconcile_basis(const Matrix& p, const Matrix& q) {
  Matrix masked = q;
  for (Index i = 0; i < masked.size(); ++i)
    if (p.data()[i] == 0.0) masked.data()[i] = 0.0;
  if (orthonormality_error(masked) <= 1e-8) return masked;
  return detail::orthonormalize_on_support(masked, q);
}

/// Sparse low-rank factorization of Z (already in the transform domain):
///   min −‖ZᵀB‖²_F + γ‖B‖₀  s.t.  BᵀB = I_k,
/// by inexact augmented Lagrangian iterations. Stops once ‖B − P‖∞ and
/// ‖B − Q‖∞ both drop below cfg.tol, or after cfg.max_iters iterations
/// (converged = false). C = BᵀZ for the reconciled B.
inline Factorization slrma_solve(const Matrix& z, const SolverConfig& cfg, const IterationObserver& observer = {}) {
  cfg.validate();
  require_nonempty(z, "slrma input");
  require_finite(z, "slrma input");
  const Index m = z.rows();
  if (cfg.k > std::min(z.rows(), z.cols())) fail(Errc::RankTooLarge, "k must lie in [1, min(m, n)]");

  const ShiftedGramSolver gram(z);
  SolverState s = SolverState::initial(m, cfg);
  Matrix last_p = s.p;
  Matrix last_q = s.q;
  bool converged = false;

  for (int it = 0; it < cfg.max_iters; ++it) {
    // Nudge ρ off an exact 2ρ = 2σᵢ² coincidence.
    for (int nudge = 0; gram.min_relative_gap(s.rho) < 1e-10; ++nudge) {
      if (nudge == 8) fail(Errc::SingularShift, "could not move ρ off a singular shift");
      s.rho *= 1.0 + 1e-6;
    }
    const double rho_used = s.rho;
    const Matrix rhs = b_update_rhs(s);
    s.b = gram.solve(s.rho, rhs);
    s.p = update_P(s, cfg);

    // A diverged iterate ends the run; the last good state is kept.
    Matrix b_hat = s.b + s.y_q / s.rho;
    if (!b_hat.allFinite() || !s.b.allFinite()) break;
    auto degenerate = [](const Error& e) { return e.code() == Errc::RankDeficient || e.code() == Errc::NoConvergence; };
    try {
      s.q = polar_factor(b_hat);
    } catch (const Error& e) {
      if (!degenerate(e)) throw;
      const double scale = std::max(max_abs(b_hat), 1.0);
      b_hat += 1e-10 * scale * detail::jitter_pattern(b_hat.rows(), b_hat.cols());
      try {
        s.q = polar_factor(b_hat);
      } catch (const Error& again) {
        if (!degenerate(again)) throw;
        break;
      }
    }

    s = update_multipliers(std::move(s), cfg);
    s.iter = it + 1;
    s.objective_trace.push_back(objective(z, s.b, cfg.gamma));
    last_p = s.p;
    last_q = s.q;
    if (observer) observer(IterationView{it, rho_used, rhs, s});

    if (max_abs(s.b - s.p) < cfg.tol && max_abs(s.b - s.q) < cfg.tol) {
      converged = true;
      break;
    }
  }

  Factorization f;
  f.b = reconcile_basis(last_p, last_q);
  f.c = f.b.transpose() * z;
  f.p_b_achieved = static_cast<double>(count_zeros(f.b)) / static_cast<double>(f.b.size());
  f.iterations = s.iter;
  f.converged = converged;
  f.gamma = cfg.gamma;
  f.final_objective = s.objective_trace.empty() ? objective(z, f.b, cfg.gamma) : s.objective_trace.back();
  f.objective_trace = std::move(s.objective_trace);
  return f;
}

/// max − min of the last `window` trace values.
inline double trace_spread(const std::vector<double>& trace, int window) {
  if (trace.empty()) return 0.0;
  const auto first = trace.end() - std::min<std::ptrdiff_t>(window, static_cast<std::ptrdiff_t>(trace.size()));
  const auto [lo, hi] = std::minmax_element(first, trace.end());
  return *hi - *lo;
}

inline bool objective_stable(const Factorization& f, int window) {
  return trace_spread(f.objective_trace, window) < 1e-6 * (1.0 + std::abs(f.final_objective));
}

struct SparsityProbe {
  double gamma;
  double p_b;
  bool converged;
  int iterations;
};

struct SparsitySearch {
  double gamma = 0.0;
  Factorization result;
  std::vector<SparsityProbe> probes;  // in evaluation order
};

/// Finds γ whose solution has p_B within tol_pb of target_pb. Doubles γ from
/// 1e-8·λ₁(ZZᵀ)/m until the target is straddled, then bisects log γ for at
/// most 30 probes. Returns the best probe seen (converged runs first).
inline SparsitySearch gamma_for_sparsity(const Matrix& z, const SolverConfig& cfg, double target_pb, double tol_pb) {
  if (!(target_pb >= 0.0 && target_pb < 1.0)) fail(Errc::InvalidArgument, "target p_B must lie in [0, 1)");
  if (!(tol_pb >= 0.0)) fail(Errc::InvalidArgument, "p_B tolerance must be >= 0");
  require_nonempty(z, "slrma input");

  const double lambda1 = std::pow(thin_svd(z).singular_values(0), 2);
  const double gamma_min = lambda1 > 0.0 ? 1e-8 * lambda1 / static_cast<double>(z.rows()) : 1e-8;

  SparsitySearch out;
  std::optional<Factorization> best;
  auto score = [&](const Factorization& f) {
    return std::abs(f.p_b_achieved - target_pb) + (f.converged ? 0.0 : 2.0);
  };
  auto probe = [&](double gamma) -> bool {
    SolverConfig c = cfg;
    c.gamma = gamma;
    Factorization f = slrma_solve(z, c);
    out.probes.push_back({gamma, f.p_b_achieved, f.converged, f.iterations});
    const bool hit = std::abs(f.p_b_achieved - target_pb) <= tol_pb;
    if (!best || score(f) < score(*best)) best = std::move(f);
    return hit;
  };
  auto finish = [&]() {
    out.result = std::move(*best);
    out.gamma = out.result.gamma;
    return out;
  };

  double lo = gamma_min;
  if (probe(lo)) return finish();
  if (out.probes.back().p_b > target_pb) fail(Errc::TargetUnreachable, "smallest γ already overshoots the target p_B");

  std::optional<double> hi;
  double g = lo;
  for (int doubling = 0; doubling < 64 && !hi; ++doubling) {
    g *= 2.0;
    if (probe(g)) return finish();
    if (out.probes.back().p_b > target_pb)
      hi = g;
    else
      lo = g;
  }
  if (!hi) fail(Errc::TargetUnreachable, "γ bracket never reached the target p_B");

  for (int i = 0; i < 30; ++i) {
    const double mid = std::sqrt(lo * *hi);
    if (probe(mid)) break;
    if (out.probes.back().p_b < target_pb)
      lo = mid;
    else
      hi = mid;
  }
  return finish();
}

/// X̂ = Φ(BC).
inline Matrix reconstruct(const OrthogonalTransform& phi, const Factorization& f) {
  if (phi.dimension() != f.b.rows() || f.b.cols() != f.c.rows()) fail(Errc::ShapeMismatch, "factor shapes disagree");
  return phi.synthesize(f.b * f.c);
}

}  // namespace slrma
