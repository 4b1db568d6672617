#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "slrma/codec.hpp"
#include "slrma/datasets.hpp"
#include "slrma/metrics.hpp"

namespace slrma {

struct QuantStep {
  double b;
  double c;
};

struct SweepGrid {
  std::vector<Index> ks;
  std::vector<double> p_b_targets;
  std::vector<QuantStep> steps;
  double tol_pb = 0.01;
  TransformKind transform = TransformKind::Dct2d;  // image sets only; meshes always use the graph transform
  int levels = 3;
  std::optional<SolverConfig> solver;
  unsigned threads = 0;  // 0 = hardware concurrency
};

/// One evaluated grid point. Mesh rows report the mean achieved p_B over
/// the three axes and one γ per axis.
struct SweepRow {
  Index k = 0;
  double p_b_target = 0.0;
  double p_b_achieved = 0.0;
  std::vector<double> gammas;
  double step_b = 0.0;
  double step_c = 0.0;
  std::string transform;
  std::uint64_t bits = 0;
  double rate = 0.0;
  double rmse = 0.0;
  std::optional<double> psnr;
  bool infinite_psnr = false;
  std::optional<double> kg_error;
  int iterations = 0;  // max over axes for meshes
  bool converged = false;
  std::optional<Errc> error;

  // Distortion used for the front: KG error for meshes, RMSE otherwise.
  double distortion() const { return kg_error.value_or(rmse); }
};

struct SweepResult {
  std::vector<SweepRow> rows;   // grid order: k, then p_B target, then step
  std::vector<SweepRow> front;  // Pareto-filtered, rate ascending
};

/// Indices of the points kept by the front: sort by rate (ties by
/// distortion) and keep each point whose distortion is strictly below
/// every earlier kept one.
inline std::vector<size_t> pareto_front(const std::vector<std::pair<double, double>>& rate_distortion) {
  std::vector<size_t> order(rate_distortion.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return rate_distortion[a] < rate_distortion[b]; });
  std::vector<size_t> keep;
  for (size_t i : order) {
    if (keep.empty() || rate_distortion[i].second < rate_distortion[keep.back()].second) keep.push_back(i);
  }
  return keep;
}

namespace detail {

// Runs fn(i) for i in [0, count) on up to `threads` workers.
template <typename Fn>
void parallel_for(size_t count, unsigned threads, Fn fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<size_t>(threads, count));
  if (threads <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (size_t i = next++; i < count; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

inline void check_grid(const SweepGrid& g) {
  if (g.ks.empty() || g.p_b_targets.empty() || g.steps.empty()) fail(Errc::InvalidArgument, "sweep grid is empty");
}

inline SweepResult finish_sweep(std::vector<std::vector<SweepRow>> blocks) {
  SweepResult out;
  for (auto& b : blocks)
    for (auto& r : b) out.rows.push_back(std::move(r));
  std::vector<std::pair<double, double>> points;
  std::vector<size_t> valid;
  for (size_t i = 0; i < out.rows.size(); ++i) {
    if (out.rows[i].error) continue;
    points.emplace_back(out.rows[i].rate, out.rows[i].distortion());
    valid.push_back(i);
  }
  for (size_t i : pareto_front(points)) out.front.push_back(out.rows[valid[i]]);
  return out;
}

}  // namespace detail

/// Every (k, p_B target) pair is solved once; its factors are then coded at
/// each quantization step.
inline SweepResult rd_sweep(const ImageSet& data, const SweepGrid& grid) {
  detail::check_grid(grid);
  const OrthogonalTransform phi = image_transform(grid.transform, grid.levels, data.width, data.height);
  const Matrix z = phi.analyze(data.x);
  const std::string name = transform_name(phi.kind, phi.levels);
  const size_t per_k = grid.p_b_targets.size();
  std::vector<std::vector<SweepRow>> blocks(grid.ks.size() * per_k);

  detail::parallel_for(blocks.size(), grid.threads, [&](size_t task) {
    const Index k = grid.ks[task / per_k];
    const double target = grid.p_b_targets[task % per_k];
    std::vector<SweepRow>& rows = blocks[task];
    for (const QuantStep& s : grid.steps) {
      SweepRow r;
      r.k = k;
      r.p_b_target = target;
      r.step_b = s.b;
      r.step_c = s.c;
      r.transform = name;
      rows.push_back(r);
    }
    try {
      CodecParams p;
      p.k = k;
      p.target_pb = target;
      p.tol_pb = grid.tol_pb;
      p.solver = grid.solver;
      const SolveOutcome solved = solve_with(z, p, SolverConfig::image_defaults(k));
      const Factorization& f = solved.factorization;
      for (SweepRow& r : rows) {
        try {
          const auto bytes = encode_image_factors(f.b, f.c, phi, r.step_b, r.step_c);
          const DecodedImages dec = decompress_image_set(bytes);
          const MetricsReport m = measure_images(data.x, dec.x, data.width, data.height, 8ull * bytes.size());
          r.p_b_achieved = f.p_b_achieved;
          r.gammas = {f.gamma};
          r.bits = m.bits;
          r.rate = m.rate;
          r.rmse = m.rmse;
          r.psnr = m.psnr;
          r.infinite_psnr = m.infinite_psnr;
          r.iterations = f.iterations;
          r.converged = f.converged;
        } catch (const Error& e) {
          r.error = e.code();
        }
      }
    } catch (const Error& e) {
      for (SweepRow& r : rows) r.error = e.code();
    }
  });
  return detail::finish_sweep(std::move(blocks));
}

inline SweepResult rd_sweep(const MeshSequence& data, const SweepGrid& grid) {
  detail::check_grid(grid);
  const MeshBasis basis = mesh_basis(data.faces, data.vertex_count());
  std::array<Matrix, 3> z;
  for (int d = 0; d < 3; ++d) z[d] = basis.gt.analyze(data.coords[d]);
  const size_t per_k = grid.p_b_targets.size();
  std::vector<std::vector<SweepRow>> blocks(grid.ks.size() * per_k);

  detail::parallel_for(blocks.size(), grid.threads, [&](size_t task) {
    const Index k = grid.ks[task / per_k];
    const double target = grid.p_b_targets[task % per_k];
    std::vector<SweepRow>& rows = blocks[task];
    for (const QuantStep& s : grid.steps) {
      SweepRow r;
      r.k = k;
      r.p_b_target = target;
      r.step_b = s.b;
      r.step_c = s.c;
      r.transform = "gt";
      rows.push_back(r);
    }
    try {
      CodecParams p;
      p.k = k;
      p.target_pb = target;
      p.tol_pb = grid.tol_pb;
      p.solver = grid.solver;
      std::array<Factorization, 3> f;
      for (int d = 0; d < 3; ++d) f[d] = solve_with(z[d], p, SolverConfig::mesh_defaults(k)).factorization;
      const MeshFactors factors = to_mesh_factors(f);
      for (SweepRow& r : rows) {
        try {
          const auto bytes = encode_mesh_factors(factors, basis.digest, r.step_b, r.step_c);
          const MeshCoords dec = decompress_mesh_seq(bytes, basis);
          const MetricsReport m = measure_mesh(data.coords, dec, 8ull * bytes.size());
          r.p_b_achieved = (f[0].p_b_achieved + f[1].p_b_achieved + f[2].p_b_achieved) / 3.0;
          r.gammas = {f[0].gamma, f[1].gamma, f[2].gamma};
          r.bits = m.bits;
          r.rate = m.rate;
          r.rmse = m.rmse;
          r.kg_error = m.kg_error;
          r.iterations = std::max({f[0].iterations, f[1].iterations, f[2].iterations});
          r.converged = f[0].converged && f[1].converged && f[2].converged;
        } catch (const Error& e) {
          r.error = e.code();
        }
      }
    } catch (const Error& e) {
      for (SweepRow& r : rows) r.error = e.code();
    }
  });
  return detail::finish_sweep(std::move(blocks));
}

inline constexpr const char* kSweepCsvHeader =
    "k,p_B_target,p_B_achieved,gamma,step_b,step_c,transform,bits,rate,rmse,psnr,kg_error,iters,converged";

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// One CSV line (no newline). Failed points keep their parameters and put
/// "error:<code>" in the converged column; measurement columns stay empty.
inline std::string csv_row(const SweepRow& r) {
  using detail::fmt_double;
  std::string line = std::to_string(r.k) + "," + fmt_double(r.p_b_target) + ",";
  if (r.error) {
    line += ",," + fmt_double(r.step_b) + "," + fmt_double(r.step_c) + "," + r.transform + ",,,,,,,error:" + std::string(errc_name(*r.error));
    return line;
  }
  std::string gammas;
  for (size_t i = 0; i < r.gammas.size(); ++i) gammas += (i ? ";" : "") + fmt_double(r.gammas[i]);
  line += fmt_double(r.p_b_achieved) + "," + gammas + "," + fmt_double(r.step_b) + "," + fmt_double(r.step_c) + "," +
          r.transform + "," + std::to_string(r.bits) + "," + fmt_double(r.rate) + "," + fmt_double(r.rmse) + ",";
  if (r.psnr)
    line += fmt_double(*r.psnr);
  else if (r.infinite_psnr)
    line += "inf";
  line += ",";
  if (r.kg_error) line += fmt_double(*r.kg_error);
  line += "," + std::to_string(r.iterations) + "," + (r.converged ? "true" : "false");
  return line;
}

inline void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepCsvHeader << '\n';
  for (const auto& r : rows) out << csv_row(r) << '\n';
}

}  // namespace slrma
