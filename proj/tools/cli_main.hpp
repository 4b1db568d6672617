#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "slrma/slrma.hpp"

namespace slrma::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNotConverged = 3 };

// Bad flag combinations found after parsing; maps to exit 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverFlags {
  std::optional<double> rho0, alpha, rho_max, tol;
  std::optional<int> max_iters;

  void add_to(CLI::App& app) {
    app.add_option("--rho0", rho0, "initial penalty");
    app.add_option("--alpha", alpha, "penalty growth factor (> 1)");
    app.add_option("--rho-max", rho_max, "penalty cap");
    app.add_option("--tol", tol, "stopping tolerance on max |B-P|, |B-Q|");
    app.add_option("--max-iters", max_iters, "iteration cap");
  }

  std::optional<SolverConfig> apply(SolverConfig cfg) const {
    if (!rho0 && !alpha && !rho_max && !tol && !max_iters) return std::nullopt;
    if (rho0) cfg.rho0 = *rho0;
    if (alpha) cfg.alpha = *alpha;
    if (rho_max) cfg.rho_max = *rho_max;
    if (tol) cfg.tol = *tol;
    if (max_iters) cfg.max_iters = *max_iters;
    try {
      cfg.validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    return cfg;
  }
};

struct ParsedTransform {
  TransformKind kind = TransformKind::Dct2d;
  int levels = 0;
};

inline ParsedTransform parse_transform(const std::string& s) {
  if (s == "dct" || s.empty()) return {TransformKind::Dct2d, 0};
  if (s == "gt") return {TransformKind::Graph, 0};
  if (s == "identity") return {TransformKind::Identity, 0};
  if (s.rfind("dwt:", 0) == 0) {
    try {
      size_t used = 0;
      const int levels = std::stoi(s.substr(4), &used);
      if (used == s.size() - 4 && levels >= 1) return {TransformKind::Dwt2d, levels};
    } catch (const std::exception&) {
    }
  }
  throw UsageError("unknown transform '" + s + "' (expected dct, dwt:<levels> or gt)");
}

inline std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::FormatError, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::FormatError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Errc::FormatError, "short write to " + path);
}

inline std::vector<std::filesystem::path> as_paths(const std::vector<std::string>& files) {
  return {files.begin(), files.end()};
}

inline bool is_off(const std::string& path) { return std::filesystem::path(path).extension() == ".off"; }

inline nlohmann::json report_json(const MetricsReport& r) {
  nlohmann::json j;
  j["rmse"] = r.rmse;
  j["psnr"] = r.psnr ? nlohmann::json(*r.psnr) : nlohmann::json(nullptr);
  j["infinite_psnr"] = r.infinite_psnr;
  j["kg_error"] = r.kg_error ? nlohmann::json(*r.kg_error) : nlohmann::json(nullptr);
  j["rate"] = r.rate;
  j["bits"] = r.bits;
  return j;
}

inline nlohmann::json factorization_json(const Factorization& f) {
  return {{"p_b_achieved", f.p_b_achieved}, {"gamma", f.gamma}, {"iterations", f.iterations}, {"converged", f.converged}};
}

inline std::vector<double> split_numbers(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& s : items) {
    try {
      size_t used = 0;
      out.push_back(std::stod(s, &used));
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw UsageError("not a number: '" + s + "'");
    }
  }
  return out;
}

/// Runs one invocation. Exit codes: 0 success, 1 usage, 2 data error,
/// 3 finished but the solver did not converge.
inline int cli_main(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Sparse low-rank compression of image sets and mesh sequences", "slrma"};
  app.require_subcommand(1);

  // Shared codec flags.
  Index k = 8;
  std::optional<double> target_pb, gamma;
  double tol_pb = 0.01;
  std::string transform;  // empty: dct for images, gt for meshes
  double step_b = 1e-2, step_c = 1.0;
  std::string out_path;
  SolverFlags solver;
  std::vector<std::string> inputs;

  auto add_codec_flags = [&](CLI::App* cmd, bool images) {
    cmd->add_option("--k", k, "rank")->check(CLI::PositiveNumber);
    auto* t = cmd->add_option("--target-pb", target_pb, "target fraction of zeros in B")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--gamma", gamma, "sparsity weight")->check(CLI::NonNegativeNumber)->excludes(t);
    cmd->add_option("--tol-pb", tol_pb, "accepted |p_B - target|")->check(CLI::PositiveNumber);
    cmd->add_option("--transform", transform, images ? "dct | dwt:<levels> (default dct)" : "gt (the only choice)");
    cmd->add_option("--step-b", step_b, "quantization step for B")->check(CLI::PositiveNumber);
    cmd->add_option("--step-c", step_c, "quantization step for C")->check(CLI::PositiveNumber);
    cmd->add_option("--out", out_path, "output container")->required();
    solver.add_to(*cmd);
    cmd->add_option("inputs", inputs, images ? "PGM frames in order" : "OFF frames in order")->required();
  };

  auto* compress_images = app.add_subcommand("compress-images", "PGM frames -> container");
  add_codec_flags(compress_images, true);
  auto* compress_mesh = app.add_subcommand("compress-mesh", "OFF frames -> container");
  add_codec_flags(compress_mesh, false);

  std::string container_in, faces_path, stem = "frame";
  auto* decompress_images = app.add_subcommand("decompress-images", "container -> PGM frames");
  decompress_images->add_option("container", container_in)->required();
  decompress_images->add_option("--out", out_path, "output directory")->required();
  decompress_images->add_option("--stem", stem, "file name stem");
  auto* decompress_mesh = app.add_subcommand("decompress-mesh", "container -> OFF frames");
  decompress_mesh->add_option("container", container_in)->required();
  decompress_mesh->add_option("--faces", faces_path, "any OFF file carrying the connectivity")->required();
  decompress_mesh->add_option("--out", out_path, "output directory")->required();
  decompress_mesh->add_option("--stem", stem, "file name stem");

  std::vector<std::string> reference, decoded;
  std::optional<std::uint64_t> bits;
  std::string container_for_bits;
  auto* measure = app.add_subcommand("measure", "distortion and rate of a decoded set");
  measure->add_option("--reference", reference, "original frames")->required();
  measure->add_option("--decoded", decoded, "decoded frames")->required();
  auto* bits_opt = measure->add_option("--bits", bits, "payload size in bits");
  measure->add_option("--container", container_for_bits, "take the payload size from this file")->excludes(bits_opt);

  std::vector<std::string> ks, targets, steps_b, steps_c;
  std::string csv_path;
  unsigned threads = 0;
  auto* sweep = app.add_subcommand("rd-sweep", "rate-distortion grid over k, target p_B and steps");
  sweep->add_option("--k", ks, "ranks")->delimiter(',')->required();
  sweep->add_option("--target-pb", targets, "target p_B values")->delimiter(',')->required();
  sweep->add_option("--step-b", steps_b, "B steps (paired with --step-c)")->delimiter(',')->required();
  sweep->add_option("--step-c", steps_c, "C steps")->delimiter(',')->required();
  sweep->add_option("--tol-pb", tol_pb, "accepted |p_B - target|")->check(CLI::PositiveNumber);
  sweep->add_option("--transform", transform, "dct | dwt:<levels> for image sets, gt for meshes");
  sweep->add_option("--csv", csv_path, "all grid points")->required();
  sweep->add_option("--out", out_path, "Pareto front CSV");
  sweep->add_option("--threads", threads, "worker threads (0 = all cores)");
  solver.add_to(*sweep);
  sweep->add_option("inputs", inputs, "PGM or OFF frames")->required();

  std::string kind = "images";
  Index width = 16, height = 16, frames = 32, rank = 4, vertices = 64;
  double noise = 2.0, amplitude = 0.5;
  std::uint64_t seed = 1;
  auto* synth = app.add_subcommand("synth", "write a synthetic corpus");
  synth->add_option("--kind", kind, "images | mesh")->check(CLI::IsMember({"images", "mesh"}));
  synth->add_option("--width", width)->check(CLI::PositiveNumber);
  synth->add_option("--height", height)->check(CLI::PositiveNumber);
  synth->add_option("--frames", frames)->check(CLI::PositiveNumber);
  synth->add_option("--rank", rank)->check(CLI::PositiveNumber);
  synth->add_option("--noise", noise)->check(CLI::NonNegativeNumber);
  synth->add_option("--vertices", vertices)->check(CLI::PositiveNumber);
  synth->add_option("--amplitude", amplitude);
  synth->add_option("--seed", seed);
  synth->add_option("--out", out_path, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "slrma: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (compress_images->parsed()) {
      const ParsedTransform t = parse_transform(transform);
      if (t.kind == TransformKind::Graph) throw UsageError("the graph transform applies to meshes only");
      const ImageSet set = load_image_set(as_paths(inputs));
      ImageCodecParams p;
      p.k = k;
      p.gamma = gamma;
      p.target_pb = target_pb;
      p.tol_pb = tol_pb;
      p.step_b = step_b;
      p.step_c = step_c;
      p.transform = t.kind;
      p.levels = t.levels;
      p.solver = solver.apply(SolverConfig::image_defaults(k));
      const ImageEncoding enc = compress_image_set(set.x, set.width, set.height, p);
      write_bytes(out_path, enc.bytes);
      nlohmann::json j = factorization_json(enc.factorization);
      j["bytes"] = enc.bytes.size();
      j["rate"] = bits_per_pixel(8 * enc.bytes.size(), set.width, set.height, set.frames());
      out << j.dump() << "\n";
      if (!enc.factorization.converged) {
        err << "slrma: solver stopped without converging\n";
        return kNotConverged;
      }
      return kOk;
    }

    if (compress_mesh->parsed()) {
      if (!transform.empty() && parse_transform(transform).kind != TransformKind::Graph)
        throw UsageError("mesh sequences always use the graph transform");
      const MeshSequence seq = load_mesh_sequence(as_paths(inputs));
      CodecParams p;
      p.k = k;
      p.gamma = gamma;
      p.target_pb = target_pb;
      p.tol_pb = tol_pb;
      p.step_b = step_b;
      p.step_c = step_c;
      p.solver = solver.apply(SolverConfig::mesh_defaults(k));
      const MeshEncoding enc = compress_mesh_seq(seq.coords, seq.faces, p);
      write_bytes(out_path, enc.bytes);
      nlohmann::json j;
      bool converged = true;
      for (const auto& f : enc.factorizations) {
        j["axes"].push_back(factorization_json(f));
        converged = converged && f.converged;
      }
      j["bytes"] = enc.bytes.size();
      j["rate"] = bits_per_frame_vertex(8 * enc.bytes.size(), seq.vertex_count(), seq.frames());
      out << j.dump() << "\n";
      if (!converged) {
        err << "slrma: solver stopped without converging\n";
        return kNotConverged;
      }
      return kOk;
    }

    if (decompress_images->parsed()) {
      const DecodedImages dec = decompress_image_set(read_bytes(container_in));
      ImageSet set{dec.width, dec.height, dec.x};
      save_image_set(set, out_path, stem);
      return kOk;
    }

    if (decompress_mesh->parsed()) {
      const OffMesh ref = parse_off([&] {
        const auto b = read_bytes(faces_path);
        return std::string(b.begin(), b.end());
      }());
      MeshSequence seq;
      seq.faces = ref.faces;
      seq.coords = decompress_mesh_seq(read_bytes(container_in), ref.faces);
      save_mesh_sequence(seq, out_path, stem);
      return kOk;
    }

    if (measure->parsed()) {
      std::uint64_t payload = bits.value_or(0);
      if (!container_for_bits.empty()) payload = 8 * read_bytes(container_for_bits).size();
      MetricsReport r;
      if (is_off(reference.front())) {
        const MeshSequence a = load_mesh_sequence(as_paths(reference));
        const MeshSequence b = load_mesh_sequence(as_paths(decoded));
        if (a.faces != b.faces) fail(Errc::ConnectivityMismatch, "reference and decoded meshes differ in connectivity");
        r = measure_mesh(a.coords, b.coords, payload);
      } else {
        const ImageSet a = load_image_set(as_paths(reference));
        const ImageSet b = load_image_set(as_paths(decoded));
        if (a.width != b.width || a.height != b.height) fail(Errc::DimensionMismatch, "reference and decoded frames differ in size");
        r = measure_images(a.x, b.x, a.width, a.height, payload);
      }
      out << report_json(r).dump() << "\n";
      return kOk;
    }

    if (sweep->parsed()) {
      SweepGrid g;
      for (double v : split_numbers(ks)) {
        if (v < 1 || v != std::floor(v)) throw UsageError("--k values must be positive integers");
        g.ks.push_back(static_cast<Index>(v));
      }
      g.p_b_targets = split_numbers(targets);
      const auto sb = split_numbers(steps_b);
      const auto sc = split_numbers(steps_c);
      if (sb.size() != sc.size()) throw UsageError("--step-b and --step-c need the same number of values");
      for (size_t i = 0; i < sb.size(); ++i) g.steps.push_back({sb[i], sc[i]});
      g.tol_pb = tol_pb;
      g.threads = threads;
      SweepResult res;
      if (is_off(inputs.front())) {
        if (!transform.empty() && parse_transform(transform).kind != TransformKind::Graph)
          throw UsageError("mesh sequences always use the graph transform");
        g.solver = solver.apply(SolverConfig::mesh_defaults(1));
        res = rd_sweep(load_mesh_sequence(as_paths(inputs)), g);
      } else {
        const ParsedTransform t = parse_transform(transform);
        if (t.kind == TransformKind::Graph) throw UsageError("the graph transform applies to meshes only");
        g.transform = t.kind;
        g.levels = t.levels;
        g.solver = solver.apply(SolverConfig::image_defaults(1));
        res = rd_sweep(load_image_set(as_paths(inputs)), g);
      }
      std::ofstream csv(csv_path, std::ios::binary);
      if (!csv) fail(Errc::FormatError, "cannot write " + csv_path);
      write_csv(csv, res.rows);
      if (!out_path.empty()) {
        std::ofstream front(out_path, std::ios::binary);
        if (!front) fail(Errc::FormatError, "cannot write " + out_path);
        write_csv(front, res.front);
      }
      size_t failed = 0;
      for (const auto& r : res.rows) failed += r.error.has_value();
      out << nlohmann::json{{"rows", res.rows.size()}, {"front", res.front.size()}, {"failed", failed}}.dump() << "\n";
      return kOk;
    }

    if (synth->parsed()) {
      if (kind == "images") {
        save_image_set(synth_image_set(width, height, frames, rank, noise, seed), out_path);
      } else {
        save_mesh_sequence(synth_mesh_seq(vertices, frames, amplitude, seed), out_path);
      }
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "slrma: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "slrma: " << e.what() << "\n";
    return e.code() == Errc::NotConverged ? kNotConverged : kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "slrma: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace slrma::cli
