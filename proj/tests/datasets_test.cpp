#include <gtest/gtest.h>

#include <Eigen/SVD>

#include <filesystem>
#include <fstream>
#include <random>

#include "slrma/datasets.hpp"
#include "slrma/lrma.hpp"
#include "slrma/transforms.hpp"

using namespace slrma;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory per test, removed on scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("slrma_" + tag + "_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

Errc error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no slrma::Error thrown";
  return Errc::InvalidArgument;
}

const char* kTriangleOff = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";

}  // namespace

TEST(Pgm, HandVectorizationIsColumnMajor) {
  TempDir dir("pgm_hand");
  std::string file = "P5\n2 2\n255\n";
  file += std::string{static_cast<char>(0), static_cast<char>(255), static_cast<char>(128), static_cast<char>(64)};
  write_text(dir.path / "a.pgm", file);
  const ImageSet set = load_image_set({dir.path / "a.pgm"});
  ASSERT_EQ(set.x.rows(), 4);
  ASSERT_EQ(set.x.cols(), 1);
  EXPECT_EQ(set.x(0, 0), 0.0);
  EXPECT_EQ(set.x(1, 0), 128.0);
  EXPECT_EQ(set.x(2, 0), 255.0);
  EXPECT_EQ(set.x(3, 0), 64.0);
}

TEST(Pgm, CommentsInHeader) {
  std::string file = "P5 # binary\n# size follows\n3 1\n255\n";
  file += std::string{'\x01', '\x02', '\x03'};
  const GrayImage img = parse_pgm(bytes_of(file));
  EXPECT_EQ(img.width, 3);
  EXPECT_EQ(img.height, 1);
  EXPECT_EQ(img.pixels, (std::vector<std::uint8_t>{1, 2, 3}));
}

TEST(Pgm, MismatchedSizes) {
  TempDir dir("pgm_mismatch");
  write_text(dir.path / "a.pgm", "P5\n2 2\n255\n" + std::string(4, 'a'));
  write_text(dir.path / "b.pgm", "P5\n2 3\n255\n" + std::string(6, 'a'));
  EXPECT_EQ(error_code([&] { load_image_set({dir.path / "a.pgm", dir.path / "b.pgm"}); }), Errc::DimensionMismatch);
}

TEST(Pgm, MalformedFiles) {
  EXPECT_EQ(error_code([] { parse_pgm(bytes_of("P2\n1 1\n255\n0")); }), Errc::FormatError);
  EXPECT_EQ(error_code([] { parse_pgm(bytes_of("P5\n1 1\n65535\n\x01\x02")); }), Errc::FormatError);
  EXPECT_EQ(error_code([] { parse_pgm(bytes_of("P5\n2 2\n255\n\x01")); }), Errc::FormatError);
  EXPECT_EQ(error_code([] { parse_pgm(bytes_of("P5\n0 2\n255\n")); }), Errc::FormatError);
  EXPECT_EQ(error_code([] { load_image_set({"/nonexistent/slrma.pgm"}); }), Errc::FormatError);
}

TEST(Pgm, WriteReadRoundtrip) {
  TempDir dir("pgm_roundtrip");
  std::mt19937_64 rng(201);
  std::uniform_int_distribution<int> pixel(0, 255);
  ImageSet set;
  set.width = 7;
  set.height = 5;
  set.x.resize(35, 4);
  for (Index i = 0; i < set.x.size(); ++i) set.x.data()[i] = pixel(rng);
  const auto paths = save_image_set(set, dir.path);
  ASSERT_EQ(paths.size(), 4u);
  EXPECT_EQ(paths[2].filename(), "frame_0002.pgm");
  const ImageSet back = load_image_set(paths);
  EXPECT_EQ(back.width, 7);
  EXPECT_EQ(back.height, 5);
  EXPECT_EQ(back.x, set.x);
}

TEST(Off, TwoFrameHandAssembly) {
  TempDir dir("off_hand");
  write_text(dir.path / "f0.off", kTriangleOff);
  write_text(dir.path / "f1.off", "OFF\n3 1 0\n2.5 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  const MeshSequence seq = load_mesh_sequence({dir.path / "f0.off", dir.path / "f1.off"});
  ASSERT_EQ(seq.vertex_count(), 3);
  ASSERT_EQ(seq.frames(), 2);
  EXPECT_EQ(seq.coords[0](0, 0), 0.0);
  EXPECT_EQ(seq.coords[0](0, 1), 2.5);
  for (Index v = 1; v < 3; ++v)
    for (int d = 0; d < 3; ++d) EXPECT_EQ(seq.coords[d](v, 0), seq.coords[d](v, 1));
  EXPECT_EQ(seq.faces, (std::vector<Face>{{0, 1, 2}}));
}

TEST(Off, DifferentFacesRejected) {
  const OffMesh a = parse_off(kTriangleOff);
  const OffMesh b = parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 2 1\n");
  EXPECT_EQ(error_code([&] { mesh_sequence_from_frames({a, b}); }), Errc::ConnectivityMismatch);
}

TEST(Off, MalformedFiles) {
  EXPECT_EQ(error_code([] { parse_off("PLY\n"); }), Errc::FormatError);
  EXPECT_EQ(error_code([] { parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n"); }), Errc::FormatError);
  EXPECT_EQ(error_code([] { parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n4 0 1 2 0\n"); }), Errc::FormatError);
  EXPECT_EQ(error_code([] { parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n"); }), Errc::FormatError);
}

TEST(Off, CommentsAndFaceColours) {
  const OffMesh m = parse_off("OFF # header\n3 1 0\n0 0 0\n1 0 0 # second\n0 1 0\n3 0 1 2 255 0 0\n");
  EXPECT_EQ(m.vertices(1, 0), 1.0);
  EXPECT_EQ(m.faces.size(), 1u);
}

TEST(Off, WriteReadRoundtripExact) {
  TempDir dir("off_roundtrip");
  const MeshSequence seq = synth_mesh_seq(12, 5, 0.7, 202);
  const MeshSequence back = load_mesh_sequence(save_mesh_sequence(seq, dir.path));
  EXPECT_EQ(back.faces, seq.faces);
  for (int d = 0; d < 3; ++d) EXPECT_EQ(back.coords[d], seq.coords[d]);
}

TEST(Synth, ExactRankWithoutNoise) {
  const ImageSet set = synth_image_set(12, 10, 8, 1, 0.0, 203);
  const LrmaResult l = lrma(set.x, 1);
  EXPECT_LT((set.x - l.b * l.c).norm() / std::sqrt(static_cast<double>(set.x.size())), 1e-8);
}

TEST(Synth, DeterministicPerSeed) {
  EXPECT_EQ(synth_image_set(8, 8, 6, 3, 2.0, 204).x, synth_image_set(8, 8, 6, 3, 2.0, 204).x);
  EXPECT_NE(synth_image_set(8, 8, 6, 3, 2.0, 204).x, synth_image_set(8, 8, 6, 3, 2.0, 205).x);
  const MeshSequence a = synth_mesh_seq(20, 6, 0.5, 204);
  const MeshSequence b = synth_mesh_seq(20, 6, 0.5, 204);
  EXPECT_EQ(a.faces, b.faces);
  for (int d = 0; d < 3; ++d) EXPECT_EQ(a.coords[d], b.coords[d]);
}

TEST(Synth, RankFourSpectralGap) {
  const ImageSet set = synth_image_set(16, 16, 32, 4, 0.1, 206);
  const Eigen::JacobiSVD<Matrix> svd(set.x);
  const Vector s = svd.singularValues();
  EXPECT_GE(s(3), 10.0 * s(4));
}

TEST(Synth, ValuesInPixelRange) {
  const ImageSet set = synth_image_set(16, 16, 20, 4, 30.0, 207);
  EXPECT_GE(set.x.minCoeff(), 0.0);
  EXPECT_LE(set.x.maxCoeff(), 255.0);
}

TEST(Synth, MeshIsConnectedGridStrip) {
  Index rows = 0, cols = 0;
  const auto faces = grid_strip_faces(64, rows, cols);
  EXPECT_EQ(rows, 8);
  EXPECT_EQ(cols, 8);
  EXPECT_EQ(faces.size(), 2u * 7u * 7u);
  EXPECT_NO_THROW(graph_transform(mesh_adjacency(faces, 64)));
  // Prime count falls back to a one-row strip.
  EXPECT_EQ(grid_strip_faces(7, rows, cols).size(), 5u);
  EXPECT_NO_THROW(graph_transform(mesh_adjacency(grid_strip_faces(7, rows, cols), 7)));
}

TEST(Synth, RejectsBadRank) {
  EXPECT_EQ(error_code([] { synth_image_set(4, 4, 3, 5, 0.0, 1); }), Errc::InvalidArgument);
}

TEST(Vectorization, HorizontalRampOnlyInFirstCoefficientRow) {
  const Index w = 8, h = 6;
  ImageSet set;
  set.width = w;
  set.height = h;
  set.x.resize(w * h, 1);
  for (Index c = 0; c < w; ++c)
    for (Index r = 0; r < h; ++r) set.x(c * h + r, 0) = 10.0 * static_cast<double>(c);
  const Matrix coeff = dct2d(w, h).analyze(set.x);
  const Matrix grid = Eigen::Map<const Matrix>(coeff.data(), h, w);
  EXPECT_GT(grid.row(0).norm(), 1.0);
  EXPECT_LT(grid.bottomRows(h - 1).cwiseAbs().maxCoeff(), 1e-10);
}
