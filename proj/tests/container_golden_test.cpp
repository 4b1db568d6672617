#include <gtest/gtest.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "slrma/codec.hpp"

// Byte-exact fixtures for the container layout. Set SLRMA_UPDATE_GOLDEN=1 to
// rewrite them after an intentional format change (and bump the version).

using namespace slrma;

namespace {

using Bytes = std::vector<std::uint8_t>;

std::filesystem::path golden(const std::string& name) { return std::filesystem::path(SLRMA_GOLDEN_DIR) / name; }

Bytes read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void check_golden(const std::string& name, const Bytes& produced) {
  const char* update = std::getenv("SLRMA_UPDATE_GOLDEN");
  if (update != nullptr && std::string(update) == "1") {
    std::filesystem::create_directories(golden("").parent_path());
    std::ofstream out(golden(name), std::ios::binary);
    out.write(reinterpret_cast<const char*>(produced.data()), static_cast<std::streamsize>(produced.size()));
  }
  const Bytes want = read_bytes(golden(name));
  ASSERT_FALSE(want.empty()) << "missing fixture " << golden(name);
  EXPECT_EQ(produced, want) << name;
}

std::uint32_t le32(const Bytes& b, size_t at) {
  return std::uint32_t{b[at]} | std::uint32_t{b[at + 1]} << 8 | std::uint32_t{b[at + 2]} << 16 | std::uint32_t{b[at + 3]} << 24;
}

double le_f64(const Bytes& b, size_t at) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = bits << 8 | b[at + static_cast<size_t>(i)];
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

// 2×2 DCT image set, k = 2, three frames.
Bytes image_case() {
  Matrix b(4, 2);
  b << 1.0, 0.0, 0.0, 0.5, 0.0, -0.5, 0.0, 0.0;
  Matrix c(2, 3);
  c << 10.0, -4.0, 0.0, 2.5, 0.0, -1.25;
  return encode_image_factors(b, c, dct2d(2, 2), 0.25, 0.125);
}

// Path 0–1–2–3, k = 1, two frames.
Bytes mesh_case() {
  const std::vector<Face> faces = {{0, 1, 1}, {1, 2, 2}, {2, 3, 3}};
  const MeshBasis basis = mesh_basis(faces, 4);
  MeshFactors fac;
  for (int d = 0; d < 3; ++d) {
    fac.b[d] = Matrix::Zero(4, 1);
    fac.b[d](d, 0) = 1.0;
    fac.c_dct[d] = Matrix::Zero(2, 1);
    fac.c_dct[d](0, 0) = 3.0 * (d + 1);
    fac.c_dct[d](1, 0) = -1.0;
  }
  return encode_mesh_factors(fac, basis.digest, 0.5, 0.5);
}

}  // namespace

TEST(ContainerGolden, ImageBytesFrozen) { check_golden("image_v1.bin", image_case()); }

TEST(ContainerGolden, MeshBytesFrozen) { check_golden("mesh_v1.bin", mesh_case()); }

TEST(ContainerGolden, ImageHeaderLayout) {
  const Bytes b = image_case();
  EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "SLRM");
  EXPECT_EQ(b[4], 1);  // version
  EXPECT_EQ(b[5], 0);  // image set
  EXPECT_EQ(b[6], static_cast<std::uint8_t>(TransformKind::Dct2d));
  EXPECT_EQ(b[7], 0);  // levels
  EXPECT_EQ(le32(b, 8), 2u);
  EXPECT_EQ(le32(b, 12), 2u);
  EXPECT_EQ(le32(b, 16), 4u);
  EXPECT_EQ(le32(b, 20), 3u);
  EXPECT_EQ(le32(b, 24), 2u);
  EXPECT_EQ(le_f64(b, 28), 0.25);
  EXPECT_EQ(le_f64(b, 36), 0.125);
  EXPECT_EQ(b[44], 2);  // stream count
  const std::uint32_t len0 = le32(b, 45);
  const std::uint32_t len1 = le32(b, 49);
  EXPECT_EQ(53u + len0 + len1, b.size());
}

TEST(ContainerGolden, MeshHeaderLayout) {
  const Bytes b = mesh_case();
  EXPECT_EQ(b[5], 1);
  EXPECT_EQ(b[6], static_cast<std::uint8_t>(TransformKind::Graph));
  EXPECT_EQ(le32(b, 16), 4u);
  EXPECT_EQ(le32(b, 20), 2u);
  EXPECT_EQ(le32(b, 24), 1u);

  // FNV-1a over the sorted edges (0,1), (1,2), (2,3) as u32 pairs.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint32_t v : {0u, 1u, 1u, 2u, 2u, 3u})
    for (int i = 0; i < 4; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  std::uint64_t stored = 0;
  for (int i = 7; i >= 0; --i) stored = stored << 8 | b[44 + static_cast<size_t>(i)];
  EXPECT_EQ(stored, h);

  EXPECT_EQ(b[52], 6);
  size_t payload = 0;
  for (size_t s = 0; s < 6; ++s) payload += le32(b, 53 + 4 * s);
  EXPECT_EQ(77u + payload, b.size());
}

TEST(ContainerGolden, FixturesDecode) {
  const DecodedImages img = decompress_image_set(read_bytes(golden("image_v1.bin")));
  Matrix b(4, 2);
  b << 1.0, 0.0, 0.0, 0.5, 0.0, -0.5, 0.0, 0.0;
  Matrix c(2, 3);
  c << 10.0, -4.0, 0.0, 2.5, 0.0, -1.25;
  EXPECT_LT(max_abs(img.x - dct2d(2, 2).synthesize(b * c)), 1e-12);

  const std::vector<Face> faces = {{0, 1, 1}, {1, 2, 2}, {2, 3, 3}};
  const MeshCoords mesh = decompress_mesh_seq(read_bytes(golden("mesh_v1.bin")), faces);
  EXPECT_EQ(mesh[0].rows(), 4);
  EXPECT_EQ(mesh[0].cols(), 2);
}

TEST(ContainerGolden, ReaderRoundtripsHeader) {
  const Container c = read_container(mesh_case());
  const Container again = read_container(write_container(c));
  EXPECT_EQ(again.header, c.header);
  EXPECT_EQ(again.streams, c.streams);
}

TEST(ContainerGolden, TrailingBytesRejected) {
  Bytes b = image_case();
  b.push_back(0);
  try {
    read_container(b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::CorruptStream);
  }
}

TEST(ContainerGolden, WrongStreamCountRejected) {
  Bytes b = image_case();
  b[44] = 3;
  try {
    read_container(b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::FormatError);
  }
}
