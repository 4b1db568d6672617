#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli_main.hpp"

using namespace slrma;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "slrma");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("slrma_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::vector<std::string> files(const std::string& sub) const {
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(dir_ / sub)) out.push_back(e.path().string());
    std::sort(out.begin(), out.end());
    return out;
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  fs::path dir_;
};

using Args = std::vector<std::string>;

Args operator+(Args a, const Args& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_F(Cli, SynthDeterministic) {
  ASSERT_EQ(run({"synth", "--seed", "7", "--width", "8", "--height", "8", "--frames", "5", "--out", path("a")}).code, 0);
  ASSERT_EQ(run({"synth", "--seed", "7", "--width", "8", "--height", "8", "--frames", "5", "--out", path("b")}).code, 0);
  const auto a = files("a");
  const auto b = files("b");
  ASSERT_EQ(a.size(), 5u);
  for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(slurp(a[i]), slurp(b[i]));

  ASSERT_EQ(run({"synth", "--kind", "mesh", "--seed", "7", "--vertices", "12", "--frames", "3", "--out", path("m1")}).code, 0);
  ASSERT_EQ(run({"synth", "--kind", "mesh", "--seed", "7", "--vertices", "12", "--frames", "3", "--out", path("m2")}).code, 0);
  const auto m1 = files("m1");
  const auto m2 = files("m2");
  ASSERT_EQ(m1.size(), 3u);
  for (size_t i = 0; i < m1.size(); ++i) EXPECT_EQ(slurp(m1[i]), slurp(m2[i]));
}

TEST_F(Cli, ImageRoundtripMatchesInProcessPipeline) {
  ASSERT_EQ(run({"synth", "--seed", "3", "--width", "8", "--height", "8", "--frames", "10", "--rank", "2", "--out", path("src")}).code, 0);
  const auto src = files("src");
  const CliResult c = run(Args{"compress-images", "--k", "2", "--gamma", "1", "--step-b", "0.01", "--step-c", "0.5",
                               "--transform", "dwt:2", "--out", path("a.slrm")} +
                          src);
  ASSERT_EQ(c.code, 0) << c.err;
  ASSERT_EQ(run({"decompress-images", path("a.slrm"), "--out", path("dec")}).code, 0);
  const CliResult m =
      run(Args{"measure", "--container", path("a.slrm"), "--reference"} + src + Args{"--decoded"} + files("dec"));
  ASSERT_EQ(m.code, 0) << m.err;
  const auto report = nlohmann::json::parse(m.out);

  // Same steps in process, including the 8-bit rounding of written frames.
  const ImageSet set = load_image_set(cli::as_paths(src));
  ImageCodecParams p;
  p.k = 2;
  p.gamma = 1.0;
  p.step_b = 0.01;
  p.step_c = 0.5;
  p.transform = TransformKind::Dwt2d;
  p.levels = 2;
  const ImageEncoding enc = compress_image_set(set.x, 8, 8, p);
  EXPECT_EQ(slurp(path("a.slrm")), std::string(enc.bytes.begin(), enc.bytes.end()));
  const DecodedImages dec = decompress_image_set(enc.bytes);
  std::vector<GrayImage> frames;
  for (Index j = 0; j < dec.x.cols(); ++j) frames.push_back(frame_image(ImageSet{8, 8, dec.x}, j));
  const MetricsReport want = measure_images(set.x, image_set_from_frames(frames).x, 8, 8, 8 * enc.bytes.size());
  EXPECT_EQ(report["rmse"].get<double>(), want.rmse);
  EXPECT_EQ(report["psnr"].get<double>(), *want.psnr);
  EXPECT_EQ(report["bits"].get<std::uint64_t>(), want.bits);
  EXPECT_EQ(report["rate"].get<double>(), want.rate);

  const auto summary = nlohmann::json::parse(c.out);
  EXPECT_EQ(summary["bytes"].get<size_t>(), enc.bytes.size());
  EXPECT_EQ(summary["p_b_achieved"].get<double>(), enc.factorization.p_b_achieved);
}

TEST_F(Cli, MeshRoundtripAndMeasure) {
  ASSERT_EQ(run({"synth", "--kind", "mesh", "--seed", "5", "--vertices", "16", "--frames", "6", "--out", path("src")}).code, 0);
  const auto src = files("src");
  const CliResult c =
      run(Args{"compress-mesh", "--k", "3", "--step-b", "0.001", "--step-c", "0.01", "--out", path("m.slrm")} + src);
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(nlohmann::json::parse(c.out)["axes"].size(), 3u);
  ASSERT_EQ(run({"decompress-mesh", path("m.slrm"), "--faces", src[0], "--out", path("dec")}).code, 0);
  const CliResult m =
      run(Args{"measure", "--container", path("m.slrm"), "--reference"} + src + Args{"--decoded"} + files("dec"));
  ASSERT_EQ(m.code, 0) << m.err;
  const auto report = nlohmann::json::parse(m.out);
  EXPECT_TRUE(report["kg_error"].is_number());
  EXPECT_TRUE(report["psnr"].is_null());
  EXPECT_EQ(report["rate"].get<double>(), 8.0 * static_cast<double>(fs::file_size(path("m.slrm"))) / (16.0 * 6.0));
}

TEST_F(Cli, MeasureIdenticalInputs) {
  ASSERT_EQ(
      run({"synth", "--seed", "1", "--width", "4", "--height", "4", "--frames", "3", "--rank", "1", "--out", path("i")}).code,
      0);
  const CliResult m = run(Args{"measure", "--bits", "96", "--reference"} + files("i") + Args{"--decoded"} + files("i"));
  ASSERT_EQ(m.code, 0) << m.err;
  const auto r = nlohmann::json::parse(m.out);
  EXPECT_EQ(r["rmse"].get<double>(), 0.0);
  EXPECT_TRUE(r["infinite_psnr"].get<bool>());
  EXPECT_EQ(r["rate"].get<double>(), 2.0);

  ASSERT_EQ(run({"synth", "--kind", "mesh", "--vertices", "9", "--frames", "3", "--out", path("m")}).code, 0);
  const CliResult mm = run(Args{"measure", "--reference"} + files("m") + Args{"--decoded"} + files("m"));
  ASSERT_EQ(mm.code, 0) << mm.err;
  EXPECT_EQ(nlohmann::json::parse(mm.out)["kg_error"].get<double>(), 0.0);
}

TEST_F(Cli, RdSweepWritesCsvAndFront) {
  ASSERT_EQ(run({"synth", "--seed", "2", "--width", "8", "--height", "8", "--frames", "8", "--rank", "2", "--out", path("s")}).code, 0);
  const CliResult r = run(Args{"rd-sweep", "--k", "2", "--target-pb", "0.5,0.7", "--tol-pb", "0.05", "--step-b",
                               "0.01,0.001", "--step-c", "1,0.1", "--csv", path("all.csv"), "--out", path("front.csv")} +
                          files("s"));
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(slurp(path("all.csv")));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, kSweepCsvHeader);
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 4);
  EXPECT_TRUE(fs::exists(path("front.csv")));
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"synth", "--out", path("x"), "--bogus"}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"compress-images", "--out", path("a"), "--gamma", "1", "--target-pb", "0.5", "x.pgm"}).code, 1);
  EXPECT_EQ(run({"rd-sweep", "--k", "2", "--target-pb", "0.5", "--step-b", "0.1,0.2", "--step-c", "1", "--csv", path("c"),
                 "x.pgm"})
                .code,
            1);

  ASSERT_EQ(run({"synth", "--width", "4", "--height", "4", "--frames", "3", "--rank", "1", "--out", path("i")}).code, 0);
  EXPECT_EQ(run(Args{"compress-images", "--transform", "wavelet", "--out", path("a")} + files("i")).code, 1);
  EXPECT_EQ(run(Args{"compress-images", "--transform", "gt", "--out", path("a")} + files("i")).code, 1);
  EXPECT_EQ(run(Args{"compress-images", "--alpha", "0.5", "--out", path("a")} + files("i")).code, 1);
}

TEST_F(Cli, DataErrors) {
  EXPECT_EQ(run({"compress-images", "--out", path("a"), path("missing.pgm")}).code, 2);
  std::ofstream(path("junk.slrm")) << "not a container";
  const CliResult r = run({"decompress-images", path("junk.slrm"), "--out", path("d")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("BadMagic"), std::string::npos);

  ASSERT_EQ(run({"synth", "--kind", "mesh", "--vertices", "12", "--frames", "3", "--out", path("m")}).code, 0);
  ASSERT_EQ(run({"synth", "--kind", "mesh", "--vertices", "16", "--frames", "3", "--out", path("other")}).code, 0);
  ASSERT_EQ(run(Args{"compress-mesh", "--k", "1", "--out", path("m.slrm")} + files("m")).code, 0);
  const CliResult bad = run({"decompress-mesh", path("m.slrm"), "--faces", files("other")[0], "--out", path("d2")});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("DigestMismatch"), std::string::npos);
}

TEST_F(Cli, NotConvergedExitsThreeAndStillWrites) {
  ASSERT_EQ(run({"synth", "--width", "8", "--height", "8", "--frames", "6", "--rank", "2", "--out", path("i")}).code, 0);
  const CliResult r =
      run(Args{"compress-images", "--k", "2", "--gamma", "1", "--max-iters", "3", "--out", path("a.slrm")} + files("i"));
  EXPECT_EQ(r.code, 3);
  EXPECT_FALSE(nlohmann::json::parse(r.out)["converged"].get<bool>());
  EXPECT_TRUE(fs::exists(path("a.slrm")));
}
