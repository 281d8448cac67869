#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include "cvpyr/config.hpp"
#include "cvpyr/error.hpp"
#include "cvpyr/io.hpp"
#include "cvpyr/pyramid.hpp"
#include "support.hpp"

using namespace cvpyr;
using cvpyr::test::TempDir;

namespace {

void write_bytes(const fs::path& p, const std::string& header, const std::vector<unsigned char>& payload) {
  std::ofstream out(p, std::ios::binary);
  out << header;
  out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
}

std::vector<unsigned char> float_bytes(const std::vector<float>& v, bool big_endian) {
  std::vector<unsigned char> out;
  for (float f : v) {
    unsigned char b[4];
    std::memcpy(b, &f, 4);
    if (big_endian) std::reverse(b, b + 4);
    out.insert(out.end(), b, b + 4);
  }
  return out;
}

void write_cam(const fs::path& p, const std::string& extrinsic, const std::string& depth_line) {
  std::ofstream out(p);
  out << "extrinsic\n" << extrinsic << "\n\nintrinsic\n100 0 32\n0 100 24\n0 0 1\n\n" << depth_line << "\n";
}

const char* kIdentity = "1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1";

}  // namespace

TEST(Pfm, RoundTripIsBitExact) {
  TempDir dir;
  Image img(2, 2, 1);
  img.data = {1.5f, -0.0f, 3.0e-38f, 123456.789f};
  write_pfm(dir / "a.pfm", img);
  const Image back = read_pfm(dir / "a.pfm");
  ASSERT_EQ(back.width, 2);
  ASSERT_EQ(back.height, 2);
  EXPECT_EQ(0, std::memcmp(back.data.data(), img.data.data(), img.data.size() * sizeof(float)));
}

TEST(Pfm, ColourRoundTrip) {
  TempDir dir;
  const Image img = test::random_image(5, 3, 3, 4);
  write_pfm(dir / "c.pfm", img);
  EXPECT_EQ(read_pfm(dir / "c.pfm"), img);
}

TEST(Pfm, NegativeScaleMeansLittleEndianAndRowsAreFlipped) {
  TempDir dir;
  // Stored bottom-up: the first stored row is the image's last row.
  write_bytes(dir / "le.pfm", "Pf\n2 2\n-1.0\n", float_bytes({3, 4, 1, 2}, false));
  const Image img = read_pfm(dir / "le.pfm");
  EXPECT_EQ(img.at(0, 0), 1.0f);
  EXPECT_EQ(img.at(1, 0), 2.0f);
  EXPECT_EQ(img.at(0, 1), 3.0f);
  EXPECT_EQ(img.at(1, 1), 4.0f);
}

TEST(Pfm, PositiveScaleMeansBigEndian) {
  TempDir dir;
  write_bytes(dir / "be.pfm", "Pf\n2 1\n1.0\n", float_bytes({0.25f, -7.0f}, true));
  const Image img = read_pfm(dir / "be.pfm");
  EXPECT_EQ(img.at(0, 0), 0.25f);
  EXPECT_EQ(img.at(1, 0), -7.0f);
}

TEST(Pfm, TruncatedPayloadIsRejected) {
  TempDir dir;
  write_bytes(dir / "t.pfm", "Pf\n2 2\n-1.0\n", float_bytes({1, 2, 3}, false));
  EXPECT_THROW(read_pfm(dir / "t.pfm"), InputError);
}

TEST(Pfm, NanIsRejected) {
  TempDir dir;
  write_bytes(dir / "n.pfm", "Pf\n2 1\n-1.0\n", float_bytes({1.0f, std::nanf("")}, false));
  EXPECT_THROW(read_pfm(dir / "n.pfm"), InputError);
}

TEST(Pfm, MalformedHeaderIsRejected) {
  TempDir dir;
  write_bytes(dir / "m.pfm", "P7\n2 1\n-1.0\n", float_bytes({1, 2}, false));
  EXPECT_THROW(read_pfm(dir / "m.pfm"), InputError);
  write_bytes(dir / "z.pfm", "Pf\n2 1\n0\n", float_bytes({1, 2}, false));
  EXPECT_THROW(read_pfm(dir / "z.pfm"), InputError);
}

TEST(EightBit, PgmAndPngRoundTripQuantizedSamples) {
  TempDir dir;
  Image img(4, 3, 1);
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = static_cast<float>(i * 20) / 255.0f;
  write_pnm(dir / "a.pgm", img);
  write_png(dir / "a.png", img);
  for (const char* name : {"a.pgm", "a.png"}) {
    const Image back = read_image(dir / name);
    ASSERT_EQ(back.channels, 1);
    for (std::size_t i = 0; i < img.data.size(); ++i) EXPECT_NEAR(back.data[i], img.data[i], 1e-6) << name;
  }
  const Image rgb = test::random_image(6, 5, 3, 9);
  write_png(dir / "rgb.png", rgb);
  const Image back = read_png(dir / "rgb.png");
  ASSERT_EQ(back.channels, 3);
  for (std::size_t i = 0; i < rgb.data.size(); ++i) EXPECT_NEAR(back.data[i], rgb.data[i], 0.5 / 255 + 1e-6);
}

TEST(Gray, LumaWeights) {
  Image rgb(1, 1, 3);
  rgb.data = {1.0f, 0.5f, 0.25f};
  EXPECT_NEAR(to_gray(rgb).at(0, 0), 0.299 + 0.587 * 0.5 + 0.114 * 0.25, 1e-6);
}

TEST(CameraDtu, IdentityExtrinsicGivesZeroTranslation) {
  TempDir dir;
  write_cam(dir / "c.txt", kIdentity, "425 2.5");
  const CameraParams cam = read_camera_dtu(dir / "c.txt");
  EXPECT_TRUE(cam.rotation.isIdentity(0));
  EXPECT_EQ(cam.translation, Eigen::Vector3d::Zero());
  EXPECT_EQ(cam.intrinsics(0, 0), 100.0);
  EXPECT_EQ(cam.intrinsics(0, 2), 32.0);
}

TEST(CameraDtu, DepthLineVariants) {
  TempDir dir;
  write_cam(dir / "four.txt", kIdentity, "425 2.5 192 1065");
  EXPECT_EQ(read_camera_dtu(dir / "four.txt").depth_min, 425.0);
  EXPECT_EQ(read_camera_dtu(dir / "four.txt").depth_max, 1065.0);
  write_cam(dir / "three.txt", kIdentity, "425 2.5 257");
  EXPECT_DOUBLE_EQ(read_camera_dtu(dir / "three.txt").depth_max, 425 + 2.5 * 256);
  write_cam(dir / "two.txt", kIdentity, "425 2.5");
  EXPECT_DOUBLE_EQ(read_camera_dtu(dir / "two.txt").depth_max, 425 + 2.5 * 191);
}

TEST(CameraDtu, RejectsBadRotationAndDepth) {
  TempDir dir;
  write_cam(dir / "r.txt", "1.1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1", "425 2.5");
  EXPECT_THROW(read_camera_dtu(dir / "r.txt"), InputError);
  write_cam(dir / "d.txt", kIdentity, "-5 2.5");
  EXPECT_THROW(read_camera_dtu(dir / "d.txt"), InputError);
  write_cam(dir / "m.txt", kIdentity, "");
  EXPECT_THROW(read_camera_dtu(dir / "m.txt"), InputError);
}

TEST(CameraDtu, RoundTripIsBitExact) {
  TempDir dir;
  const CameraParams cam = look_at({12.5, -3.25, 7.0}, {0.1, 0.2, 600.0}, {0, 1, 0},
                                   test::intrinsics(361.54, 82.9, 66.1), 425.0, 1065.0);
  write_camera_dtu(dir / "c.txt", cam);
  EXPECT_EQ(read_camera_dtu(dir / "c.txt"), cam);
}

TEST(Config, Defaults) {
  const PipelineConfig c;
  EXPECT_EQ(c.hypotheses_at(1), 48);
  EXPECT_EQ(c.hypotheses_at(2), 32);
  EXPECT_EQ(c.hypotheses_at(3), 8);
  EXPECT_EQ(c.hypotheses_at(5), 8);
  EXPECT_EQ(c.lambda_sf, 10.0);
  EXPECT_EQ(c.lambda_c, 80.0);
  EXPECT_EQ(c.stage_weight_at(1), 0.5);
  EXPECT_EQ(c.stage_weight_at(3), 2.0);
  EXPECT_EQ(c.alpha_c, 13.0);
  EXPECT_EQ(c.beta_c, 9.0);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ParseAndFormatRoundTrip) {
  const PipelineConfig c = parse_config(
      "# comment\nlevels = 4\nhypotheses = 40, 16, 8, 4\nstrategy = dhs1+dhs3\nauf = off\n"
      "focal_weight = conventional\nscore_scale = 12.5\n");
  EXPECT_EQ(c.num_levels, 4);
  EXPECT_EQ(c.hypotheses_at(4), 4);
  EXPECT_EQ(c.schedule, Schedule::kUniformThenEpipolar);
  EXPECT_FALSE(c.auf);
  EXPECT_EQ(c.focal_weight, FocalWeight::kConventional);
  const PipelineConfig again = parse_config(format_config(c));
  EXPECT_EQ(format_config(again), format_config(c));
  EXPECT_EQ(again.score_scale, 12.5);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_config("levels_typo = 3\n"), InputError);
  EXPECT_THROW(parse_config("levels = 1\n"), InputError);
  EXPECT_THROW(parse_config("channels = 8\ngroups = 3\n"), InputError);
  EXPECT_THROW(parse_config("hypotheses = 48, 1\n"), InputError);
  EXPECT_THROW(parse_config("lambda_c = -1\n"), InputError);
  EXPECT_THROW(parse_config("levels\n"), InputError);
}

TEST(Pyramid, ConstantImageStaysConstant) {
  const Image img(64, 48, 1, 0.37f);
  const ImagePyramid p = build_pyramid(img, CameraParams{}, 3);
  for (const auto& level : p.levels) {
    for (float v : level.data) EXPECT_FLOAT_EQ(v, 0.37f);
  }
}

TEST(Pyramid, DimensionsAndCoarsestLevel) {
  const Image img(320, 256, 1, 0.5f);
  const ImagePyramid p3 = build_pyramid(img, CameraParams{}, 3);
  EXPECT_EQ(p3.levels.front().width, 80);
  EXPECT_EQ(p3.levels.front().height, 64);
  const ImagePyramid p4 = build_pyramid(img, CameraParams{}, 4);
  EXPECT_EQ(p4.levels.front().width, 40);
  EXPECT_EQ(p4.levels.front().height, 32);
  EXPECT_EQ(p4.finest().width, 320);
}

TEST(Pyramid, OddDimensionsAreCroppedNeverPadded) {
  const Image img = test::random_image(101, 67, 1, 3);
  const ImagePyramid p = build_pyramid(img, CameraParams{}, 3);
  EXPECT_EQ(p.finest().width, 100);
  EXPECT_EQ(p.finest().height, 64);
  EXPECT_EQ(p.levels.front().width, 25);
  EXPECT_EQ(p.levels.front().height, 16);
  EXPECT_EQ(p.finest().at(99, 63), img.at(99, 63));
}

TEST(Pyramid, TooSmallForLevelsIsRejected) {
  EXPECT_THROW(build_pyramid(Image(28, 28, 1), CameraParams{}, 3), InputError);
  EXPECT_THROW(build_pyramid(Image(64, 64, 1), CameraParams{}, 1), InputError);
  EXPECT_NO_THROW(build_pyramid(Image(32, 32, 1), CameraParams{}, 3));
}

TEST(Pyramid, FocalScaling) {
  CameraParams cam;
  cam.intrinsics = test::intrinsics(100, 32, 24);
  const ImagePyramid p = build_pyramid(Image(64, 48, 1), cam, 2);
  EXPECT_EQ(p.cameras.front().intrinsics(0, 0), 50.0);
  EXPECT_EQ(p.cameras.front().intrinsics(1, 2), 12.0);
}

TEST(Pyramid, MeanIsPreservedAtEveryLevel) {
  const Image img = test::random_image(128, 96, 1, 11);
  const ImagePyramid p = build_pyramid(img, CameraParams{}, 4);
  auto mean = [](const Image& i) {
    double s = 0;
    for (float v : i.data) s += v;
    return s / static_cast<double>(i.data.size());
  };
  const double finest = mean(p.finest());
  for (const auto& level : p.levels) EXPECT_NEAR(mean(level), finest, 1e-6);
}

TEST(Pyramid, ProjectionScalesWithLevel) {
  const CameraParams cam = look_at({30, -10, 0}, {0, 0, 600}, {0, 1, 0}, test::intrinsics(200, 128, 96), 425, 1065);
  const ImagePyramid p = build_pyramid(Image(256, 192, 1), cam, 4);
  const Eigen::Vector3d x(17.0, -42.0, 650.0);
  const Eigen::Vector2d fine = *p.cameras.back().project(x);
  for (int j = 0; j < p.num_levels(); ++j) {
    const double s = std::ldexp(1.0, -(p.num_levels() - 1 - j));
    EXPECT_LT((*p.cameras[j].project(x) - fine * s).norm(), 1e-9);
  }
}

TEST(Pyramid, BoxFilterAgreesWithCameraScaling) {
  // A pixel-centre sample of a linear ramp equals the ramp at the scaled centre.
  Image img(16, 16, 1);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) img.at(x, y) = static_cast<float>((x + 0.5) / 16.0);
  const Image half = downsample2(img);
  for (int x = 0; x < 8; ++x) EXPECT_NEAR(half.at(x, 3), (2.0 * (x + 0.5)) / 16.0, 1e-6);
}
