#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cvpyr/error.hpp"
#include "cvpyr/metrics.hpp"
#include "cvpyr/synth.hpp"

using namespace cvpyr;

namespace {

SceneSpec small(SceneSpec s) {
  s.width = 64;
  s.height = 48;
  s.focal = 50;
  s.supersample = 1;
  return s;
}

double brute_nn(const Eigen::Vector3d& p, const std::vector<Eigen::Vector3d>& set) {
  double best = INFINITY;
  for (const auto& q : set) best = std::min(best, (p - q).norm());
  return best;
}

}  // namespace

TEST(Render, FrontoParallelPlaneHasConstantDepth) {
  const SyntheticScene s = render_scene(small(plane_scene(600)), 1);
  ASSERT_EQ(s.cameras.size(), 3u);
  for (std::size_t i = 0; i < s.gt_depths[0].size(); ++i) EXPECT_NEAR(s.gt_depths[0][i], 600.0, 1e-9);
  EXPECT_TRUE(s.cameras[0].rotation.isApprox(Eigen::Matrix3d::Identity()));
}

TEST(Render, IsDeterministicPerSeed) {
  const SceneSpec spec = small(sphere_scene());
  const SyntheticScene a = render_scene(spec, 9), b = render_scene(spec, 9), c = render_scene(spec, 10);
  for (std::size_t v = 0; v < a.images.size(); ++v) {
    EXPECT_EQ(a.images[v].data, b.images[v].data);
    EXPECT_TRUE(a.gt_depths[v] == b.gt_depths[v]);
  }
  EXPECT_NE(a.images[0].data, c.images[0].data);
}

TEST(Render, SphereSilhouetteMatchesQuadraticRoot) {
  const SceneSpec spec = small(sphere_scene());
  const SyntheticScene s = render_scene(spec, 1);
  const SphereSurface sp = spec.spheres[0];
  const auto& gt = s.gt_depths[0];
  const double cx = spec.width / 2.0, cy = spec.height / 2.0;
  int checked = 0;
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 1; x < spec.width; ++x) {
      const bool edge = std::abs(gt(x, y) - gt(x - 1, y)) > 100;
      if (!edge) continue;
      const int xs = gt(x, y) < gt(x - 1, y) ? x : x - 1;  // sphere side
      // Ray (a, b, 1) t through the pixel centre; t is the camera depth.
      const Eigen::Vector3d dir((xs + 0.5 - cx) / spec.focal, (y + 0.5 - cy) / spec.focal, 1.0);
      const double qa = dir.squaredNorm();
      const double qb = -2.0 * dir.dot(sp.center);
      const double qc = sp.center.squaredNorm() - sp.radius * sp.radius;
      const double disc = qb * qb - 4 * qa * qc;
      ASSERT_GE(disc, 0.0);
      const double t = (-qb - std::sqrt(disc)) / (2 * qa);
      EXPECT_NEAR(gt(xs, y), t, 1e-9);
      ++checked;
    }
  }
  EXPECT_GT(checked, 10);
}

TEST(Render, CameraRigIsSymmetric) {
  const auto cams = scene_cameras(plane_scene());
  ASSERT_EQ(cams.size(), 3u);
  EXPECT_NEAR(cams[1].center().x(), 60.0, 1e-9);
  EXPECT_NEAR(cams[2].center().x(), -60.0, 1e-9);
  SceneSpec ring = plane_scene();
  ring.rig = Rig::kRing;
  ring.cameras = 5;
  for (const auto& c : scene_cameras(ring)) {
    if (c.center().norm() > 0) EXPECT_NEAR(c.center().head<2>().norm(), 60.0, 1e-9);
  }
}

TEST(Render, SurfaceOutsideDepthRangeIsAnError) {
  SceneSpec spec = small(plane_scene(300));
  EXPECT_THROW(render_scene(spec, 1), InputError);
  spec = small(plane_scene(600));
  spec.cameras = 1;
  EXPECT_THROW(render_scene(spec, 1), InputError);
}

TEST(Render, TexturelessBandIsFlat) {
  const SyntheticScene s = render_scene(small(band_scene()), 1);
  const auto& img = s.images[0];
  // Band covers world x in [-60, 60) at depth 600: pixels within +-5 of centre.
  const float v = img.at(32, 24);
  for (int x = 29; x < 35; ++x) EXPECT_NEAR(img.at(x, 24), v, 1e-6);
}

TEST(SceneSpecText, RoundTrips) {
  SceneSpec spec = sphere_scene();
  spec.bands.push_back({-10.5, 3.25});
  spec.steps.push_back({500, 800, 12.5});
  spec.rig = Rig::kRing;
  const SceneSpec back = parse_scene_spec(format_scene_spec(spec));
  EXPECT_EQ(format_scene_spec(back), format_scene_spec(spec));
  EXPECT_EQ(back.spheres.size(), 1u);
  EXPECT_EQ(back.bands[0].x1, 3.25);
}

TEST(SceneSpecText, RejectsBadInput) {
  EXPECT_THROW(parse_scene_spec("widht = 10\nplane = 0 0 600 0 0 -1\n"), InputError);
  EXPECT_THROW(parse_scene_spec("width = ten\nplane = 0 0 600 0 0 -1\n"), InputError);
  EXPECT_THROW(parse_scene_spec("sphere = 0 0 600\n"), InputError);
  EXPECT_THROW(parse_scene_spec("width = 64\n"), InputError);
  const SceneSpec ok = parse_scene_spec("# comment\nplane = 0 0 600 0 0 -1  # trailing\n");
  EXPECT_EQ(ok.planes.size(), 1u);
}

TEST(EvalDepth, Examples) {
  DepthMap gt(8, 6, 600.0);
  auto s = eval_depth(gt, gt, 10.0);
  EXPECT_EQ(s.pixels, 48u);
  EXPECT_EQ(s.within_1, 1.0);
  EXPECT_EQ(s.within_4, 1.0);
  EXPECT_EQ(s.mean, 0.0);
  DepthMap off(8, 6, 605.0);
  s = eval_depth(off, gt, 10.0);
  EXPECT_EQ(s.within_1, 1.0);
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  DepthMap holes = gt;
  holes(0, 0) = 0;
  holes(1, 0) = NAN;
  s = eval_depth(holes, gt, 10.0);
  EXPECT_EQ(s.invalid, 2u);
  EXPECT_DOUBLE_EQ(s.within_1, 46.0 / 48.0);
}

TEST(EvalDepth, MatchesNaiveOracle) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 15);
  DepthMap gt(20, 15), d(20, 15);
  Mask m(20, 15);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    gt[i] = (i % 17 == 0) ? 0.0 : 600 + n(rng);
    d[i] = gt[i] + n(rng);
    m[i] = i % 5 != 0;
  }
  const double spacing = 13.6;
  std::vector<double> errs;
  std::size_t count = 0, w1 = 0, w2 = 0, w4 = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!m[i] || !(gt[i] > 0)) continue;
    ++count;
    const double e = std::abs(d[i] - gt[i]);
    errs.push_back(e);
    w1 += e <= spacing;
    w2 += e <= 2 * spacing;
    w4 += e <= 4 * spacing;
  }
  std::sort(errs.begin(), errs.end());
  double mean = 0;
  for (double e : errs) mean += e / errs.size();
  const std::size_t h = errs.size() / 2;
  const double median = errs.size() % 2 ? errs[h] : 0.5 * (errs[h - 1] + errs[h]);
  const auto s = eval_depth(d, gt, spacing, &m);
  EXPECT_EQ(s.pixels, count);
  EXPECT_NEAR(s.mean, mean, 1e-9);
  EXPECT_NEAR(s.median, median, 1e-9);
  EXPECT_NEAR(s.within_1, static_cast<double>(w1) / count, 1e-9);
  EXPECT_NEAR(s.within_2, static_cast<double>(w2) / count, 1e-9);
  EXPECT_NEAR(s.within_4, static_cast<double>(w4) / count, 1e-9);
}

TEST(EvalCloud, IdenticalCloudsScoreZero) {
  std::vector<Eigen::Vector3d> a;
  for (int i = 0; i < 100; ++i) a.emplace_back(i, i * 0.5, 600);
  const auto s = eval_cloud(a, a, 20);
  EXPECT_EQ(s.accuracy, 0.0);
  EXPECT_EQ(s.completeness, 0.0);
  EXPECT_EQ(s.overall, 0.0);
  EXPECT_THROW(eval_cloud({}, a, 20), InputError);
}

TEST(EvalCloud, NormalShiftOfDensePlane) {
  std::vector<Eigen::Vector3d> gt, shifted;
  for (int y = 0; y < 60; ++y)
    for (int x = 0; x < 60; ++x) {
      gt.emplace_back(x * 0.5, y * 0.5, 600);
      shifted.emplace_back(x * 0.5, y * 0.5, 600.3);
    }
  const auto s = eval_cloud(shifted, gt, 20);
  EXPECT_NEAR(s.accuracy, 0.3, 1e-9);
  EXPECT_NEAR(s.completeness, 0.3, 1e-9);
  EXPECT_NEAR(s.overall, 0.3, 1e-9);
}

TEST(EvalCloud, MatchesBruteForce) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-50, 50);
  std::vector<Eigen::Vector3d> a(500), b(500);
  for (auto& p : a) p = {u(rng), u(rng), u(rng)};
  for (auto& p : b) p = {u(rng), u(rng), u(rng)};
  const double dmax = 12.0;
  double acc = 0, comp = 0;
  for (const auto& p : a) acc += std::min(brute_nn(p, b), dmax) / 500;
  for (const auto& p : b) comp += std::min(brute_nn(p, a), dmax) / 500;
  for (int threads : {1, 3}) {
    const auto s = eval_cloud(a, b, dmax, threads);
    EXPECT_NEAR(s.accuracy, acc, 1e-9);
    EXPECT_NEAR(s.completeness, comp, 1e-9);
    EXPECT_NEAR(s.overall, 0.5 * (acc + comp), 1e-9);
  }
}

TEST(EvalCloud, OutliersRaiseAccuracyOnly) {
  std::vector<Eigen::Vector3d> gt, rec;
  for (int i = 0; i < 200; ++i) {
    gt.emplace_back(i, 0, 600);
    rec.emplace_back(i + 0.2, 0, 600);
  }
  const auto before = eval_cloud(rec, gt, 20);
  rec.emplace_back(0, 500, 600);
  const auto after = eval_cloud(rec, gt, 20);
  EXPECT_GT(after.accuracy, before.accuracy);
  EXPECT_LE(after.completeness, before.completeness);
}
