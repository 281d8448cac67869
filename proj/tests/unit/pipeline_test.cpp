#include <gtest/gtest.h>

#include "cvpyr/error.hpp"
#include "cvpyr/pipeline.hpp"
#include "cvpyr/synth.hpp"
#include "support.hpp"

using namespace cvpyr;

namespace {

std::vector<View> views_of(const SyntheticScene& s) {
  std::vector<View> v;
  for (std::size_t i = 0; i < s.images.size(); ++i) v.push_back({s.images[i], s.cameras[i]});
  return v;
}

const SyntheticScene& small_plane() {
  static const SyntheticScene s = [] {
    SceneSpec spec = plane_scene(600);
    spec.width = 128;
    spec.height = 96;
    spec.focal = 100;
    spec.supersample = 1;
    return render_scene(spec, 7);
  }();
  return s;
}

const SyntheticScene& full_plane() {
  static const SyntheticScene s = render_scene(plane_scene(600), 7);
  return s;
}

}  // namespace

TEST(Pipeline, StagesFollowThePyramid) {
  const auto views = views_of(small_plane());
  const PipelineResult r = run_pipeline(views, PipelineConfig{});
  ASSERT_EQ(r.stages.size(), 3u);
  const int hyps[] = {48, 32, 8};
  for (int l = 0; l < 3; ++l) {
    EXPECT_EQ(r.stages[l].stage, l + 1);
    EXPECT_EQ(r.stages[l].width, 32 << l);
    EXPECT_EQ(r.stages[l].height, 24 << l);
    EXPECT_EQ(r.stages[l].hypotheses, hyps[l]);
  }
  EXPECT_EQ(r.stages[1].strategy, Strategy::kVarianceInterval);
  EXPECT_EQ(r.stages[2].strategy, Strategy::kEpipolar);
  EXPECT_EQ(r.depth.width(), 128);
}

TEST(Pipeline, FiveLevels) {
  PipelineConfig c;
  c.num_levels = 5;
  const PipelineResult r = run_pipeline(views_of(full_plane()), c);
  ASSERT_EQ(r.stages.size(), 5u);
  EXPECT_EQ(r.stages[0].width, 16);
  EXPECT_EQ(r.stages[0].height, 12);
  EXPECT_EQ(r.stages[4].hypotheses, 8);
}

TEST(Pipeline, AufDoesNotTouchTheFirstStage) {
  const auto views = views_of(small_plane());
  PipelineConfig on, off;
  off.auf = false;
  const PipelineResult a = run_pipeline(views, on), b = run_pipeline(views, off);
  EXPECT_TRUE(a.stages[0].depth == b.stages[0].depth);
  EXPECT_TRUE(a.stages[0].confidence == b.stages[0].confidence);
}

TEST(Pipeline, ThreadCountDoesNotChangeOutput) {
  const auto views = views_of(small_plane());
  PipelineConfig one, two;
  two.threads = 2;
  EXPECT_TRUE(run_pipeline(views, one).depth == run_pipeline(views, two).depth);
}

TEST(Pipeline, PeakVolumeMemoryStaysWithinTwiceTheLargestCostVolume) {
  const PipelineResult r = run_pipeline(views_of(full_plane()), PipelineConfig{});
  EXPECT_GT(r.largest_cost_volume_bytes, 0u);
  EXPECT_LE(r.peak_volume_bytes, 2 * r.largest_cost_volume_bytes);
}

TEST(Pipeline, WindowsNarrowFromStageTwoOn) {
  const PipelineResult r = run_pipeline(views_of(full_plane()), PipelineConfig{});
  for (std::size_t l = 2; l < r.stages.size(); ++l) {
    EXPECT_LE(r.stages[l].width_median, r.stages[l - 1].width_median) << l;
  }
  EXPECT_LT(r.stages[1].width_median, r.stages[0].width_median);
}

TEST(Pipeline, UniformScheduleUsesHandcraftedWindows) {
  PipelineConfig c;
  c.schedule = Schedule::kUniformOnly;
  const PipelineResult r = run_pipeline(views_of(small_plane()), c);
  EXPECT_NEAR(r.stages[1].width_median, 40.0, 1e-3);
  EXPECT_NEAR(r.stages[2].width_median, 20.0, 1e-3);
  EXPECT_EQ(r.stages[2].strategy, Strategy::kUniform);
}

TEST(Pipeline, SchedulesShareTheFirstStage) {
  const auto views = views_of(small_plane());
  PipelineConfig c;
  const PipelineResult full = run_pipeline(views, c);
  for (Schedule s : {Schedule::kUniformOnly, Schedule::kUniformThenVariance, Schedule::kUniformThenEpipolar}) {
    c.schedule = s;
    EXPECT_TRUE(run_pipeline(views, c).stages[0].depth == full.stages[0].depth);
  }
}

TEST(Pipeline, AbortsWhenSourcesSeeNothing) {
  const auto k = test::intrinsics(50, 32, 24);
  std::vector<View> views = {{test::random_image(64, 48, 1, 1), test::shifted_camera(k, 0, 425, 1065)},
                             {test::random_image(64, 48, 1, 2), test::shifted_camera(k, 1e5, 425, 1065)}};
  EXPECT_THROW(run_pipeline(views, PipelineConfig{}), NumericalError);
}

TEST(Pipeline, RejectsBadInputs) {
  const auto k = test::intrinsics(50, 32, 24);
  std::vector<View> one = {{test::random_image(64, 48, 1, 1), test::shifted_camera(k, 0, 425, 1065)}};
  EXPECT_THROW(run_pipeline(one, PipelineConfig{}), InputError);
  std::vector<View> mismatched = one;
  mismatched.push_back({test::random_image(64, 40, 1, 1), test::shifted_camera(k, 10, 425, 1065)});
  EXPECT_THROW(run_pipeline(mismatched, PipelineConfig{}), InputError);
  std::vector<View> tiny = {{test::random_image(24, 24, 1, 1), test::shifted_camera(k, 0, 425, 1065)},
                            {test::random_image(24, 24, 1, 2), test::shifted_camera(k, 10, 425, 1065)}};
  EXPECT_THROW(run_pipeline(tiny, PipelineConfig{}), InputError);
}

TEST(Pipeline, AblationScoresEverySchedule) {
  const SyntheticScene& s = small_plane();
  const std::vector<Schedule> schedules = {Schedule::kUniformOnly, Schedule::kFull};
  const auto rows = ablation_run(views_of(s), PipelineConfig{}, schedules, s.gt_depths[0], s.interior_mask(0, 4), 20.0);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].schedule, Schedule::kFull);
  EXPECT_GT(rows[1].stats.pixels, 1000u);
  EXPECT_GT(rows[1].stats.within_1, 0.9);
}

TEST(Pipeline, IntervalCoverageGrowsWithAlpha) {
  const SyntheticScene& s = small_plane();
  const std::vector<double> alphas = {0.5, 1, 2, 4};
  const auto rows = calibrate_interval(views_of(s), PipelineConfig{}, alphas, s.gt_depths[0], s.interior_mask(0, 4));
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GE(rows[i].coverage, rows[i - 1].coverage);
    EXPECT_GT(rows[i].median_width, rows[i - 1].median_width);
  }
}
