#pragma once

#include <Eigen/Core>
#include <span>

#include "cvpyr/image.hpp"
#include "cvpyr/point_cloud.hpp"

namespace cvpyr {

struct DepthErrorStats {
  std::size_t pixels = 0;   // pixels evaluated (mask set, ground truth valid)
  std::size_t invalid = 0;  // evaluated pixels whose estimate is missing or non-finite
  double mean = 0.0;        // over valid estimates
  double median = 0.0;
  double within_1 = 0.0;    // fractions of evaluated pixels, invalid ones count as misses
  double within_2 = 0.0;
  double within_4 = 0.0;
};

/// Absolute depth error statistics over pixels where `mask` is set (all
/// pixels when `mask` is null) and the ground truth is positive.
DepthErrorStats eval_depth(const DepthMap& depth, const DepthMap& gt, double spacing,
                           const Mask* mask = nullptr);

struct CloudScores {
  double accuracy = 0.0;
  double completeness = 0.0;
  double overall = 0.0;
};

/// accuracy: mean over reconstructed points of the distance to the nearest
/// ground-truth sample; completeness: the reverse. Distances are truncated at
/// `d_max` when it is positive. overall = (accuracy + completeness) / 2.
/// Throws InputError when either cloud is empty.
CloudScores eval_cloud(std::span<const Eigen::Vector3d> cloud, std::span<const Eigen::Vector3d> gt,
                       double d_max, int threads = 1);

}  // namespace cvpyr
