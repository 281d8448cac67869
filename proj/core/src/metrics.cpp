#include "cvpyr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cvpyr/error.hpp"
#include "cvpyr/kdtree.hpp"
#include "cvpyr/parallel.hpp"

namespace cvpyr {

DepthErrorStats eval_depth(const DepthMap& depth, const DepthMap& gt, double spacing, const Mask* mask) {
  if (!depth.same_shape(gt)) throw InputError("depth map and ground truth differ in size");
  if (mask != nullptr && !mask->same_shape(gt)) throw InputError("mask differs in size from ground truth");
  if (!(spacing > 0.0)) throw InputError("spacing must be positive");

  DepthErrorStats s;
  std::vector<double> errors;
  std::size_t n1 = 0, n2 = 0, n4 = 0;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      if (mask != nullptr && (*mask)(x, y) == 0) continue;
      const double g = gt(x, y);
      if (!(g > 0.0) || !std::isfinite(g)) continue;
      ++s.pixels;
      const double d = depth(x, y);
      if (!(d > 0.0) || !std::isfinite(d)) {
        ++s.invalid;
        continue;
      }
      const double e = std::abs(d - g);
      errors.push_back(e);
      if (e <= spacing) ++n1;
      if (e <= 2.0 * spacing) ++n2;
      if (e <= 4.0 * spacing) ++n4;
    }
  }
  if (s.pixels == 0) return s;
  const double total = static_cast<double>(s.pixels);
  s.within_1 = n1 / total;
  s.within_2 = n2 / total;
  s.within_4 = n4 / total;
  if (!errors.empty()) {
    double sum = 0.0;
    for (double e : errors) sum += e;
    s.mean = sum / static_cast<double>(errors.size());
    const std::size_t mid = errors.size() / 2;
    std::nth_element(errors.begin(), errors.begin() + mid, errors.end());
    s.median = errors[mid];
    if (errors.size() % 2 == 0) {
      const double lower = *std::max_element(errors.begin(), errors.begin() + mid);
      s.median = 0.5 * (s.median + lower);
    }
  }
  return s;
}

namespace {

double mean_distance(std::span<const Eigen::Vector3d> from, const KdTree& to, double d_max, int threads) {
  const int n = static_cast<int>(from.size());
  std::vector<double> dist(from.size());
  parallel_rows(n, threads, [&](int i) {
    double d = to.nearest(from[i]).distance;
    if (d_max > 0.0) d = std::min(d, d_max);
    dist[i] = d;
  });
  double sum = 0.0;
  for (double d : dist) sum += d;
  return sum / static_cast<double>(from.size());
}

}  // namespace

CloudScores eval_cloud(std::span<const Eigen::Vector3d> cloud, std::span<const Eigen::Vector3d> gt,
                       double d_max, int threads) {
  if (cloud.empty()) throw InputError("reconstructed cloud is empty");
  if (gt.empty()) throw InputError("ground-truth cloud is empty");
  const KdTree gt_tree(gt);
  const KdTree cloud_tree(cloud);
  CloudScores s;
  s.accuracy = mean_distance(cloud, gt_tree, d_max, threads);
  s.completeness = mean_distance(gt, cloud_tree, d_max, threads);
  s.overall = 0.5 * (s.accuracy + s.completeness);
  return s;
}

}  // namespace cvpyr
