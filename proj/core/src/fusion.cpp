#include "cvpyr/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "cvpyr/error.hpp"
#include "cvpyr/parallel.hpp"

namespace cvpyr {

bool in_depth_sampling_domain(int width, int height, const Eigen::Vector2d& q) {
  const double fx = q.x() - 0.5;
  const double fy = q.y() - 0.5;
  return fx >= 0.0 && fy >= 0.0 && fx <= width - 1 && fy <= height - 1;
}

std::optional<double> sample_depth(const DepthMap& depth, const Eigen::Vector2d& q) {
  if (!in_depth_sampling_domain(depth.width(), depth.height(), q)) return std::nullopt;
  const double fx = q.x() - 0.5;
  const double fy = q.y() - 0.5;
  int x0 = static_cast<int>(fx);
  int y0 = static_cast<int>(fy);
  if (x0 == depth.width() - 1) x0 = std::max(0, x0 - 1);
  if (y0 == depth.height() - 1) y0 = std::max(0, y0 - 1);
  const int x1 = std::min(x0 + 1, depth.width() - 1);
  const int y1 = std::min(y0 + 1, depth.height() - 1);
  const double d00 = depth(x0, y0);
  const double d10 = depth(x1, y0);
  const double d01 = depth(x0, y1);
  const double d11 = depth(x1, y1);
  if (!(d00 > 0.0 && d10 > 0.0 && d01 > 0.0 && d11 > 0.0)) return std::nullopt;
  const double ax = fx - x0;
  const double ay = fy - y0;
  const double inv = (1 - ay) * ((1 - ax) / d00 + ax / d10) + ay * ((1 - ax) / d01 + ax / d11);
  return 1.0 / inv;
}

Consistency consistency_check(int ref_index, std::span<const FusionView> views,
                              const FusionParams& params, int threads) {
  if (ref_index < 0 || static_cast<std::size_t>(ref_index) >= views.size()) {
    throw InputError("reference view index out of range");
  }
  if (!(params.tau_px > 0.0) || !(params.tau_rel > 0.0)) throw InputError("fusion thresholds must be positive");
  for (const auto& v : views) {
    if (v.depth == nullptr) throw InputError("fusion view without a depth map");
  }
  const FusionView& ref = views[ref_index];
  const DepthMap& ref_depth = *ref.depth;
  Consistency out{Grid<int>(ref_depth.width(), ref_depth.height(), 0),
                  DepthMap(ref_depth.width(), ref_depth.height(), 0.0)};

  parallel_rows(ref_depth.height(), threads, [&](int y) {
    for (int x = 0; x < ref_depth.width(); ++x) {
      const double d = ref_depth(x, y);
      if (!(d > 0.0) || !std::isfinite(d)) continue;
      const Eigen::Vector2d p(x + 0.5, y + 0.5);
      const Eigen::Vector3d world = ref.camera.backproject(p.x(), p.y(), d);
      double sum = d;
      int support = 0;
      for (std::size_t i = 0; i < views.size(); ++i) {
        if (static_cast<int>(i) == ref_index) continue;
        const FusionView& src = views[i];
        const auto q = src.camera.project(world);
        if (!q) continue;
        const auto d_src = sample_depth(*src.depth, *q);
        if (!d_src) continue;
        const Eigen::Vector3d back = src.camera.backproject(q->x(), q->y(), *d_src);
        const double d_back = ref.camera.world_to_camera(back).z();
        const auto p_back = ref.camera.project(back);
        if (!p_back) continue;
        if ((*p_back - p).norm() < params.tau_px && std::abs(d_back - d) / d < params.tau_rel) {
          sum += d_back;
          ++support;
        }
      }
      out.support(x, y) = support;
      out.fused_depth(x, y) = sum / (support + 1);
    }
  });
  return out;
}

bool VoxelHash::insert(const CloudPoint& point, PointCloud& cloud) {
  if (!(voxel_ > 0.0)) {
    cloud.points.push_back(point);
    return true;
  }
  const Key key = {static_cast<std::int64_t>(std::floor(point.position.x() / voxel_)),
                   static_cast<std::int64_t>(std::floor(point.position.y() / voxel_)),
                   static_cast<std::int64_t>(std::floor(point.position.z() / voxel_))};
  const auto [it, inserted] = cells_.try_emplace(key, cloud.points.size());
  if (inserted) {
    cloud.points.push_back(point);
    return true;
  }
  CloudPoint& existing = cloud.points[it->second];
  existing.color = point.color;
  existing.support += point.support;
  return false;
}

namespace {

std::array<std::uint8_t, 3> pixel_color(const Image* img, int x, int y) {
  if (img == nullptr) return {255, 255, 255};
  auto to8 = [](float v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)); };
  if (img->channels == 1) {
    const auto g = to8(img->at(x, y));
    return {g, g, g};
  }
  return {to8(img->at(x, y, 0)), to8(img->at(x, y, 1)), to8(img->at(x, y, 2))};
}

}  // namespace

PointCloud fuse(std::span<const FusionView> views, const FusionParams& params, int threads,
                FusionStatus* status) {
  if (params.min_support < 1) throw InputError("min_support must be >= 1");
  for (const auto& v : views) {
    if (v.color != nullptr && (v.color->width != v.depth->width() || v.color->height != v.depth->height())) {
      throw InputError("colour image does not match its depth map");
    }
  }
  PointCloud cloud;
  VoxelHash hash(params.voxel_size);
  std::size_t candidates = 0;
  for (std::size_t v = 0; v < views.size(); ++v) {
    const Consistency check = consistency_check(static_cast<int>(v), views, params, threads);
    const auto& cam = views[v].camera;
    for (int y = 0; y < check.support.height(); ++y) {
      for (int x = 0; x < check.support.width(); ++x) {
        const int support = check.support(x, y);
        if (support < params.min_support) continue;
        ++candidates;
        CloudPoint pt;
        pt.position = cam.backproject(x + 0.5, y + 0.5, check.fused_depth(x, y));
        pt.color = pixel_color(views[v].color, x, y);
        pt.support = support + 1;
        hash.insert(pt, cloud);
      }
    }
  }
  if (status != nullptr) {
    status->empty = cloud.empty();
    status->candidates = candidates;
  }
  return cloud;
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size) {
  PointCloud out;
  VoxelHash hash(voxel_size);
  for (const auto& p : cloud.points) hash.insert(p, out);
  return out;
}

}  // namespace cvpyr
