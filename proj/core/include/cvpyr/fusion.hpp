#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>

#include "cvpyr/camera.hpp"
#include "cvpyr/image.hpp"
#include "cvpyr/point_cloud.hpp"

namespace cvpyr {

/// One view's depth estimate, camera, and optional colour source.
struct FusionView {
  const DepthMap* depth = nullptr;
  CameraParams camera;
  const Image* color = nullptr;  // grey or RGB, same size as depth; may be null
};

struct FusionParams {
  double tau_px = 1.0;
  double tau_rel = 0.01;
  int min_support = 2;
  /// Edge of the dedup voxel in scene units; <= 0 disables dedup.
  double voxel_size = 0.0;
};

struct Consistency {
  /// Number of other views agreeing with each reference pixel.
  Grid<int> support;
  /// Mean of the reference depth and every supporting view's re-projected depth.
  DepthMap fused_depth;
};

/// True when a bilinear depth lookup at continuous coordinates `q` has all four
/// taps inside a width x height map.
bool in_depth_sampling_domain(int width, int height, const Eigen::Vector2d& q);

/// Bilinear interpolation of inverse depth at `q`; empty outside the sampling
/// domain or when a tap holds a non-positive depth. Inverse depth is affine in
/// pixel coordinates on planes, so planar surfaces are reproduced exactly.
std::optional<double> sample_depth(const DepthMap& depth, const Eigen::Vector2d& q);

/// Forward-backward reprojection test of every pixel of view `ref_index`
/// against every other view. Pixel p at depth d is supported by view i when
/// its 3D point lands at q in view i, the point lifted from view i's depth at q
/// re-projects within tau_px of p, and its reference depth d' satisfies
/// |d' - d| / d < tau_rel.
Consistency consistency_check(int ref_index, std::span<const FusionView> views,
                              const FusionParams& params, int threads = 1);

/// Spatial hash merging points that fall in the same voxel. The first point
/// in a voxel keeps its position, colour follows the last writer and support
/// is summed.
class VoxelHash {
 public:
  explicit VoxelHash(double voxel_size) : voxel_(voxel_size) {}

  /// Returns true when the point opened a new voxel (or dedup is disabled).
  bool insert(const CloudPoint& point, PointCloud& cloud);

 private:
  using Key = std::array<std::int64_t, 3>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::size_t h = static_cast<std::size_t>(k[0]) * 73856093u;
      h ^= static_cast<std::size_t>(k[1]) * 19349663u;
      h ^= static_cast<std::size_t>(k[2]) * 83492791u;
      return h;
    }
  };

  double voxel_;
  std::unordered_map<Key, std::size_t, KeyHash> cells_;
};

struct FusionStatus {
  bool empty = false;
  std::size_t candidates = 0;  // pixels passing min_support before dedup
};

/// Runs the consistency check with every view as reference, back-projects
/// pixels with support >= min_support at their fused depth, and merges them
/// through a VoxelHash. Views are visited in order, pixels row-major.
PointCloud fuse(std::span<const FusionView> views, const FusionParams& params, int threads = 1,
                FusionStatus* status = nullptr);

/// Voxel downsampling with the same first-wins rule as fusion.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size);

}  // namespace cvpyr
