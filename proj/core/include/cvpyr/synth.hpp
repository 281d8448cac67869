#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cvpyr/camera.hpp"
#include "cvpyr/image.hpp"

namespace cvpyr {

struct PlaneSurface {
  Eigen::Vector3d point = {0, 0, 600};
  Eigen::Vector3d normal = {0, 0, -1};
};

struct SphereSurface {
  Eigen::Vector3d center = {0, 0, 600};
  double radius = 100;
};

/// Two fronto-parallel half planes joined by a riser wall at x = edge:
/// z = near for x < edge, z = far for x >= edge.
struct StepSurface {
  double near = 550;
  double far = 700;
  double edge = 0;
};

/// World-x range rendered with constant albedo (no texture).
struct Band {
  double x0 = 0;
  double x1 = 0;
};

enum class Rig { kLine, kRing };

/// Scene description. The reference camera (index 0) sits at the origin;
/// every camera looks at `target`.
///
/// Text form, one `key = value` per line, `#` comments, repeatable surface
/// and band keys:
///   width = 256          height = 192         focal = 200
///   cameras = 3          rig = line|ring      baseline = 60
///   target = 0 0 600     depth_min = 425      depth_max = 1065
///   texture_scale = 48   octaves = 5          ambient = 0.35
///   light = 0.3 -0.4 -1  supersample = 3
///   plane = px py pz nx ny nz
///   sphere = cx cy cz r
///   step = near far edge
///   band = x0 x1
struct SceneSpec {
  int width = 256;
  int height = 192;
  double focal = 200;
  int cameras = 3;
  Rig rig = Rig::kLine;
  double baseline = 60;
  Eigen::Vector3d target = {0, 0, 600};
  double depth_min = 425;
  double depth_max = 1065;
  double texture_scale = 48;
  int octaves = 5;
  double ambient = 0.35;
  Eigen::Vector3d light = {0.3, -0.4, -1.0};
  int supersample = 3;
  std::vector<PlaneSurface> planes;
  std::vector<SphereSurface> spheres;
  std::vector<StepSurface> steps;
  std::vector<Band> bands;

  void validate() const;
};

SceneSpec parse_scene_spec(const std::string& text);
SceneSpec read_scene_spec(const std::filesystem::path& path);
std::string format_scene_spec(const SceneSpec& spec);

/// Ready-made scenes used by tests and benchmarks.
SceneSpec plane_scene(double depth = 600);
SceneSpec step_scene();
SceneSpec sphere_scene();
/// Fronto-parallel plane with a textureless vertical band through the middle.
SceneSpec band_scene();

struct RayHit {
  double t = 0;  // ray parameter; equals camera depth for rays with unit z in camera frame
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
};

/// Nearest intersection with t > 0 of origin + t * dir against every surface.
std::optional<RayHit> cast_ray(const SceneSpec& spec, const Eigen::Vector3d& origin,
                               const Eigen::Vector3d& dir);

/// Analytic depth seen by `cam` through continuous pixel coordinates (u, v).
std::optional<double> surface_depth(const SceneSpec& spec, const CameraParams& cam, double u, double v);

/// Seeded fractal value noise in [0, 1].
double value_noise(const Eigen::Vector3d& p, int octaves, std::uint64_t seed);

std::vector<CameraParams> scene_cameras(const SceneSpec& spec);

struct SyntheticScene {
  SceneSpec spec;
  std::uint64_t seed = 0;
  std::vector<CameraParams> cameras;
  std::vector<Image> images;       // grey
  std::vector<DepthMap> gt_depths;  // 0 where the pixel-centre ray misses every surface

  /// Surface points at the pixel-centre rays of every view (views in order,
  /// pixels row-major) that are visible in at least `min_views` views,
  /// counting the originating view. A point is visible in a view when it
  /// projects into that view's bilinear depth-sampling domain and the view's
  /// own ray through that projection hits the same depth.
  std::vector<Eigen::Vector3d> covisible_samples(int min_views) const;

  /// Pixels of view `view` with a valid ground truth, at least `border` pixels
  /// from the image edge, whose surface point projects at least `border`
  /// pixels inside every other view.
  Mask interior_mask(int view, int border) const;
};

/// Ray-casts every view with sub-pixel supersampling. Throws InputError for
/// fewer than 2 cameras or a visible surface outside [depth_min, depth_max].
SyntheticScene render_scene(const SceneSpec& spec, std::uint64_t seed);

}  // namespace cvpyr
