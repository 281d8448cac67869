#pragma once

#include <Eigen/Core>
#include <optional>

#include "cvpyr/camera.hpp"

namespace cvpyr {

/// Maps reference-camera coordinates to source-camera coordinates:
/// X_src = rotation * X_ref + translation.
struct RelativePose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  RelativePose inverse() const;
  /// Applies `this` after `first`.
  RelativePose compose(const RelativePose& first) const;
};

RelativePose relative_pose(const CameraParams& ref, const CameraParams& src);

struct Warp {
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
  /// False when the warped point is on or behind the source image plane.
  bool valid = false;
};

/// Plane-sweep warp of a reference pixel at depth `depth` into a source view,
/// precomputed per (reference pixel, source view) pair so sweeping over many
/// depths costs one fused multiply-add per coordinate.
///
/// The source point is h(d) = d * a + b with a = K_src R_rel K_ref^-1 p and
/// b = K_src t_rel; the warped pixel is (h.x / h.z, h.y / h.z).
class PixelRay {
 public:
  PixelRay(const Eigen::Vector2d& pixel, const CameraParams& ref, const CameraParams& src);
  PixelRay(const Eigen::Vector2d& pixel, const Eigen::Matrix3d& ref_k_inv,
           const Eigen::Matrix3d& src_k_rotation, const Eigen::Vector3d& src_k_translation);

  Warp at(double depth) const;
  /// d(pixel)/d(depth), analytic.
  Eigen::Vector2d jacobian(double depth) const;

 private:
  Eigen::Vector3d a_;
  Eigen::Vector3d b_;
};

/// Projects reference pixel `pixel` (continuous coordinates) lifted to depth
/// `depth` into the source camera. Out-of-bounds results are returned as-is;
/// the caller masks them.
Warp warp_pixel(const Eigen::Vector2d& pixel, double depth, const CameraParams& ref,
                const CameraParams& src);

/// Depth change that moves the warped pixel by one pixel along the epipolar
/// line: 1 / |d x' / d depth|. Empty when the warp is invalid or the
/// derivative norm is below 1e-12 (no parallax).
std::optional<double> try_depth_per_pixel_step(const Eigen::Vector2d& pixel, double depth,
                                               const CameraParams& ref, const CameraParams& src);

/// Throwing variant: NumericalError("no-parallax") on degenerate geometry.
double depth_per_pixel_step(const Eigen::Vector2d& pixel, double depth, const CameraParams& ref,
                            const CameraParams& src);

}  // namespace cvpyr
