#pragma once

#include <Eigen/Core>
#include <optional>

namespace cvpyr {

/// Pinhole camera with a world-to-camera pose and the scene depth range seen
/// from this view.
///
/// Pixel convention: the centre of pixel (i, j) is at continuous coordinates
/// (i + 0.5, j + 0.5). Under this convention a factor-2 box downsample maps
/// exactly onto halving fx, fy, cx and cy.
struct CameraParams {
  Eigen::Matrix3d intrinsics = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double depth_min = 1.0;
  double depth_max = 2.0;

  /// Throws InputError when an invariant fails. `tol` bounds the
  /// orthonormality and determinant residuals of the rotation.
  void validate(double tol = 1e-9) const;

  Eigen::Vector3d center() const;
  Eigen::Vector3d world_to_camera(const Eigen::Vector3d& world) const;
  Eigen::Vector3d camera_to_world(const Eigen::Vector3d& cam) const;

  /// Projects a world point; empty when it lies on or behind the image plane.
  std::optional<Eigen::Vector2d> project(const Eigen::Vector3d& world) const;
  /// World point at camera-frame depth `depth` along the ray through (u, v).
  Eigen::Vector3d backproject(double u, double v, double depth) const;

  /// Camera for an image resampled by `factor` (0.5 = half resolution).
  CameraParams scaled(double factor) const;

  friend bool operator==(const CameraParams&, const CameraParams&) = default;
};

/// Largest absolute entry of RᵀR − I.
double orthonormality_residual(const Eigen::Matrix3d& rotation);

/// Camera at `position` looking at `target`, with image y pointing along the
/// projection of `down` (OpenCV convention: x right, y down, z forward).
CameraParams look_at(const Eigen::Vector3d& position, const Eigen::Vector3d& target,
                     const Eigen::Vector3d& down, const Eigen::Matrix3d& intrinsics,
                     double depth_min, double depth_max);

}  // namespace cvpyr
