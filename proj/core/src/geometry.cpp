#include "cvpyr/geometry.hpp"

#include <Eigen/LU>

#include "cvpyr/error.hpp"

namespace cvpyr {

RelativePose RelativePose::inverse() const {
  RelativePose out;
  out.rotation = rotation.transpose();
  out.translation = -out.rotation * translation;
  return out;
}

RelativePose RelativePose::compose(const RelativePose& first) const {
  RelativePose out;
  out.rotation = rotation * first.rotation;
  out.translation = rotation * first.translation + translation;
  return out;
}

RelativePose relative_pose(const CameraParams& ref, const CameraParams& src) {
  RelativePose out;
  out.rotation = src.rotation * ref.rotation.transpose();
  out.translation = src.translation - out.rotation * ref.translation;
  return out;
}

PixelRay::PixelRay(const Eigen::Vector2d& pixel, const CameraParams& ref, const CameraParams& src) {
  const RelativePose rel = relative_pose(ref, src);
  *this = PixelRay(pixel, ref.intrinsics.inverse(), src.intrinsics * rel.rotation,
                   src.intrinsics * rel.translation);
}

PixelRay::PixelRay(const Eigen::Vector2d& pixel, const Eigen::Matrix3d& ref_k_inv,
                   const Eigen::Matrix3d& src_k_rotation, const Eigen::Vector3d& src_k_translation) {
  Eigen::Vector3d ray = ref_k_inv * Eigen::Vector3d(pixel.x(), pixel.y(), 1.0);
  ray /= ray.z();
  a_ = src_k_rotation * ray;
  b_ = src_k_translation;
}

Warp PixelRay::at(double depth) const {
  const Eigen::Vector3d h = depth * a_ + b_;
  Warp w;
  w.valid = h.z() > 0.0;
  if (w.valid) w.pixel = Eigen::Vector2d(h.x() / h.z(), h.y() / h.z());
  return w;
}

Eigen::Vector2d PixelRay::jacobian(double depth) const {
  const Eigen::Vector3d h = depth * a_ + b_;
  const double z2 = h.z() * h.z();
  return {(a_.x() * h.z() - h.x() * a_.z()) / z2, (a_.y() * h.z() - h.y() * a_.z()) / z2};
}

Warp warp_pixel(const Eigen::Vector2d& pixel, double depth, const CameraParams& ref,
                const CameraParams& src) {
  if (!(depth > 0.0)) throw InputError("warp depth must be positive");
  return PixelRay(pixel, ref, src).at(depth);
}

std::optional<double> try_depth_per_pixel_step(const Eigen::Vector2d& pixel, double depth,
                                               const CameraParams& ref, const CameraParams& src) {
  const PixelRay ray(pixel, ref, src);
  if (!ray.at(depth).valid) return std::nullopt;
  const double rate = ray.jacobian(depth).norm();
  if (!(rate >= 1e-12)) return std::nullopt;
  return 1.0 / rate;
}

double depth_per_pixel_step(const Eigen::Vector2d& pixel, double depth, const CameraParams& ref,
                            const CameraParams& src) {
  if (!(depth > 0.0)) throw InputError("depth must be positive");
  const PixelRay ray(pixel, ref, src);
  if (!ray.at(depth).valid) throw NumericalError("warp lands behind the source camera");
  const double rate = ray.jacobian(depth).norm();
  if (!(rate >= 1e-12)) throw NumericalError("no-parallax: epipolar geometry is degenerate");
  return 1.0 / rate;
}

}  // namespace cvpyr
