#include "cvpyr/camera.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "cvpyr/error.hpp"
#include "cvpyr/io.hpp"

namespace cvpyr {

double orthonormality_residual(const Eigen::Matrix3d& rotation) {
  return (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

void CameraParams::validate(double tol) const {
  if (!intrinsics.allFinite() || !rotation.allFinite() || !translation.allFinite()) {
    throw InputError("camera has non-finite entries");
  }
  if (orthonormality_residual(rotation) > tol) {
    throw InputError("camera rotation is not orthonormal");
  }
  if (std::abs(rotation.determinant() - 1.0) > tol) {
    throw InputError("camera rotation is not a proper rotation (det != +1)");
  }
  if (intrinsics(1, 0) != 0.0 || intrinsics(2, 0) != 0.0 || intrinsics(2, 1) != 0.0) {
    throw InputError("intrinsics must be upper-triangular");
  }
  if (!(intrinsics(0, 0) > 0.0 && intrinsics(1, 1) > 0.0 && intrinsics(2, 2) > 0.0)) {
    throw InputError("intrinsics diagonal must be positive");
  }
  if (!(depth_min > 0.0 && depth_min < depth_max) || !std::isfinite(depth_max)) {
    throw InputError("camera depth range must satisfy 0 < depth_min < depth_max");
  }
}

Eigen::Vector3d CameraParams::center() const { return -rotation.transpose() * translation; }

Eigen::Vector3d CameraParams::world_to_camera(const Eigen::Vector3d& world) const {
  return rotation * world + translation;
}

Eigen::Vector3d CameraParams::camera_to_world(const Eigen::Vector3d& cam) const {
  return rotation.transpose() * (cam - translation);
}

std::optional<Eigen::Vector2d> CameraParams::project(const Eigen::Vector3d& world) const {
  const Eigen::Vector3d h = intrinsics * world_to_camera(world);
  if (!(h.z() > 0.0)) return std::nullopt;
  return Eigen::Vector2d(h.x() / h.z(), h.y() / h.z());
}

Eigen::Vector3d CameraParams::backproject(double u, double v, double depth) const {
  const Eigen::Vector3d ray = intrinsics.inverse() * Eigen::Vector3d(u, v, 1.0);
  return camera_to_world(ray * (depth / ray.z()));
}

CameraParams CameraParams::scaled(double factor) const {
  CameraParams out = *this;
  out.intrinsics.row(0) *= factor;
  out.intrinsics.row(1) *= factor;
  return out;
}

CameraParams look_at(const Eigen::Vector3d& position, const Eigen::Vector3d& target,
                     const Eigen::Vector3d& down, const Eigen::Matrix3d& intrinsics,
                     double depth_min, double depth_max) {
  const Eigen::Vector3d z = (target - position).normalized();
  const Eigen::Vector3d x = down.cross(z).normalized();
  const Eigen::Vector3d y = z.cross(x);
  CameraParams cam;
  cam.rotation.row(0) = x.transpose();
  cam.rotation.row(1) = y.transpose();
  cam.rotation.row(2) = z.transpose();
  cam.translation = -cam.rotation * position;
  cam.intrinsics = intrinsics;
  cam.depth_min = depth_min;
  cam.depth_max = depth_max;
  return cam;
}

}  // namespace cvpyr

// DTU cam.txt

namespace cvpyr {
namespace {

std::vector<double> read_numbers(std::istream& in, std::size_t n, const fs::path& path,
                                 const char* block) {
  std::vector<double> out;
  out.reserve(n);
  std::string tok;
  while (out.size() < n && in >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw InputError(path.string() + ": non-numeric token '" + tok + "' in " + block + " block");
    }
  }
  if (out.size() != n) throw InputError(path.string() + ": truncated " + block + " block");
  return out;
}

void expect_keyword(std::istream& in, const std::string& keyword, const fs::path& path) {
  std::string tok;
  if (!(in >> tok) || tok != keyword) {
    throw InputError(path.string() + ": expected '" + keyword + "'");
  }
}

}  // namespace

CameraParams read_camera_dtu(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());

  CameraParams cam;
  expect_keyword(in, "extrinsic", path);
  const auto ext = read_numbers(in, 16, path, "extrinsic");
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) cam.rotation(r, c) = ext[r * 4 + c];
    cam.translation(r) = ext[r * 4 + 3];
  }
  expect_keyword(in, "intrinsic", path);
  const auto intr = read_numbers(in, 9, path, "intrinsic");
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) cam.intrinsics(r, c) = intr[r * 3 + c];
  }

  std::vector<double> depth;
  std::string tok;
  while (in >> tok) {
    try {
      depth.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw InputError(path.string() + ": non-numeric token '" + tok + "' in depth line");
    }
  }
  if (depth.size() < 2 || depth.size() > 4) {
    throw InputError(path.string() + ": depth line must hold 2 to 4 numbers");
  }
  cam.depth_min = depth[0];
  const double interval = depth[1];
  if (depth.size() == 4) {
    cam.depth_max = depth[3];
  } else if (depth.size() == 3) {
    cam.depth_max = depth[0] + interval * (depth[2] - 1.0);
  } else {
    cam.depth_max = depth[0] + interval * 191.0;
  }
  if (!(cam.depth_min > 0.0) || !(cam.depth_max > cam.depth_min)) {
    throw InputError(path.string() + ": depth range must be positive and increasing");
  }

  const double residual = orthonormality_residual(cam.rotation);
  if (residual > 1e-6 || std::abs(cam.rotation.determinant() - 1.0) > 1e-6) {
    throw InputError(path.string() + ": rotation is not orthonormal");
  }
  if (residual > 1e-9) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cam.rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
    cam.rotation = svd.matrixU() * svd.matrixV().transpose();
  }
  cam.validate();
  return cam;
}

void write_camera_dtu(const fs::path& path, const CameraParams& cam, int num_planes) {
  cam.validate();
  if (num_planes < 2) throw InputError("num_planes must be >= 2");
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw InputError("cannot write " + path.string());
  std::fprintf(f, "extrinsic\n");
  for (int r = 0; r < 3; ++r) {
    std::fprintf(f, "%.17g %.17g %.17g %.17g\n", cam.rotation(r, 0), cam.rotation(r, 1),
                 cam.rotation(r, 2), cam.translation(r));
  }
  std::fprintf(f, "0 0 0 1\n\nintrinsic\n");
  for (int r = 0; r < 3; ++r) {
    std::fprintf(f, "%.17g %.17g %.17g\n", cam.intrinsics(r, 0), cam.intrinsics(r, 1),
                 cam.intrinsics(r, 2));
  }
  const double interval = (cam.depth_max - cam.depth_min) / (num_planes - 1);
  std::fprintf(f, "\n%.17g %.17g %d %.17g\n", cam.depth_min, interval, num_planes, cam.depth_max);
  const bool ok = std::fclose(f) == 0;
  if (!ok) throw InputError("failed writing " + path.string());
}

}  // namespace cvpyr
