#pragma once

#include <Eigen/Core>
#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include "cvpyr/camera.hpp"
#include "cvpyr/image.hpp"

namespace cvpyr::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("cvpyr_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Image random_image(int w, int h, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Image img(w, h, c);
  for (auto& v : img.data) v = u(rng);
  return img;
}

inline Eigen::Matrix3d intrinsics(double f, double cx, double cy) {
  Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
  k(0, 0) = k(1, 1) = f;
  k(0, 2) = cx;
  k(1, 2) = cy;
  return k;
}

/// Camera at world position (x, 0, 0) with identity rotation.
inline CameraParams shifted_camera(const Eigen::Matrix3d& k, double x, double dmin = 1.0, double dmax = 100.0) {
  CameraParams cam;
  cam.intrinsics = k;
  cam.translation = Eigen::Vector3d(-x, 0.0, 0.0);
  cam.depth_min = dmin;
  cam.depth_max = dmax;
  return cam;
}

}  // namespace cvpyr::test
