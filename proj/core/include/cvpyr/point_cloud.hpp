#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace cvpyr {

struct CloudPoint {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  std::array<std::uint8_t, 3> color = {0, 0, 0};
  /// Number of views that agreed on this point.
  int support = 0;
};

struct PointCloud {
  std::vector<CloudPoint> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  std::vector<Eigen::Vector3d> positions() const;
};

/// Binary little-endian PLY: x y z as float32, red green blue as uint8.
/// Coordinates are narrowed to float32 on write.
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);

/// Reads the vertex element of a binary little-endian or ASCII PLY. x, y, z
/// are required; red, green, blue default to 0; other properties are skipped.
PointCloud read_ply(const std::filesystem::path& path);

}  // namespace cvpyr
