#pragma once

#include <vector>

#include "cvpyr/camera.hpp"
#include "cvpyr/image.hpp"

namespace cvpyr {

/// Image and camera at every resolution level, coarsest first.
struct ImagePyramid {
  std::vector<Image> levels;
  std::vector<CameraParams> cameras;

  int num_levels() const { return static_cast<int>(levels.size()); }
  const Image& finest() const { return levels.back(); }
};

/// Factor-2 box (2x2 mean) downsample. Dimensions must be even.
Image downsample2(const Image& img);

/// Builds an L-level pyramid (L counts levels, finest included). The input is
/// first cropped at the bottom/right to a multiple of 2^(L-1); nothing is ever
/// padded. Throws InputError when L < 2 or the coarsest side would be below 8.
ImagePyramid build_pyramid(const Image& img, const CameraParams& cam, int num_levels);

/// Finest dimensions after the crop that build_pyramid applies.
int cropped_extent(int extent, int num_levels);

}  // namespace cvpyr
