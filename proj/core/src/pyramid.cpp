#include "cvpyr/pyramid.hpp"

#include <string>

#include "cvpyr/error.hpp"

namespace cvpyr {

Image downsample2(const Image& img) {
  if (img.width % 2 != 0 || img.height % 2 != 0) {
    throw InputError("downsample2 needs even dimensions");
  }
  Image out(img.width / 2, img.height / 2, img.channels);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        const double sum = static_cast<double>(img.at(2 * x, 2 * y, c)) + img.at(2 * x + 1, 2 * y, c) +
                           img.at(2 * x, 2 * y + 1, c) + img.at(2 * x + 1, 2 * y + 1, c);
        out.at(x, y, c) = static_cast<float>(0.25 * sum);
      }
    }
  }
  return out;
}

int cropped_extent(int extent, int num_levels) {
  const int step = 1 << (num_levels - 1);
  return (extent / step) * step;
}

ImagePyramid build_pyramid(const Image& img, const CameraParams& cam, int num_levels) {
  if (num_levels < 2) throw InputError("pyramid needs at least 2 levels");
  if (num_levels > 16) throw InputError("pyramid level count is unreasonably large");
  img.validate();
  const int w = cropped_extent(img.width, num_levels);
  const int h = cropped_extent(img.height, num_levels);
  const int step = 1 << (num_levels - 1);
  if (w / step < 8 || h / step < 8) {
    throw InputError("image " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                     " is too small for " + std::to_string(num_levels) +
                     " levels (coarsest side must be >= 8)");
  }

  ImagePyramid pyr;
  pyr.levels.resize(num_levels);
  pyr.cameras.resize(num_levels);
  pyr.levels[num_levels - 1] = crop(img, w, h);
  pyr.cameras[num_levels - 1] = cam;
  for (int j = num_levels - 2; j >= 0; --j) {
    pyr.levels[j] = downsample2(pyr.levels[j + 1]);
    pyr.cameras[j] = pyr.cameras[j + 1].scaled(0.5);
  }
  return pyr;
}

}  // namespace cvpyr
