#include "cvpyr/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cvpyr/error.hpp"

namespace cvpyr {

Image::Image(int w, int h, int c, float fill)
    : width(w), height(h), channels(c),
      data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c),
           fill) {
  if (w <= 0 || h <= 0) throw InputError("image dimensions must be positive");
  if (c != 1 && c != 3) throw InputError("image must have 1 or 3 channels");
}

void Image::validate() const {
  if (width <= 0 || height <= 0) throw InputError("image dimensions must be positive");
  if (channels != 1 && channels != 3) throw InputError("image must have 1 or 3 channels");
  const auto expected =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * channels;
  if (data.size() != expected) {
    throw InputError("image payload has " + std::to_string(data.size()) +
                     " samples, expected " + std::to_string(expected));
  }
  for (float v : data) {
    if (!std::isfinite(v)) throw InputError("image contains non-finite samples");
  }
}

void Image::validate_photometric() const {
  validate();
  for (float v : data) {
    if (v < 0.0f || v > 1.0f) throw InputError("photometric sample outside [0, 1]");
  }
}

Image to_gray(const Image& img) {
  if (img.channels == 1) return img;
  Image out(img.width, img.height, 1);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      out.at(x, y) = static_cast<float>(0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) +
                                        0.114 * img.at(x, y, 2));
    }
  }
  return out;
}

Image crop(const Image& img, int width, int height) {
  if (width > img.width || height > img.height || width <= 0 || height <= 0) {
    throw InputError("crop window exceeds image");
  }
  if (width == img.width && height == img.height) return img;
  Image out(width, height, img.channels);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = img.at(x, y, c);
    }
  }
  return out;
}

DepthMap to_depth_map(const Image& single_channel) {
  if (single_channel.channels != 1) throw InputError("depth map must be single-channel");
  DepthMap out(single_channel.width, single_channel.height);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = single_channel.data[i];
  return out;
}

Image from_depth_map(const DepthMap& depth) {
  Image out(depth.width(), depth.height(), 1);
  for (std::size_t i = 0; i < depth.size(); ++i) out.data[i] = static_cast<float>(depth[i]);
  return out;
}

bool sample_bilinear(const Image& img, double u, double v, int c, float& out) {
  const double fx = u - 0.5;
  const double fy = v - 0.5;
  if (!(fx >= 0.0 && fy >= 0.0 && fx <= img.width - 1 && fy <= img.height - 1)) return false;
  int x0 = static_cast<int>(fx);
  int y0 = static_cast<int>(fy);
  // Exact right/bottom edge: step back one tap so x0 + 1 stays in range.
  if (x0 == img.width - 1) x0 = std::max(0, x0 - 1);
  if (y0 == img.height - 1) y0 = std::max(0, y0 - 1);
  const int x1 = std::min(x0 + 1, img.width - 1);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const double ax = fx - x0;
  const double ay = fy - y0;
  const double top = (1.0 - ax) * img.at(x0, y0, c) + ax * img.at(x1, y0, c);
  const double bottom = (1.0 - ax) * img.at(x0, y1, c) + ax * img.at(x1, y1, c);
  out = static_cast<float>((1.0 - ay) * top + ay * bottom);
  return true;
}

}  // namespace cvpyr
