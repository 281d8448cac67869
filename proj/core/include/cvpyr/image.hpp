#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cvpyr {

/// Dense row-major 2D field with one value per pixel.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Top-left `width` x `height` window of a grid.
template <typename T>
Grid<T> crop(const Grid<T>& grid, int width, int height) {
  Grid<T> out(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) out(x, y) = grid(x, y);
  return out;
}

/// Per-pixel depths in scene units. Double precision: depth maps feed
/// back-projection and fusion, which are geometry.
using DepthMap = Grid<double>;
/// Per-pixel confidence in (0, 1].
using ConfidenceMap = Grid<double>;
using Mask = Grid<unsigned char>;

/// Interleaved row-major image with 1 or 3 channels.
///
/// Photometric images hold samples in [0, 1]. Images decoded from PFM carry
/// arbitrary finite floats (depth maps, for instance); `validate` only checks
/// shape and finiteness, `validate_photometric` additionally checks range.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> data;

  Image() = default;
  Image(int w, int h, int c, float fill = 0.0f);

  float& at(int x, int y, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int x, int y, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  void validate() const;
  void validate_photometric() const;

  friend bool operator==(const Image&, const Image&) = default;
};

/// Luma conversion with 0.299 / 0.587 / 0.114 weights; single-channel
/// input is returned unchanged.
Image to_gray(const Image& img);

/// Crops to the top-left `width` x `height` window. Intrinsics are unaffected
/// by a top-left anchored crop.
Image crop(const Image& img, int width, int height);

DepthMap to_depth_map(const Image& single_channel);
Image from_depth_map(const DepthMap& depth);

/// Bilinear sample of channel `c` at continuous pixel coordinates where the
/// centre of pixel (i, j) sits at (i + 0.5, j + 0.5). Returns false when any of
/// the four taps would fall outside the image.
bool sample_bilinear(const Image& img, double u, double v, int c, float& out);

}  // namespace cvpyr
