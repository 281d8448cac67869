#include <algorithm>
#include <cmath>
#include <string>

#include "cvpyr/error.hpp"
#include "cvpyr/matching.hpp"

namespace cvpyr {
namespace {

constexpr int kBaseChannels = 8;

float px(const Image& img, int x, int y) {
  x = std::clamp(x, 0, img.width - 1);
  y = std::clamp(y, 0, img.height - 1);
  return img.at(x, y);
}

Image binomial3(const Image& img) {
  Image out(img.width, img.height, 1);
  static constexpr float w[3] = {0.25f, 0.5f, 0.25f};
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      float acc = 0.0f;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) acc += w[dx + 1] * w[dy + 1] * px(img, x + dx, y + dy);
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

// Writes the eight base filters of `img` into channels [offset, offset + count).
void base_filters(const Image& img, FeatureMap& fm, int offset, int count) {
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const float c = px(img, x, y);
      const float l = px(img, x - 1, y);
      const float r = px(img, x + 1, y);
      const float u = px(img, x, y - 1);
      const float d = px(img, x, y + 1);
      double sum = 0.0;
      double sq = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const double v = px(img, x + dx, y + dy);
          sum += v;
          sq += v * v;
        }
      }
      const double mean = sum / 9.0;
      const double var = std::max(0.0, sq / 9.0 - mean * mean);
      const float values[kBaseChannels] = {
          c,
          0.5f * std::abs(r - l),
          0.5f * std::abs(d - u),
          static_cast<float>(mean),
          static_cast<float>(std::sqrt(var)),
          0.5f * (px(img, x + 1, y + 1) - px(img, x - 1, y - 1)),
          0.5f * (px(img, x - 1, y + 1) - px(img, x + 1, y - 1)),
          l + r + u + d - 4.0f * c,
      };
      auto out = fm.at(x, y);
      for (int k = 0; k < count; ++k) out[offset + k] = values[k];
    }
  }
}

void standardize(FeatureMap& fm) {
  const std::size_t n = static_cast<std::size_t>(fm.width) * fm.height;
  for (int c = 0; c < fm.channels; ++c) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += fm.data[i * fm.channels + c];
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = fm.data[i * fm.channels + c] - mean;
      sq += r * r;
    }
    const double sd = std::max(std::sqrt(sq / static_cast<double>(n)), 1e-6);
    for (std::size_t i = 0; i < n; ++i) {
      float& v = fm.data[i * fm.channels + c];
      v = static_cast<float>((v - mean) / sd);
    }
  }
}

}  // namespace

FeatureMap extract_features(const Image& gray, int channels, int groups) {
  if (channels != 4 && channels != 8 && channels != 16) {
    throw InputError("feature channels must be 4, 8 or 16, got " + std::to_string(channels));
  }
  if (groups < 1 || channels % groups != 0) {
    throw InputError("feature channels must be divisible by the group count");
  }
  if (gray.channels != 1) throw InputError("feature extraction expects a single-channel image");
  if (gray.width < 3 || gray.height < 3) {
    throw InputError("image is smaller than the 3x3 filter support");
  }

  FeatureMap fm(gray.width, gray.height, channels);
  base_filters(gray, fm, 0, std::min(channels, kBaseChannels));
  if (channels == 16) base_filters(binomial3(gray), fm, kBaseChannels, kBaseChannels);
  standardize(fm);
  return fm;
}

}  // namespace cvpyr
