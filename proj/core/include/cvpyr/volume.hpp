#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace cvpyr {

/// Sorted depth samples for one stage, either one list shared by every pixel
/// (plane sweep) or an independent list per pixel.
class DepthHypotheses {
 public:
  enum class Mode { kShared, kPerPixel };

  DepthHypotheses() = default;
  static DepthHypotheses shared(int width, int height, std::vector<float> depths);
  static DepthHypotheses per_pixel(int width, int height, int count);

  Mode mode() const { return mode_; }
  int width() const { return width_; }
  int height() const { return height_; }
  int count() const { return count_; }

  std::span<const float> at(int x, int y) const;
  /// Per-pixel mode only.
  std::span<float> mutable_at(int x, int y);

  /// Last minus first sample at a pixel.
  float span_at(int x, int y) const;
  /// Throws InputError unless every list is strictly increasing and positive.
  void validate() const;

  std::size_t bytes() const { return depths_.size() * sizeof(float); }

 private:
  Mode mode_ = Mode::kShared;
  int width_ = 0;
  int height_ = 0;
  int count_ = 0;
  std::vector<float> depths_;
};

/// Dense H x W x C feature tensor, channel-fastest.
struct FeatureMap {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> data;

  FeatureMap() = default;
  FeatureMap(int w, int h, int c)
      : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, 0.0f) {}

  std::span<float> at(int x, int y) {
    return {data.data() + (static_cast<std::size_t>(y) * width + x) * channels,
            static_cast<std::size_t>(channels)};
  }
  std::span<const float> at(int x, int y) const {
    return {data.data() + (static_cast<std::size_t>(y) * width + x) * channels,
            static_cast<std::size_t>(channels)};
  }
};

/// H x W x D x G matching scores. `mask` counts the views (or, after
/// aggregation, the window samples) behind each (pixel, depth) entry; a zero
/// mask entry always carries zero cost.
struct CostVolume {
  int width = 0;
  int height = 0;
  int depths = 0;
  int groups = 0;
  std::vector<float> cost;
  std::vector<unsigned char> mask;

  CostVolume() = default;
  CostVolume(int w, int h, int d, int g)
      : width(w), height(h), depths(d), groups(g),
        cost(static_cast<std::size_t>(w) * h * d * g, 0.0f),
        mask(static_cast<std::size_t>(w) * h * d, 0) {}

  std::size_t pixel_index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  float* cost_at(int x, int y, int d) {
    return cost.data() + ((pixel_index(x, y) * depths) + d) * groups;
  }
  const float* cost_at(int x, int y, int d) const {
    return cost.data() + ((pixel_index(x, y) * depths) + d) * groups;
  }
  unsigned char& mask_at(int x, int y, int d) { return mask[pixel_index(x, y) * depths + d]; }
  unsigned char mask_at(int x, int y, int d) const { return mask[pixel_index(x, y) * depths + d]; }

  std::size_t bytes() const { return cost.size() * sizeof(float) + mask.size(); }
};

/// Per-pixel normalized distributions over the stage's hypotheses.
struct ProbabilityVolume {
  int width = 0;
  int height = 0;
  int depths = 0;
  std::vector<float> prob;
  /// 0 where every hypothesis was masked and the distribution fell back to
  /// uniform.
  std::vector<unsigned char> valid;
  /// Shared so filtered copies of a volume do not duplicate the depths.
  std::shared_ptr<const DepthHypotheses> hypotheses;

  ProbabilityVolume() = default;
  ProbabilityVolume(int w, int h, int d, std::shared_ptr<const DepthHypotheses> hyps)
      : width(w), height(h), depths(d), prob(static_cast<std::size_t>(w) * h * d, 0.0f),
        valid(static_cast<std::size_t>(w) * h, 1), hypotheses(std::move(hyps)) {}

  std::span<float> at(int x, int y) {
    return {prob.data() + (static_cast<std::size_t>(y) * width + x) * depths,
            static_cast<std::size_t>(depths)};
  }
  std::span<const float> at(int x, int y) const {
    return {prob.data() + (static_cast<std::size_t>(y) * width + x) * depths,
            static_cast<std::size_t>(depths)};
  }
  bool valid_at(int x, int y) const { return valid[static_cast<std::size_t>(y) * width + x] != 0; }

  std::size_t bytes() const { return prob.size() * sizeof(float) + valid.size(); }
};

}  // namespace cvpyr
