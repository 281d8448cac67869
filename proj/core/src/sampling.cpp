#include "cvpyr/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cvpyr/distribution.hpp"
#include "cvpyr/error.hpp"
#include "cvpyr/geometry.hpp"
#include "cvpyr/parallel.hpp"

namespace cvpyr {

// DepthHypotheses ------------------------------------------------------------

DepthHypotheses DepthHypotheses::shared(int width, int height, std::vector<float> depths) {
  DepthHypotheses h;
  h.mode_ = Mode::kShared;
  h.width_ = width;
  h.height_ = height;
  h.count_ = static_cast<int>(depths.size());
  h.depths_ = std::move(depths);
  h.validate();
  return h;
}

DepthHypotheses DepthHypotheses::per_pixel(int width, int height, int count) {
  if (count < 2) throw InputError("need at least 2 hypotheses");
  DepthHypotheses h;
  h.mode_ = Mode::kPerPixel;
  h.width_ = width;
  h.height_ = height;
  h.count_ = count;
  h.depths_.assign(static_cast<std::size_t>(width) * height * count, 0.0f);
  return h;
}

std::span<const float> DepthHypotheses::at(int x, int y) const {
  if (mode_ == Mode::kShared) return depths_;
  return {depths_.data() + (static_cast<std::size_t>(y) * width_ + x) * count_,
          static_cast<std::size_t>(count_)};
}

std::span<float> DepthHypotheses::mutable_at(int x, int y) {
  if (mode_ != Mode::kPerPixel) throw InputError("shared hypotheses are immutable per pixel");
  return {depths_.data() + (static_cast<std::size_t>(y) * width_ + x) * count_,
          static_cast<std::size_t>(count_)};
}

float DepthHypotheses::span_at(int x, int y) const {
  const auto d = at(x, y);
  return d.back() - d.front();
}

void DepthHypotheses::validate() const {
  if (count_ < 2) throw InputError("need at least 2 hypotheses");
  const std::size_t lists = mode_ == Mode::kShared ? 1 : static_cast<std::size_t>(width_) * height_;
  for (std::size_t l = 0; l < lists; ++l) {
    const float* d = depths_.data() + l * count_;
    if (!(d[0] > 0.0f) || !std::isfinite(d[0])) throw InputError("hypotheses must be positive");
    for (int j = 1; j < count_; ++j) {
      if (!(d[j] > d[j - 1]) || !std::isfinite(d[j])) {
        throw InputError("hypotheses must be strictly increasing");
      }
    }
  }
}

// Strategies -------------------------------------------------------------------

IntervalParams::IntervalParams(double a, double b) : alpha(std::max(a, 0.0)), beta(std::max(b, 0.0)) {}

std::vector<double> uniform_depths(double depth_min, double depth_max, int count) {
  if (!(depth_min < depth_max)) throw InputError("uniform sampling needs depth_min < depth_max");
  if (count < 2) throw InputError("uniform sampling needs at least 2 hypotheses");
  std::vector<double> out(static_cast<std::size_t>(count));
  const double step = (depth_max - depth_min) / (count - 1);
  for (int j = 0; j < count; ++j) out[j] = depth_min + j * step;
  out.back() = depth_max;
  return out;
}

DepthHypotheses dhs1_uniform(double depth_min, double depth_max, int count, int width, int height) {
  const auto d = uniform_depths(depth_min, depth_max, count);
  return DepthHypotheses::shared(width, height, std::vector<float>(d.begin(), d.end()));
}

VarianceMap pixel_variance(const ProbabilityVolume& pv, const DepthMap& depth, int threads) {
  if (depth.width() != pv.width || depth.height() != pv.height) {
    throw InputError("depth map does not match the probability volume");
  }
  VarianceMap out(pv.width, pv.height);
  parallel_rows(pv.height, threads, [&](int y) {
    for (int x = 0; x < pv.width; ++x) {
      out(x, y) = variance(pv.at(x, y), pv.hypotheses->at(x, y), depth(x, y));
    }
  });
  return out;
}

DepthInterval variance_interval(double depth, double var, const IntervalParams& params) {
  const double half = params.alpha * std::sqrt(std::max(var, 0.0)) + params.beta;
  return {depth - half, depth + half};
}

DepthInterval fit_interval(DepthInterval raw, const DepthRange& range, double min_width) {
  const double full = range.max - range.min;
  min_width = std::min(min_width, full);
  DepthInterval out{std::clamp(raw.lo, range.min, range.max), std::clamp(raw.hi, range.min, range.max)};
  if (out.width() < min_width) {
    const double c = std::clamp(raw.center(), range.min, range.max);
    out = {c - 0.5 * min_width, c + 0.5 * min_width};
    if (out.lo < range.min) out = {range.min, range.min + min_width};
    if (out.hi > range.max) out = {range.max - min_width, range.max};
  }
  return out;
}

DepthHypotheses interval_hypotheses(const Grid<DepthInterval>& intervals, int count) {
  auto hyps = DepthHypotheses::per_pixel(intervals.width(), intervals.height(), count);
  for (int y = 0; y < intervals.height(); ++y) {
    for (int x = 0; x < intervals.width(); ++x) {
      const DepthInterval iv = intervals(x, y);
      auto out = hyps.mutable_at(x, y);
      const double step = iv.width() / (count - 1);
      for (int j = 0; j < count; ++j) out[j] = static_cast<float>(iv.lo + j * step);
      // Guard against float collapse on very narrow windows.
      for (int j = 1; j < count; ++j) {
        if (!(out[j] > out[j - 1])) out[j] = std::nextafter(out[j - 1], std::numeric_limits<float>::max());
      }
    }
  }
  return hyps;
}

double interval_width_floor(double dhs1_spacing, int stage) {
  return 2.0 * dhs1_spacing / std::ldexp(1.0, std::max(stage, 1) - 1);
}

DepthHypotheses dhs2_variance_interval(const DepthMap& depth, const VarianceMap& var,
                                       const IntervalParams& params, int count,
                                       const DepthRange& range, double min_width) {
  if (!depth.same_shape(var)) throw InputError("variance map does not match the depth map");
  if (count < 2) throw InputError("need at least 2 hypotheses");
  Grid<DepthInterval> intervals(depth.width(), depth.height());
  for (std::size_t i = 0; i < depth.size(); ++i) {
    intervals[i] = fit_interval(variance_interval(depth[i], var[i], params), range, min_width);
  }
  return interval_hypotheses(intervals, count);
}

DepthMap epipolar_step_map(const DepthMap& depth, const CameraParams& ref,
                           std::span<const CameraParams> sources, int threads) {
  DepthMap out(depth.width(), depth.height(), std::numeric_limits<double>::quiet_NaN());
  parallel_rows(depth.height(), threads, [&](int y) {
    for (int x = 0; x < depth.width(); ++x) {
      const double d = depth(x, y);
      if (!(d > 0.0)) continue;
      const Eigen::Vector2d pixel(x + 0.5, y + 0.5);
      double sum = 0.0;
      int n = 0;
      for (const auto& src : sources) {
        if (auto step = try_depth_per_pixel_step(pixel, d, ref, src)) {
          sum += *step;
          ++n;
        }
      }
      if (n > 0) out(x, y) = sum / n;
    }
  });
  return out;
}

DepthHypotheses dhs3_epipolar(const DepthMap& depth, const CameraParams& ref,
                              std::span<const CameraParams> sources, int count, double delta_px,
                              const DepthRange& range, double fallback_half_width, int threads) {
  if (count < 2) throw InputError("need at least 2 hypotheses");
  if (!(delta_px > 0.0)) throw InputError("epipolar step must be positive");
  const DepthMap step = epipolar_step_map(depth, ref, sources, threads);
  Grid<DepthInterval> intervals(depth.width(), depth.height());
  const double steps_each_side = 0.5 * count;
  for (std::size_t i = 0; i < depth.size(); ++i) {
    const double half = std::isfinite(step[i]) ? steps_each_side * delta_px * step[i] : fallback_half_width;
    // A tiny floor keeps float samples distinct.
    const double floor_width = 1e-5 * std::max(depth[i], 1.0);
    intervals[i] = fit_interval({depth[i] - half, depth[i] + half}, range, floor_width);
  }
  return interval_hypotheses(intervals, count);
}

Grid<double> upsample_bilinear(const Grid<double>& map, int width, int height) {
  if (map.empty() || width <= 0 || height <= 0) throw InputError("bad upsample dimensions");
  Grid<double> out(width, height);
  const double sx = width > 1 ? static_cast<double>(map.width() - 1) / (width - 1) : 0.0;
  const double sy = height > 1 ? static_cast<double>(map.height() - 1) / (height - 1) : 0.0;
  for (int y = 0; y < height; ++y) {
    const double fy = y * sy;
    const int y0 = std::min(static_cast<int>(fy), std::max(map.height() - 2, 0));
    const int y1 = std::min(y0 + 1, map.height() - 1);
    const double ay = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = x * sx;
      const int x0 = std::min(static_cast<int>(fx), std::max(map.width() - 2, 0));
      const int x1 = std::min(x0 + 1, map.width() - 1);
      const double ax = fx - x0;
      const double top = (1 - ax) * map(x0, y0) + ax * map(x1, y0);
      const double bottom = (1 - ax) * map(x0, y1) + ax * map(x1, y1);
      out(x, y) = (1 - ay) * top + ay * bottom;
    }
  }
  return out;
}

DepthMap upsample_depth(const DepthMap& depth, int width, int height) {
  return upsample_bilinear(depth, width, height);
}

Strategy schedule(int stage, const PipelineConfig& config) {
  if (stage < 1) throw InputError("stages are numbered from 1");
  if (stage == 1) return Strategy::kUniform;
  switch (config.schedule) {
    case Schedule::kFull: return stage == 2 ? Strategy::kVarianceInterval : Strategy::kEpipolar;
    case Schedule::kUniformOnly: return Strategy::kUniform;
    case Schedule::kUniformThenVariance: return Strategy::kVarianceInterval;
    case Schedule::kUniformThenEpipolar: return Strategy::kEpipolar;
  }
  return Strategy::kUniform;
}

}  // namespace cvpyr
