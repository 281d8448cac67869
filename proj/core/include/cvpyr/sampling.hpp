#pragma once

#include <span>
#include <vector>

#include "cvpyr/camera.hpp"
#include "cvpyr/config.hpp"
#include "cvpyr/image.hpp"
#include "cvpyr/strategy.hpp"
#include "cvpyr/volume.hpp"

namespace cvpyr {

using VarianceMap = Grid<double>;

struct DepthRange {
  double min = 0.0;
  double max = 0.0;
};

struct DepthInterval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  double center() const { return 0.5 * (lo + hi); }
};

/// Scale and offset of the variance confidence interval. Negative values are
/// clamped to zero on construction.
struct IntervalParams {
  double alpha = 1.0;
  double beta = 0.0;

  IntervalParams() = default;
  IntervalParams(double a, double b);
};

/// d_j = d_min + j (d_max - d_min) / (D - 1) for j = 0 .. D-1.
std::vector<double> uniform_depths(double depth_min, double depth_max, int count);

/// DHS1: the same uniform sweep at every pixel.
DepthHypotheses dhs1_uniform(double depth_min, double depth_max, int count, int width, int height);

/// Per-pixel variance of the distribution around the regressed depth:
/// V_i = sum_j P_ij (d_ij - d_i)^2.
VarianceMap pixel_variance(const ProbabilityVolume& pv, const DepthMap& depth, int threads = 1);

/// Unclamped confidence interval d ± (alpha sqrt(V) + beta).
DepthInterval variance_interval(double depth, double variance, const IntervalParams& params);

/// Clips `raw` to `range`; an interval narrower than `min_width` is widened
/// symmetrically about its centre and then shifted back inside `range`.
DepthInterval fit_interval(DepthInterval raw, const DepthRange& range, double min_width);

/// Fills `count` uniform samples over a per-pixel interval map.
DepthHypotheses interval_hypotheses(const Grid<DepthInterval>& intervals, int count);

/// Degenerate-width floor for variance intervals at `stage`:
/// 2 * dhs1_spacing / 2^(stage - 1).
double interval_width_floor(double dhs1_spacing, int stage);

/// DHS2: per-pixel variance interval, clamped to `range`, `count` samples.
DepthHypotheses dhs2_variance_interval(const DepthMap& depth, const VarianceMap& variance,
                                       const IntervalParams& params, int count,
                                       const DepthRange& range, double min_width);

/// Mean over source views of the one-pixel epipolar depth step at each
/// pixel's current depth. Pixels with no view showing parallax get NaN.
DepthMap epipolar_step_map(const DepthMap& depth, const CameraParams& ref,
                           std::span<const CameraParams> sources, int threads = 1);

/// DHS3: `count` samples over d ± (count / 2) * delta_px * step, clamped to
/// `range`. Pixels without parallax use d ± fallback_half_width.
DepthHypotheses dhs3_epipolar(const DepthMap& depth, const CameraParams& ref,
                              std::span<const CameraParams> sources, int count, double delta_px,
                              const DepthRange& range, double fallback_half_width,
                              int threads = 1);

/// Bilinear resize with corner alignment: corner samples are preserved and
/// affine fields are reproduced exactly.
Grid<double> upsample_bilinear(const Grid<double>& map, int width, int height);
DepthMap upsample_depth(const DepthMap& depth, int width, int height);

/// Strategy used at `stage` (1-based) under the configured schedule.
Strategy schedule(int stage, const PipelineConfig& config);

}  // namespace cvpyr
