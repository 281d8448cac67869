#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cvpyr/camera.hpp"
#include "cvpyr/config.hpp"
#include "cvpyr/image.hpp"
#include "cvpyr/metrics.hpp"
#include "cvpyr/strategy.hpp"

namespace cvpyr {

struct View {
  Image image;  // grey or RGB; converted to grey internally
  CameraParams camera;
};

struct StageTrace {
  int stage = 0;  // 1-based, coarsest first
  Strategy strategy = Strategy::kUniform;
  int width = 0;
  int height = 0;
  int hypotheses = 0;
  // Per-pixel hypothesis window (last minus first sample).
  double width_min = 0.0;
  double width_median = 0.0;
  double width_max = 0.0;
  /// Median over pixels of the window divided by (hypotheses - 1).
  double spacing_median = 0.0;
  double invalid_fraction = 0.0;
  double seconds = 0.0;
  /// Peak bytes of volumes alive during this stage.
  std::size_t peak_volume_bytes = 0;
  std::size_t cost_volume_bytes = 0;
  DepthMap depth;
  ConfidenceMap confidence;
};

struct PipelineResult {
  DepthMap depth;  // finest stage, finest (cropped) resolution
  ConfidenceMap confidence;
  std::vector<StageTrace> stages;
  std::size_t peak_volume_bytes = 0;
  std::size_t largest_cost_volume_bytes = 0;

  /// Median hypothesis spacing of the last stage.
  double finest_spacing() const { return stages.empty() ? 0.0 : stages.back().spacing_median; }
};

/// Live-byte accounting of volume allocations.
class VolumeMemory {
 public:
  void acquire(std::size_t bytes);
  void release(std::size_t bytes);
  std::size_t live() const { return live_; }
  std::size_t peak() const { return peak_; }
  void reset_peak() { peak_ = live_; }

 private:
  std::size_t live_ = 0;
  std::size_t peak_ = 0;
};

/// Coarse-to-fine depth estimation for views[0] against the remaining views.
/// Throws InputError on bad inputs and NumericalError when a stage leaves
/// 90% or more of its pixels without any valid hypothesis.
PipelineResult run_pipeline(std::span<const View> views, const PipelineConfig& config);

struct AblationRow {
  Schedule schedule = Schedule::kFull;
  DepthErrorStats stats;
  PipelineResult result;
};

/// Runs the pipeline once per schedule and scores the finest depth against
/// `gt` over `mask`, all with the same `spacing`.
std::vector<AblationRow> ablation_run(std::span<const View> views, const PipelineConfig& config,
                                      std::span<const Schedule> schedules, const DepthMap& gt,
                                      const Mask& mask, double spacing);

struct IntervalCalibration {
  double alpha = 0.0;
  double coverage = 0.0;      // fraction of masked pixels whose interval holds the truth
  double median_width = 0.0;  // scene units
};

/// Sweeps alpha over `alphas` (beta fixed) on stage-1 output and reports how
/// often the resulting stage-2 interval contains `gt`, downsampled to the
/// stage-2 grid by nearest pixel-centre lookup.
std::vector<IntervalCalibration> calibrate_interval(std::span<const View> views,
                                                    const PipelineConfig& config,
                                                    std::span<const double> alphas,
                                                    const DepthMap& gt, const Mask& mask);

}  // namespace cvpyr
