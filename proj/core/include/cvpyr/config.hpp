#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cvpyr/strategy.hpp"

namespace cvpyr {

/// Sign convention of the focal weight in the stereo focal loss.
enum class FocalWeight {
  kPrinted,       // (1 - P)^(-gamma)
  kConventional,  // (1 - P)^(+gamma)
};

/// Which stage-1 distribution feeds the variance that sizes stage-2 intervals.
enum class VarianceSource { kPostFilter, kPreFilter };

/// All tunables of the coarse-to-fine pipeline and the loss suite. Per-stage
/// lists are indexed from stage 1; stages past the end of a list reuse its
/// last entry.
struct PipelineConfig {
  int num_levels = 3;
  std::vector<int> hypotheses = {48, 32, 8};

  int channels = 8;
  int groups = 4;
  int aggregation_radius = 2;
  /// Inverse temperature applied to aggregated correlation scores before the
  /// softmax. Correlations of standardized features live roughly in [-1, 1].
  double score_scale = 30.0;

  // Loss weights.
  double lambda_sf = 10.0;
  double lambda_c = 80.0;
  std::vector<double> stage_weights = {0.5, 1.0, 2.0};

  // Variance interval scale (alpha) and offset (beta), indexed by the stage
  // whose distribution produced the variance.
  std::vector<double> interval_alpha = {3.0};
  std::vector<double> interval_beta = {0.0};

  // Unimodal reference distribution: sigma = alpha_c * (1 - f) + beta_c, in
  // units of local hypothesis spacing.
  double alpha_c = 13.0;
  double beta_c = 9.0;
  double gamma = 1.0;
  FocalWeight focal_weight = FocalWeight::kPrinted;

  /// Epipolar window: pixels of epipolar displacement per hypothesis step.
  double delta_px = 0.5;

  bool auf = true;
  VarianceSource variance_source = VarianceSource::kPostFilter;

  Schedule schedule = Schedule::kFull;
  /// Total window widths (scene units) for uniform-only refinement, from
  /// stage 2 on; later stages keep halving.
  std::vector<double> handcrafted_widths = {40.0, 20.0, 10.0, 5.0};

  // Fusion.
  double tau_px = 1.0;
  double tau_rel = 0.01;
  int min_support = 2;

  int threads = 1;

  /// Overrides the reference camera's depth range when both are positive.
  double depth_min = 0.0;
  double depth_max = 0.0;

  int hypotheses_at(int stage) const;
  double stage_weight_at(int stage) const;
  double alpha_at(int stage) const;
  double beta_at(int stage) const;
  double handcrafted_width_at(int stage) const;

  /// Throws InputError on violated invariants.
  void validate() const;
};

/// Applies `key = value` lines on top of `base`. Lists are comma-separated;
/// '#' starts a comment. Unknown keys are an error.
PipelineConfig parse_config(const std::string& text, PipelineConfig base = {});
PipelineConfig read_config(const std::filesystem::path& path, PipelineConfig base = {});
/// Renders every key in the format accepted by parse_config.
std::string format_config(const PipelineConfig& config);

}  // namespace cvpyr
