#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cvpyr/config.hpp"
#include "cvpyr/image.hpp"
#include "cvpyr/volume.hpp"

namespace cvpyr {

struct UnimodalParams {
  double alpha_c = 13.0;  // scale factor
  double beta_c = 9.0;    // lower bound; keeps sigma positive
  double gamma = 1.0;     // focal exponent
  FocalWeight focal_weight = FocalWeight::kPrinted;

  static UnimodalParams from_config(const PipelineConfig& config);
  void validate() const;
};

/// softmax_j(-|d_j - center| / sigma), with sigma in depth units.
std::vector<double> reference_unimodal(std::span<const double> hyps, double center, double sigma);

/// Same, with sigma counted in hypothesis steps: the depth difference is
/// divided by the list's mean spacing before applying sigma.
std::vector<double> reference_unimodal_steps(std::span<const double> hyps, double center,
                                             double sigma_steps);

/// sigma = alpha_c (1 - f) + beta_c.
double sigma_from_confidence(double confidence, const UnimodalParams& params);

struct LossWithGradient {
  double value = 0.0;
  std::vector<double> gradient;
};

/// Focal weight for reference probability p; 1 - p is clamped to >= 1e-6.
double focal_weight(double p, double gamma, FocalWeight sign);

/// Stereo focal loss over N pixels with D hypotheses each, row-major N x D:
///   L = (1/N) sum_i sum_d w(P_i(d)) * (-P_i(d) log softmax(z_i)(d)).
/// `reference` holds normalized P; `logits` holds z. The gradient is with
/// respect to the logits.
LossWithGradient stereo_focal_loss(std::span<const double> reference, std::span<const double> logits,
                                   int depths, double gamma, FocalWeight sign = FocalWeight::kPrinted);

/// L_C = (1/N) sum -log f_i; gradient with respect to each f_i.
LossWithGradient confidence_loss(std::span<const double> confidence);

/// Sum (or mean, when `normalize`) of |d - gt| over pixels with mask != 0;
/// gradient with respect to each d (zero outside the mask).
LossWithGradient regression_loss(const DepthMap& depth, const DepthMap& gt, const Mask& mask,
                                 bool normalize = false);

struct LossWeights {
  double lambda_sf = 10.0;
  double lambda_c = 80.0;
  std::vector<double> stage = {0.5, 1.0, 2.0};

  static LossWeights from_config(const PipelineConfig& config, int num_stages);
};

struct LossBreakdown {
  double stereo_focal = 0.0;
  double confidence = 0.0;
  std::vector<double> regression;
  double total = 0.0;
};

/// total = lambda_sf * SF + lambda_c * C + sum_l stage[l] * regression[l].
/// Stages past the end of `weights.stage` reuse its last entry.
LossBreakdown total_loss(double stereo_focal, double confidence, std::span<const double> regression,
                         const LossWeights& weights);

/// Unimodal filter on one distribution: multiply by a Laplacian kernel centred
/// on the current argmax with sigma = sigma_from_confidence(confidence) steps,
/// then renormalize. The argmax is preserved.
template <typename T>
void auf_filter_distribution(std::span<const T> prob, std::span<const float> depths,
                             double confidence, const UnimodalParams& params, std::span<T> out);

ProbabilityVolume auf_filter(const ProbabilityVolume& pv, const ConfidenceMap& confidence,
                             const UnimodalParams& params, int threads = 1);

/// One row of the finite-difference gradient audit.
struct GradientCheck {
  std::string name;
  int instances = 0;
  double max_relative_error = 0.0;
  bool passed = false;
};

/// Fourth-order central finite differences against every analytic gradient of the loss
/// suite. Relative error is |a - n| / max(|a|, |n|, 1e-8).
std::vector<GradientCheck> run_gradient_checks(int instances, std::uint64_t seed,
                                               double tolerance = 1e-5);

}  // namespace cvpyr
