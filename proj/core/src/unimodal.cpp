#include "cvpyr/unimodal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "cvpyr/distribution.hpp"
#include "cvpyr/error.hpp"
#include "cvpyr/parallel.hpp"

namespace cvpyr {

UnimodalParams UnimodalParams::from_config(const PipelineConfig& config) {
  UnimodalParams p;
  p.alpha_c = config.alpha_c;
  p.beta_c = config.beta_c;
  p.gamma = config.gamma;
  p.focal_weight = config.focal_weight;
  p.validate();
  return p;
}

void UnimodalParams::validate() const {
  if (!(beta_c > 0.0)) throw InputError("beta_c must be positive");
  if (!(alpha_c >= 0.0)) throw InputError("alpha_c must be non-negative");
  if (!(gamma >= 0.0)) throw InputError("gamma must be non-negative");
}

std::vector<double> reference_unimodal(std::span<const double> hyps, double center, double sigma) {
  if (!(sigma > 0.0)) throw InputError("sigma must be positive");
  std::vector<double> logits(hyps.size());
  for (std::size_t j = 0; j < hyps.size(); ++j) logits[j] = -std::abs(hyps[j] - center) / sigma;
  std::vector<double> out(hyps.size());
  softmax<double>(logits, out);
  return out;
}

std::vector<double> reference_unimodal_steps(std::span<const double> hyps, double center,
                                             double sigma_steps) {
  if (hyps.size() < 2) throw InputError("need at least 2 hypotheses");
  const double spacing = (hyps.back() - hyps.front()) / static_cast<double>(hyps.size() - 1);
  return reference_unimodal(hyps, center, sigma_steps * spacing);
}

double sigma_from_confidence(double confidence, const UnimodalParams& params) {
  return params.alpha_c * (1.0 - confidence) + params.beta_c;
}

double focal_weight(double p, double gamma, FocalWeight sign) {
  const double q = std::max(1.0 - p, 1e-6);
  return std::pow(q, sign == FocalWeight::kPrinted ? -gamma : gamma);
}

LossWithGradient stereo_focal_loss(std::span<const double> reference, std::span<const double> logits,
                                   int depths, double gamma, FocalWeight sign) {
  if (depths < 1 || reference.size() != logits.size() || logits.size() % depths != 0) {
    throw InputError("stereo focal loss: inputs must be N x D with matching shapes");
  }
  if (gamma < 0.0) throw InputError("gamma must be non-negative");
  const std::size_t n = logits.size() / depths;
  if (n == 0) throw InputError("stereo focal loss: no pixels");

  LossWithGradient out;
  out.gradient.assign(logits.size(), 0.0);
  std::vector<double> log_prob(static_cast<std::size_t>(depths));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto z = logits.subspan(i * depths, depths);
    const auto p = reference.subspan(i * depths, depths);
    const double peak = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - peak);
    const double lse = peak + std::log(sum);
    // L_i = sum_d a_d (lse - z_d) with a_d = w_d P_d;
    // dL_i/dz_k = -a_k + (sum_d a_d) softmax(z)_k.
    double a_sum = 0.0;
    for (int d = 0; d < depths; ++d) {
      const double a = focal_weight(p[d], gamma, sign) * p[d];
      total += a * (lse - z[d]);
      a_sum += a;
      out.gradient[i * depths + d] = -a;
    }
    for (int d = 0; d < depths; ++d) out.gradient[i * depths + d] += a_sum * std::exp(z[d] - lse);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  out.value = total * inv_n;
  for (auto& g : out.gradient) g *= inv_n;
  return out;
}

LossWithGradient confidence_loss(std::span<const double> confidence) {
  if (confidence.empty()) throw InputError("confidence loss: no pixels");
  LossWithGradient out;
  out.gradient.resize(confidence.size());
  const double inv_n = 1.0 / static_cast<double>(confidence.size());
  double total = 0.0;
  for (std::size_t i = 0; i < confidence.size(); ++i) {
    const double f = confidence[i];
    if (!(f > 0.0)) throw InputError("confidence loss: confidences must be positive");
    total -= std::log(f);
    out.gradient[i] = -inv_n / f;
  }
  out.value = total * inv_n;
  return out;
}

LossWithGradient regression_loss(const DepthMap& depth, const DepthMap& gt, const Mask& mask,
                                 bool normalize) {
  if (!depth.same_shape(gt) || mask.width() != depth.width() || mask.height() != depth.height()) {
    throw InputError("regression loss: shapes differ");
  }
  LossWithGradient out;
  out.gradient.assign(depth.size(), 0.0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (!mask[i]) continue;
    const double r = depth[i] - gt[i];
    out.value += std::abs(r);
    out.gradient[i] = (r > 0.0) - (r < 0.0);
    ++count;
  }
  if (count == 0) throw InputError("regression loss: empty mask");
  if (normalize) {
    out.value /= static_cast<double>(count);
    for (auto& g : out.gradient) g /= static_cast<double>(count);
  }
  return out;
}

LossWeights LossWeights::from_config(const PipelineConfig& config, int num_stages) {
  LossWeights w;
  w.lambda_sf = config.lambda_sf;
  w.lambda_c = config.lambda_c;
  w.stage.clear();
  for (int s = 1; s <= num_stages; ++s) w.stage.push_back(config.stage_weight_at(s));
  return w;
}

LossBreakdown total_loss(double stereo_focal, double confidence, std::span<const double> regression,
                         const LossWeights& weights) {
  if (weights.stage.empty() && !regression.empty()) throw InputError("no stage weights given");
  LossBreakdown out;
  out.stereo_focal = stereo_focal;
  out.confidence = confidence;
  out.regression.assign(regression.begin(), regression.end());
  out.total = weights.lambda_sf * stereo_focal + weights.lambda_c * confidence;
  for (std::size_t l = 0; l < regression.size(); ++l) {
    const double w = l < weights.stage.size() ? weights.stage[l] : weights.stage.back();
    out.total += w * regression[l];
  }
  if (!std::isfinite(out.total)) throw NumericalError("total loss is not finite");
  return out;
}

template <typename T>
void auf_filter_distribution(std::span<const T> prob, std::span<const float> depths,
                             double confidence, const UnimodalParams& params, std::span<T> out) {
  const std::size_t peak = argmax(prob);
  const double spacing = (static_cast<double>(depths.back()) - depths.front()) /
                         static_cast<double>(depths.size() - 1);
  const double scale = sigma_from_confidence(confidence, params) * spacing;
  const double center = depths[peak];
  double sum = 0.0;
  for (std::size_t j = 0; j < prob.size(); ++j) {
    const double v = static_cast<double>(prob[j]) * std::exp(-std::abs(depths[j] - center) / scale);
    out[j] = static_cast<T>(v);
    sum += v;
  }
  if (!(sum > 0.0)) {
    std::copy(prob.begin(), prob.end(), out.begin());
    return;
  }
  for (auto& v : out) v = static_cast<T>(static_cast<double>(v) / sum);
}

template void auf_filter_distribution<float>(std::span<const float>, std::span<const float>, double,
                                             const UnimodalParams&, std::span<float>);
template void auf_filter_distribution<double>(std::span<const double>, std::span<const float>, double,
                                              const UnimodalParams&, std::span<double>);

ProbabilityVolume auf_filter(const ProbabilityVolume& pv, const ConfidenceMap& confidence,
                             const UnimodalParams& params, int threads) {
  params.validate();
  if (confidence.width() != pv.width || confidence.height() != pv.height) {
    throw InputError("confidence map does not match the probability volume");
  }
  ProbabilityVolume out = pv;
  parallel_rows(pv.height, threads, [&](int y) {
    for (int x = 0; x < pv.width; ++x) {
      if (!pv.valid_at(x, y)) continue;
      auf_filter_distribution<float>(pv.at(x, y), pv.hypotheses->at(x, y), confidence(x, y), params,
                                     out.at(x, y));
    }
  });
  return out;
}

// Gradient audit ---------------------------------------------------------------

namespace {

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

// Fourth-order central difference of f at x along coordinate k.
double central_difference(const std::function<double(std::span<const double>)>& f,
                          std::vector<double> x, std::size_t k, double h) {
  const double x0 = x[k];
  auto at = [&](double offset) {
    x[k] = x0 + offset;
    return f(x);
  };
  return (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
}

double max_error(const std::function<double(std::span<const double>)>& f,
                 const std::vector<double>& x, const std::vector<double>& analytic, double h) {
  double worst = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    worst = std::max(worst, relative_error(analytic[k], central_difference(f, x, k, h)));
  }
  return worst;
}

}  // namespace

std::vector<GradientCheck> run_gradient_checks(int instances, std::uint64_t seed, double tolerance) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr int kPixels = 4;
  constexpr int kDepths = 5;
  constexpr double kStep = 1e-3;

  const std::vector<double> hyps = {0.0, 1.0, 2.0, 3.0, 4.0};
  auto random_reference = [&] {
    std::vector<double> ref;
    for (int i = 0; i < kPixels; ++i) {
      const auto p = reference_unimodal(hyps, 4.0 * unit(rng), 0.3 + 2.0 * unit(rng));
      ref.insert(ref.end(), p.begin(), p.end());
    }
    return ref;
  };
  auto random_logits = [&] {
    std::vector<double> z(kPixels * kDepths);
    for (auto& v : z) v = normal(rng);
    return z;
  };

  std::vector<GradientCheck> rows;
  auto focal_row = [&](const std::string& name, double gamma, FocalWeight sign) {
    GradientCheck row{name, instances, 0.0, false};

    for (int t = 0; t < instances; ++t) {
      const auto ref = random_reference();
      const auto z = random_logits();
      const auto analytic = stereo_focal_loss(ref, z, kDepths, gamma, sign).gradient;
      auto f = [&](std::span<const double> x) { return stereo_focal_loss(ref, x, kDepths, gamma, sign).value; };
      row.max_relative_error = std::max(row.max_relative_error, max_error(f, z, analytic, kStep));
    }
    row.passed = row.max_relative_error < tolerance;
    rows.push_back(row);
  };
  focal_row("stereo_focal d/dlogits (gamma=0)", 0.0, FocalWeight::kPrinted);
  focal_row("stereo_focal d/dlogits (gamma=2, printed)", 2.0, FocalWeight::kPrinted);
  focal_row("stereo_focal d/dlogits (gamma=2, conventional)", 2.0, FocalWeight::kConventional);

  {
    GradientCheck row{"confidence d/df", instances, 0.0, false};
    for (int t = 0; t < instances; ++t) {
      std::vector<double> f(kPixels * kDepths);
      for (auto& v : f) v = 0.05 + 0.95 * unit(rng);
      const auto analytic = confidence_loss(f).gradient;
      auto loss = [](std::span<const double> x) { return confidence_loss(x).value; };
      row.max_relative_error = std::max(row.max_relative_error, max_error(loss, f, analytic, kStep));
    }
    row.passed = row.max_relative_error < tolerance;
    rows.push_back(row);
  }

  {
    GradientCheck row{"regression d/ddepth", instances, 0.0, false};
    for (int t = 0; t < instances; ++t) {
      DepthMap gt(4, 4);
      DepthMap d(4, 4);
      Mask mask(4, 4, 1);
      for (std::size_t i = 0; i < gt.size(); ++i) {
        gt[i] = 500.0 + 100.0 * unit(rng);
        // Keep |d - gt| well away from the kink at zero.
        d[i] = gt[i] + (unit(rng) < 0.5 ? -1.0 : 1.0) * (0.5 + 10.0 * unit(rng));
        mask[i] = unit(rng) < 0.8;
      }
      mask[0] = 1;
      const auto analytic = regression_loss(d, gt, mask).gradient;
      std::vector<double> x(d.values().begin(), d.values().end());
      auto loss = [&](std::span<const double> v) {
        DepthMap dd(4, 4);
        std::copy(v.begin(), v.end(), dd.values().begin());
        return regression_loss(dd, gt, mask).value;
      };
      row.max_relative_error = std::max(row.max_relative_error, max_error(loss, x, analytic, 1e-4));
    }
    row.passed = row.max_relative_error < tolerance;
    rows.push_back(row);
  }

  {
    GradientCheck row{"total d/dparts", instances, 0.0, false};
    const LossWeights weights;
    for (int t = 0; t < instances; ++t) {
      std::vector<double> parts(5);
      for (auto& v : parts) v = 10.0 * unit(rng);
      std::vector<double> analytic = {weights.lambda_sf, weights.lambda_c};
      analytic.insert(analytic.end(), weights.stage.begin(), weights.stage.end());
      auto loss = [&](std::span<const double> v) {
        return total_loss(v[0], v[1], v.subspan(2), weights).total;
      };
      row.max_relative_error = std::max(row.max_relative_error, max_error(loss, parts, analytic, kStep));
    }
    row.passed = row.max_relative_error < tolerance;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace cvpyr
