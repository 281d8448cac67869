#include "cvpyr/matching.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <string>

#include "cvpyr/distribution.hpp"
#include "cvpyr/error.hpp"
#include "cvpyr/geometry.hpp"
#include "cvpyr/parallel.hpp"

namespace cvpyr {
namespace {

// Bilinear sample of every channel; same footprint rule as sample_bilinear.
bool sample_features(const FeatureMap& fm, double u, double v, std::span<float> out) {
  const double fx = u - 0.5;
  const double fy = v - 0.5;
  if (!(fx >= 0.0 && fy >= 0.0 && fx <= fm.width - 1 && fy <= fm.height - 1)) return false;
  int x0 = static_cast<int>(fx);
  int y0 = static_cast<int>(fy);
  if (x0 == fm.width - 1) x0 = std::max(0, x0 - 1);
  if (y0 == fm.height - 1) y0 = std::max(0, y0 - 1);
  const int x1 = std::min(x0 + 1, fm.width - 1);
  const int y1 = std::min(y0 + 1, fm.height - 1);
  const float ax = static_cast<float>(fx - x0);
  const float ay = static_cast<float>(fy - y0);
  const float w00 = (1 - ax) * (1 - ay);
  const float w10 = ax * (1 - ay);
  const float w01 = (1 - ax) * ay;
  const float w11 = ax * ay;
  const auto p00 = fm.at(x0, y0);
  const auto p10 = fm.at(x1, y0);
  const auto p01 = fm.at(x0, y1);
  const auto p11 = fm.at(x1, y1);
  for (int c = 0; c < fm.channels; ++c) {
    out[c] = w00 * p00[c] + w10 * p10[c] + w01 * p01[c] + w11 * p11[c];
  }
  return true;
}

struct SourceGeometry {
  Eigen::Matrix3d k_rotation;
  Eigen::Vector3d k_translation;
};

}  // namespace

void groupwise_correlation(std::span<const float> ref, std::span<const float> src, int groups,
                           std::span<float> out) {
  const int channels = static_cast<int>(ref.size());
  const int per_group = channels / groups;
  const float norm = static_cast<float>(groups) / static_cast<float>(channels);
  for (int g = 0; g < groups; ++g) {
    float acc = 0.0f;
    for (int k = g * per_group; k < (g + 1) * per_group; ++k) acc += ref[k] * src[k];
    out[g] = norm * acc;
  }
}

CostVolume build_cost_volume(const FeatureMap& ref, const CameraParams& ref_cam,
                             std::span<const SourceView> sources, const DepthHypotheses& hyps,
                             int groups, int threads, CostVolumeStatus* status) {
  if (sources.empty()) throw InputError("cost volume needs at least one source view");
  if (sources.size() > 255) throw InputError("at most 255 source views are supported");
  if (groups < 1 || ref.channels % groups != 0) {
    throw InputError("feature channels must be divisible by the group count");
  }
  if (hyps.width() != ref.width || hyps.height() != ref.height) {
    throw InputError("hypothesis grid does not match the reference feature map");
  }
  for (const auto& s : sources) {
    if (s.features == nullptr || s.features->channels != ref.channels) {
      throw InputError("source feature maps must match the reference channel count");
    }
  }

  const int depths = hyps.count();
  CostVolume cv(ref.width, ref.height, depths, groups);
  const Eigen::Matrix3d ref_k_inv = ref_cam.intrinsics.inverse();
  std::vector<SourceGeometry> geo;
  geo.reserve(sources.size());
  for (const auto& s : sources) {
    const RelativePose rel = relative_pose(ref_cam, s.camera);
    geo.push_back({s.camera.intrinsics * rel.rotation, s.camera.intrinsics * rel.translation});
  }

  parallel_rows(ref.height, threads, [&](int y) {
    std::vector<float> sample(static_cast<std::size_t>(ref.channels));
    std::vector<float> corr(static_cast<std::size_t>(groups));
    for (int x = 0; x < ref.width; ++x) {
      const Eigen::Vector2d pixel(x + 0.5, y + 0.5);
      const auto ref_vec = ref.at(x, y);
      const auto depth_list = hyps.at(x, y);
      for (std::size_t s = 0; s < sources.size(); ++s) {
        const PixelRay ray(pixel, ref_k_inv, geo[s].k_rotation, geo[s].k_translation);
        for (int d = 0; d < depths; ++d) {
          const Warp w = ray.at(depth_list[d]);
          if (!w.valid || !sample_features(*sources[s].features, w.pixel.x(), w.pixel.y(), sample)) {
            continue;
          }
          groupwise_correlation(ref_vec, sample, groups, corr);
          float* out = cv.cost_at(x, y, d);
          for (int g = 0; g < groups; ++g) out[g] += corr[g];
          ++cv.mask_at(x, y, d);
        }
      }
      for (int d = 0; d < depths; ++d) {
        const unsigned char n = cv.mask_at(x, y, d);
        if (n > 1) {
          float* out = cv.cost_at(x, y, d);
          for (int g = 0; g < groups; ++g) out[g] /= static_cast<float>(n);
        }
      }
    }
  });

  if (status != nullptr) {
    std::size_t invalid = 0;
    for (unsigned char m : cv.mask) invalid += m == 0;
    status->invalid_fraction = cv.mask.empty() ? 0.0 : static_cast<double>(invalid) / cv.mask.size();
    status->warning = status->invalid_fraction >= 0.5;
  }
  return cv;
}

CostVolume aggregate(const CostVolume& cv, int radius, int threads) {
  if (radius < 0) throw InputError("aggregation radius must be >= 0");
  const int w = cv.width;
  const int h = cv.height;
  const int depths = cv.depths;
  const int groups = cv.groups;

  CostVolume result(w, h, depths, 1);
  parallel_rows(h, threads, [&](int y) {
    std::vector<double> sum(static_cast<std::size_t>(depths));
    std::vector<int> cnt(static_cast<std::size_t>(depths));
    for (int x = 0; x < w; ++x) {
      std::fill(sum.begin(), sum.end(), 0.0);
      std::fill(cnt.begin(), cnt.end(), 0);
      for (int yy = std::max(0, y - radius); yy <= std::min(h - 1, y + radius); ++yy) {
        for (int xx = std::max(0, x - radius); xx <= std::min(w - 1, x + radius); ++xx) {
          for (int d = 0; d < depths; ++d) {
            if (cv.mask_at(xx, yy, d) == 0) continue;
            const float* c = cv.cost_at(xx, yy, d);
            double group_sum = 0.0;
            for (int g = 0; g < groups; ++g) group_sum += c[g];
            sum[d] += group_sum;
            ++cnt[d];
          }
        }
      }
      for (int d = 0; d < depths; ++d) {
        if (cnt[d] == 0) continue;
        *result.cost_at(x, y, d) = static_cast<float>(sum[d] / (static_cast<double>(cnt[d]) * groups));
        result.mask_at(x, y, d) = static_cast<unsigned char>(std::min(cnt[d], 255));
      }
    }
  });
  return result;
}

ProbabilityVolume softmax_volume(const CostVolume& scores,
                                 std::shared_ptr<const DepthHypotheses> hyps,
                                 double scale, int threads) {
  if (scores.groups != 1) throw InputError("softmax_volume expects an aggregated (1-group) volume");
  if (!hyps || hyps->count() != scores.depths || hyps->width() != scores.width ||
      hyps->height() != scores.height) {
    throw InputError("hypotheses do not match the score volume");
  }
  ProbabilityVolume pv(scores.width, scores.height, scores.depths, std::move(hyps));
  parallel_rows(scores.height, threads, [&](int y) {
    std::vector<float> scaled(static_cast<std::size_t>(scores.depths));
    for (int x = 0; x < scores.width; ++x) {
      const std::size_t base = scores.pixel_index(x, y) * scores.depths;
      for (int d = 0; d < scores.depths; ++d) {
        scaled[d] = static_cast<float>(scale * scores.cost[base + d]);
      }
      const std::span<const unsigned char> keep(scores.mask.data() + base,
                                                static_cast<std::size_t>(scores.depths));
      const bool ok = softmax<float>(scaled, keep, pv.at(x, y));
      pv.valid[scores.pixel_index(x, y)] = ok ? 1 : 0;
    }
  });
  return pv;
}

Regression regress_depth(const ProbabilityVolume& pv, int threads) {
  Regression out{DepthMap(pv.width, pv.height), ConfidenceMap(pv.width, pv.height)};
  parallel_rows(pv.height, threads, [&](int y) {
    for (int x = 0; x < pv.width; ++x) {
      const auto p = pv.at(x, y);
      const auto d = pv.hypotheses->at(x, y);
      out.depth(x, y) = std::clamp(expectation(p, d), static_cast<double>(d.front()),
                                   static_cast<double>(d.back()));
      out.confidence(x, y) = p[argmax(p)];
    }
  });
  return out;
}

}  // namespace cvpyr
