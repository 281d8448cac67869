#pragma once

#include <memory>
#include <span>
#include <vector>

#include "cvpyr/camera.hpp"
#include "cvpyr/image.hpp"
#include "cvpyr/volume.hpp"

namespace cvpyr {

/// Hand-crafted per-pixel descriptors standing in for a learned extractor.
///
/// Channel menu (borders replicate):
///   0 intensity            4 3x3 local std
///   1 |d/dx|               5 45-degree derivative (signed)
///   2 |d/dy|               6 135-degree derivative (signed)
///   3 3x3 local mean       7 4-neighbour Laplacian
/// C = 4 keeps the first four; C = 16 appends the same eight computed on a
/// 3x3 binomial-smoothed copy. Every channel is standardized to zero mean and
/// unit variance over the image (std floored at 1e-6).
FeatureMap extract_features(const Image& gray, int channels, int groups);

/// c_g = (G / C) * <ref_g, src_g> over the g-th contiguous channel slice.
void groupwise_correlation(std::span<const float> ref, std::span<const float> src, int groups,
                           std::span<float> out);

struct SourceView {
  const FeatureMap* features = nullptr;
  CameraParams camera;
};

struct CostVolumeStatus {
  /// Fraction of (pixel, depth) entries with no contributing view.
  double invalid_fraction = 0.0;
  /// Set when invalid_fraction >= 0.5.
  bool warning = false;
};

/// Plane-sweep cost volume: for each reference pixel and hypothesis, the mean
/// group-wise correlation over the source views whose bilinear feature sample
/// lands fully inside the image.
CostVolume build_cost_volume(const FeatureMap& ref, const CameraParams& ref_cam,
                             std::span<const SourceView> sources, const DepthHypotheses& hyps,
                             int groups, int threads = 1, CostVolumeStatus* status = nullptr);

/// Masked box filter of side 2r+1 on every depth slice, then the groups are
/// averaged into a single score. Output has groups == 1 and its mask holds the
/// number of valid window samples.
CostVolume aggregate(const CostVolume& cv, int radius, int threads = 1);

/// Softmax of `scale * score` per pixel over a groups == 1 volume.
ProbabilityVolume softmax_volume(const CostVolume& scores,
                                 std::shared_ptr<const DepthHypotheses> hyps,
                                 double scale = 1.0, int threads = 1);

struct Regression {
  DepthMap depth;
  ConfidenceMap confidence;
};

/// Soft-argmax depth and peak-probability confidence per pixel.
Regression regress_depth(const ProbabilityVolume& pv, int threads = 1);

}  // namespace cvpyr
