#include "cvpyr/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <string>

#include "cvpyr/error.hpp"
#include "cvpyr/matching.hpp"
#include "cvpyr/pyramid.hpp"
#include "cvpyr/sampling.hpp"
#include "cvpyr/unimodal.hpp"

namespace cvpyr {

void VolumeMemory::acquire(std::size_t bytes) {
  live_ += bytes;
  peak_ = std::max(peak_, live_);
}

void VolumeMemory::release(std::size_t bytes) { live_ -= std::min(bytes, live_); }

namespace {

struct Prepared {
  std::vector<ImagePyramid> pyramids;  // one per view
  DepthRange range;
  double dhs1_spacing = 0.0;
};

Prepared prepare(std::span<const View> views, const PipelineConfig& config) {
  config.validate();
  if (views.size() < 2) throw InputError("need a reference view and at least one source view");
  const int w = views[0].image.width;
  const int h = views[0].image.height;
  Prepared p;
  for (const auto& v : views) {
    if (v.image.width != w || v.image.height != h) throw InputError("all views must share image dimensions");
    v.image.validate();
    v.camera.validate(1e-6);
    p.pyramids.push_back(build_pyramid(to_gray(v.image), v.camera, config.num_levels));
  }
  const auto& ref = views[0].camera;
  p.range = {ref.depth_min, ref.depth_max};
  if (config.depth_min > 0.0 && config.depth_max > 0.0) p.range = {config.depth_min, config.depth_max};
  if (!(p.range.min > 0.0) || !(p.range.max > p.range.min)) throw InputError("invalid depth range");
  p.dhs1_spacing = (p.range.max - p.range.min) / (config.hypotheses_at(1) - 1);
  return p;
}

struct StageMatch {
  ProbabilityVolume pv;
  Regression reg;
  std::size_t cost_bytes = 0;
};

/// Cost volume, aggregation, softmax and regression at pyramid level
/// `level`. Volumes are released as soon as the next one exists.
StageMatch match_level(const Prepared& p, int level, std::shared_ptr<const DepthHypotheses> hyps,
                       const PipelineConfig& config, VolumeMemory& memory) {
  const int threads = config.threads;
  std::vector<FeatureMap> features;
  features.reserve(p.pyramids.size());
  for (const auto& pyr : p.pyramids) {
    features.push_back(extract_features(pyr.levels[level], config.channels, config.groups));
  }
  std::vector<SourceView> sources;
  for (std::size_t i = 1; i < p.pyramids.size(); ++i) {
    sources.push_back({&features[i], p.pyramids[i].cameras[level]});
  }
  StageMatch out;
  ProbabilityVolume pv;
  {
    CostVolume agg;
    {
      CostVolume cv = build_cost_volume(features[0], p.pyramids[0].cameras[level], sources, *hyps,
                                        config.groups, threads);
      out.cost_bytes = cv.bytes();
      memory.acquire(cv.bytes());
      agg = aggregate(cv, config.aggregation_radius, threads);
      memory.acquire(agg.bytes());
      memory.release(cv.bytes());
    }
    pv = softmax_volume(agg, hyps, config.score_scale, threads);
    memory.acquire(pv.bytes());
    memory.release(agg.bytes());
  }
  out.reg = regress_depth(pv, threads);
  out.pv = std::move(pv);
  return out;
}

/// Centre and variance handed from one stage to a variance-interval stage.
struct VarianceHandoff {
  DepthMap center;
  VarianceMap variance;
};

VarianceHandoff variance_handoff(const StageMatch& m, const PipelineConfig& config, VolumeMemory& memory) {
  if (!config.auf) return {m.reg.depth, pixel_variance(m.pv, m.reg.depth, config.threads)};
  const ProbabilityVolume filtered =
      auf_filter(m.pv, m.reg.confidence, UnimodalParams::from_config(config), config.threads);
  memory.acquire(filtered.bytes());
  VarianceHandoff h;
  h.center = regress_depth(filtered, config.threads).depth;
  h.variance = config.variance_source == VarianceSource::kPostFilter
                   ? pixel_variance(filtered, h.center, config.threads)
                   : pixel_variance(m.pv, m.reg.depth, config.threads);
  memory.release(filtered.bytes());
  return h;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + mid));
  return m;
}

void window_stats(const DepthHypotheses& hyps, StageTrace& t) {
  std::vector<double> widths;
  widths.reserve(static_cast<std::size_t>(hyps.width()) * hyps.height());
  for (int y = 0; y < hyps.height(); ++y)
    for (int x = 0; x < hyps.width(); ++x) widths.push_back(hyps.span_at(x, y));
  const auto [lo, hi] = std::minmax_element(widths.begin(), widths.end());
  t.width_min = *lo;
  t.width_max = *hi;
  t.width_median = median(widths);
  t.spacing_median = t.width_median / (hyps.count() - 1);
}

DepthHypotheses handcrafted_window(const DepthMap& depth, double width, int count, const DepthRange& range) {
  Grid<DepthInterval> intervals(depth.width(), depth.height());
  for (std::size_t i = 0; i < depth.size(); ++i) {
    intervals[i] = fit_interval({depth[i] - 0.5 * width, depth[i] + 0.5 * width}, range, width);
  }
  return interval_hypotheses(intervals, count);
}

}  // namespace

PipelineResult run_pipeline(std::span<const View> views, const PipelineConfig& config) {
  const Prepared p = prepare(views, config);
  const int levels = config.num_levels;
  VolumeMemory memory;
  PipelineResult result;

  DepthMap prev_depth;
  VarianceHandoff handoff;
  double prev_spacing = 0.0;

  for (int stage = 1; stage <= levels; ++stage) {
    const auto start = std::chrono::steady_clock::now();
    const int level = stage - 1;
    const CameraParams& ref_cam = p.pyramids[0].cameras[level];
    const int w = p.pyramids[0].levels[level].width;
    const int h = p.pyramids[0].levels[level].height;
    const int count = config.hypotheses_at(stage);
    const Strategy strategy = schedule(stage, config);

    DepthHypotheses hyps;
    if (stage == 1) {
      hyps = dhs1_uniform(p.range.min, p.range.max, count, w, h);
    } else if (strategy == Strategy::kVarianceInterval) {
      hyps = dhs2_variance_interval(upsample_depth(handoff.center, w, h),
                                    upsample_bilinear(handoff.variance, w, h),
                                    IntervalParams(config.alpha_at(stage - 1), config.beta_at(stage - 1)),
                                    count, p.range, interval_width_floor(p.dhs1_spacing, stage));
    } else if (strategy == Strategy::kEpipolar) {
      std::vector<CameraParams> src;
      for (std::size_t i = 1; i < p.pyramids.size(); ++i) src.push_back(p.pyramids[i].cameras[level]);
      hyps = dhs3_epipolar(upsample_depth(prev_depth, w, h), ref_cam, src, count, config.delta_px, p.range,
                           2.0 * prev_spacing, config.threads);
    } else {
      hyps = handcrafted_window(upsample_depth(prev_depth, w, h), config.handcrafted_width_at(stage), count,
                                p.range);
    }
    auto shared = std::make_shared<const DepthHypotheses>(std::move(hyps));
    memory.reset_peak();
    memory.acquire(shared->bytes());

    StageMatch m = match_level(p, level, shared, config, memory);

    StageTrace t;
    t.stage = stage;
    t.strategy = strategy;
    t.width = w;
    t.height = h;
    t.hypotheses = count;
    t.cost_volume_bytes = m.cost_bytes;
    window_stats(*shared, t);
    std::size_t invalid = 0;
    for (unsigned char v : m.pv.valid) invalid += v == 0;
    t.invalid_fraction = static_cast<double>(invalid) / m.pv.valid.size();
    if (t.invalid_fraction >= 0.9) {
      throw NumericalError("stage " + std::to_string(stage) + ": " +
                           std::to_string(static_cast<int>(100 * t.invalid_fraction)) +
                           "% of pixels have no valid hypothesis (views do not overlap in the depth range?)");
    }

    if (stage < levels && schedule(stage + 1, config) == Strategy::kVarianceInterval) {
      handoff = variance_handoff(m, config, memory);
    }
    memory.release(m.pv.bytes());
    memory.release(shared->bytes());
    m.pv = {};

    t.peak_volume_bytes = memory.peak();
    result.peak_volume_bytes = std::max(result.peak_volume_bytes, memory.peak());
    result.largest_cost_volume_bytes = std::max(result.largest_cost_volume_bytes, m.cost_bytes);
    t.depth = m.reg.depth;
    t.confidence = m.reg.confidence;
    t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    prev_depth = std::move(m.reg.depth);
    prev_spacing = t.spacing_median;
    result.stages.push_back(std::move(t));
  }
  result.depth = result.stages.back().depth;
  result.confidence = result.stages.back().confidence;
  return result;
}

std::vector<AblationRow> ablation_run(std::span<const View> views, const PipelineConfig& config,
                                      std::span<const Schedule> schedules, const DepthMap& gt,
                                      const Mask& mask, double spacing) {
  std::vector<AblationRow> rows;
  for (Schedule s : schedules) {
    PipelineConfig c = config;
    c.schedule = s;
    AblationRow row;
    row.schedule = s;
    row.result = run_pipeline(views, c);
    const int w = row.result.depth.width();
    const int h = row.result.depth.height();
    const Mask m = crop(mask, w, h);
    row.stats = eval_depth(row.result.depth, crop(gt, w, h), spacing, &m);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<IntervalCalibration> calibrate_interval(std::span<const View> views,
                                                    const PipelineConfig& config,
                                                    std::span<const double> alphas,
                                                    const DepthMap& gt, const Mask& mask) {
  if (!gt.same_shape(mask)) throw InputError("mask differs in size from ground truth");
  const Prepared p = prepare(views, config);
  VolumeMemory memory;
  const int w0 = p.pyramids[0].levels[0].width;
  const int h0 = p.pyramids[0].levels[0].height;
  auto hyps = std::make_shared<const DepthHypotheses>(
      dhs1_uniform(p.range.min, p.range.max, config.hypotheses_at(1), w0, h0));
  const StageMatch m = match_level(p, 0, hyps, config, memory);
  const VarianceHandoff handoff = variance_handoff(m, config, memory);

  const int w = p.pyramids[0].levels[1].width;
  const int h = p.pyramids[0].levels[1].height;
  const DepthMap center = upsample_depth(handoff.center, w, h);
  const VarianceMap var = upsample_bilinear(handoff.variance, w, h);
  const double floor_width = interval_width_floor(p.dhs1_spacing, 2);
  const double scale = static_cast<double>(p.pyramids[0].finest().width) / w;

  std::vector<IntervalCalibration> out;
  for (double alpha : alphas) {
    const IntervalParams params(alpha, config.beta_at(1));
    std::size_t n = 0, covered = 0;
    std::vector<double> widths;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int gx = std::min(static_cast<int>((x + 0.5) * scale), gt.width() - 1);
        const int gy = std::min(static_cast<int>((y + 0.5) * scale), gt.height() - 1);
        if (mask(gx, gy) == 0 || !(gt(gx, gy) > 0.0)) continue;
        const DepthInterval iv = fit_interval(variance_interval(center(x, y), var(x, y), params), p.range,
                                              floor_width);
        ++n;
        covered += gt(gx, gy) >= iv.lo && gt(gx, gy) <= iv.hi;
        widths.push_back(iv.width());
      }
    }
    out.push_back({alpha, n ? static_cast<double>(covered) / n : 0.0, median(widths)});
  }
  return out;
}

}  // namespace cvpyr
