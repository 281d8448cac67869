// cvpyr: command-line front end for depth estimation, fusion, evaluation and
// the synthetic benchmark.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cvpyr/config.hpp"
#include "cvpyr/error.hpp"
#include "cvpyr/fusion.hpp"
#include "cvpyr/io.hpp"
#include "cvpyr/metrics.hpp"
#include "cvpyr/pipeline.hpp"
#include "cvpyr/point_cloud.hpp"
#include "cvpyr/synth.hpp"
#include "cvpyr/unimodal.hpp"

namespace {

using nlohmann::json;
using namespace cvpyr;

fs::path find_camera(const fs::path& dir, const fs::path& data_file) {
  const std::string stem = data_file.stem().string();
  for (const auto& name : {stem + "_cam.txt", stem + ".txt"}) {
    if (fs::exists(dir / name)) return dir / name;
  }
  throw InputError("no camera file for " + data_file.string() + " in " + dir.string() + " (expected " + stem +
                   "_cam.txt)");
}

/// Writes JSON lines to a file or, for "-", to stdout.
class SummarySink {
 public:
  explicit SummarySink(const std::string& target) {
    if (target.empty()) return;
    if (target == "-") {
      out_ = &std::cout;
    } else {
      file_.open(target);
      if (!file_) throw InputError("cannot write summary " + target);
      out_ = &file_;
    }
  }
  void line(const json& j) {
    if (out_ != nullptr) *out_ << j.dump() << '\n';
  }

 private:
  std::ofstream file_;
  std::ostream* out_ = nullptr;
};

json stage_json(const StageTrace& t) {
  return {{"stage", t.stage},
          {"strategy", to_string(t.strategy)},
          {"width", t.width},
          {"height", t.height},
          {"hypotheses", t.hypotheses},
          {"window_min", t.width_min},
          {"window_median", t.width_median},
          {"window_max", t.width_max},
          {"spacing_median", t.spacing_median},
          {"invalid_fraction", t.invalid_fraction},
          {"seconds", t.seconds},
          {"peak_volume_bytes", t.peak_volume_bytes},
          {"cost_volume_bytes", t.cost_volume_bytes}};
}

json stats_json(const DepthErrorStats& s) {
  return {{"pixels", s.pixels},     {"invalid", s.invalid},   {"mean", s.mean},        {"median", s.median},
          {"within_1", s.within_1}, {"within_2", s.within_2}, {"within_4", s.within_4}};
}

std::vector<double> parse_doubles(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw InputError("bad number '" + item + "' in list");
    }
  }
  if (out.empty()) throw InputError("empty number list");
  return out;
}

struct SceneOptions {
  std::string spec_path;
  std::string scene = "plane";
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_option("--spec", spec_path, "Scene spec file (overrides --scene)");
    app->add_option("--scene", scene, "Built-in scene")->check(CLI::IsMember({"plane", "step", "sphere", "band"}));
    app->add_option("--seed", seed, "Texture seed");
  }
  SceneSpec spec() const {
    if (!spec_path.empty()) return read_scene_spec(spec_path);
    if (scene == "step") return step_scene();
    if (scene == "sphere") return sphere_scene();
    if (scene == "band") return band_scene();
    return plane_scene();
  }
};

std::vector<View> scene_views(const SyntheticScene& scene) {
  std::vector<View> views;
  for (std::size_t i = 0; i < scene.images.size(); ++i) views.push_back({scene.images[i], scene.cameras[i]});
  return views;
}

struct ConfigOptions {
  std::string path;
  std::optional<int> levels;
  std::string strategy;
  std::string auf;
  std::optional<int> threads;

  void add(CLI::App* app) {
    app->add_option("--config", path, "Config file (key = value)");
    app->add_option("--levels", levels, "Pyramid levels L (total, finest included)");
    app->add_option("--strategy", strategy, "full | dhs1 | dhs1+dhs2 | dhs1+dhs3");
    app->add_option("--auf", auf, "Unimodal filtering before variance intervals")
        ->check(CLI::IsMember({"on", "off"}));
    app->add_option("--threads", threads, "Worker threads");
  }
  PipelineConfig resolve() const {
    PipelineConfig c = path.empty() ? PipelineConfig{} : read_config(path);
    if (levels) {
      c.num_levels = *levels;
    }
    if (!strategy.empty()) c.schedule = parse_schedule(strategy);
    if (!auf.empty()) c.auf = auf == "on";
    if (threads) c.threads = *threads;
    c.validate();
    return c;
  }
};

void cmd_depth(const std::string& ref, const std::vector<std::string>& srcs, const std::string& cams,
               const ConfigOptions& copt, const std::string& out, const std::string& conf_out,
               const std::string& summary) {
  const PipelineConfig config = copt.resolve();
  std::vector<View> views;
  std::vector<std::string> paths{ref};
  paths.insert(paths.end(), srcs.begin(), srcs.end());
  for (const auto& p : paths) views.push_back({read_image(p), read_camera_dtu(find_camera(cams, p))});
  SummarySink sink(summary);
  const PipelineResult r = run_pipeline(views, config);
  write_pfm(out, from_depth_map(r.depth));
  if (!conf_out.empty()) write_pfm(conf_out, from_depth_map(r.confidence));
  for (const auto& s : r.stages) sink.line(stage_json(s));
  sink.line({{"peak_volume_bytes", r.peak_volume_bytes}, {"largest_cost_volume_bytes", r.largest_cost_volume_bytes}});
}

void cmd_fuse(const std::vector<std::string>& depth_paths, const std::vector<std::string>& image_paths,
              const std::string& cams, FusionParams params, const ConfigOptions& copt, bool tau_px_set,
              bool tau_rel_set, bool support_set, const std::string& out, int threads) {
  if (!copt.path.empty()) {
    const PipelineConfig c = read_config(copt.path);
    if (!tau_px_set) params.tau_px = c.tau_px;
    if (!tau_rel_set) params.tau_rel = c.tau_rel;
    if (!support_set) params.min_support = c.min_support;
  }
  if (!image_paths.empty() && image_paths.size() != depth_paths.size()) {
    throw InputError("--images must list one image per depth map");
  }
  std::vector<DepthMap> depths;
  std::vector<Image> images;
  std::vector<FusionView> views;
  for (std::size_t i = 0; i < depth_paths.size(); ++i) {
    depths.push_back(to_depth_map(read_pfm(depth_paths[i])));
    if (!image_paths.empty()) {
      Image img = read_image(image_paths[i]);
      if (img.width < depths.back().width() || img.height < depths.back().height()) {
        throw InputError("image " + image_paths[i] + " is smaller than its depth map");
      }
      images.push_back(crop(img, depths.back().width(), depths.back().height()));
    }
  }
  for (std::size_t i = 0; i < depth_paths.size(); ++i) {
    views.push_back({&depths[i], read_camera_dtu(find_camera(cams, depth_paths[i])),
                     images.empty() ? nullptr : &images[i]});
  }
  FusionStatus status;
  const PointCloud cloud = fuse(views, params, threads, &status);
  if (status.empty) std::cerr << "warning: fused cloud is empty\n";
  write_ply(out, cloud);
  std::cout << json{{"points", cloud.size()}, {"candidates", status.candidates}}.dump() << '\n';
}

void cmd_eval(const std::string& depth, const std::string& gt, double spacing, const std::string& mask_path,
              const std::string& cloud_path, const std::string& gt_cloud_path, double d_max, double voxel,
              int threads) {
  if (!depth.empty()) {
    if (gt.empty()) throw InputError("--gt is required with --depth");
    if (!(spacing > 0.0)) throw InputError("--spacing must be positive");
    const DepthMap d = to_depth_map(read_pfm(depth));
    DepthMap g = to_depth_map(read_pfm(gt));
    if (g.width() >= d.width() && g.height() >= d.height()) g = crop(g, d.width(), d.height());
    std::optional<Mask> mask;
    if (!mask_path.empty()) {
      const Image m = to_gray(read_image(mask_path));
      if (m.width < d.width() || m.height < d.height()) throw InputError("mask is smaller than the depth map");
      mask.emplace(d.width(), d.height());
      for (int y = 0; y < d.height(); ++y)
        for (int x = 0; x < d.width(); ++x) (*mask)(x, y) = m.at(x, y) > 0.0f;
    }
    std::cout << stats_json(eval_depth(d, g, spacing, mask ? &*mask : nullptr)).dump() << '\n';
    return;
  }
  if (cloud_path.empty() || gt_cloud_path.empty()) {
    throw InputError("eval needs --depth/--gt or --cloud/--gt-cloud");
  }
  PointCloud cloud = read_ply(cloud_path);
  PointCloud gt_cloud = read_ply(gt_cloud_path);
  if (voxel > 0.0) {
    cloud = voxel_downsample(cloud, voxel);
    gt_cloud = voxel_downsample(gt_cloud, voxel);
  }
  const auto a = cloud.positions();
  const auto b = gt_cloud.positions();
  const CloudScores s = eval_cloud(a, b, d_max, threads);
  std::cout << json{{"accuracy", s.accuracy}, {"completeness", s.completeness}, {"overall", s.overall}}.dump()
            << '\n';
}

std::string view_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08zu", i);
  return buf;
}

void cmd_synth(const SceneOptions& sopt, const std::string& out, int gt_min_views, int border) {
  const SyntheticScene scene = render_scene(sopt.spec(), sopt.seed);
  const fs::path root(out);
  for (const char* sub : {"images", "depths", "cams", "masks"}) fs::create_directories(root / sub);
  for (std::size_t i = 0; i < scene.images.size(); ++i) {
    const std::string name = view_name(i);
    write_png(root / "images" / (name + ".png"), scene.images[i]);
    write_pfm(root / "depths" / (name + ".pfm"), from_depth_map(scene.gt_depths[i]));
    write_camera_dtu(root / "cams" / (name + "_cam.txt"), scene.cameras[i]);
    const Mask m = scene.interior_mask(static_cast<int>(i), border);
    Image mi(m.width(), m.height(), 1);
    for (std::size_t k = 0; k < m.size(); ++k) mi.data[k] = m[k] ? 1.0f : 0.0f;
    write_png(root / "masks" / (name + ".png"), mi);
  }
  std::ofstream(root / "scene.txt") << "# seed " << sopt.seed << "\n" << format_scene_spec(scene.spec);
  PointCloud gt;
  const int min_views = gt_min_views > 0 ? gt_min_views : static_cast<int>(scene.cameras.size());
  for (const auto& p : scene.covisible_samples(min_views)) gt.points.push_back({p, {255, 255, 255}, min_views});
  write_ply(root / "gt_cloud.ply", gt);
  std::cout << json{{"views", scene.images.size()}, {"gt_points", gt.size()}}.dump() << '\n';
}

int cmd_losscheck(int instances, std::uint64_t seed, double tolerance) {
  const auto start = std::chrono::steady_clock::now();
  const auto rows = run_gradient_checks(instances, seed, tolerance);
  bool ok = true;
  for (const auto& r : rows) {
    std::cout << json{{"check", r.name},
                      {"instances", r.instances},
                      {"max_relative_error", r.max_relative_error},
                      {"passed", r.passed}}
                     .dump()
              << '\n';
    ok = ok && r.passed;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << json{{"seconds", secs}, {"passed", ok}}.dump() << '\n';
  return ok ? 0 : 2;
}

void cmd_calibrate(const SceneOptions& sopt, const ConfigOptions& copt, const std::string& alphas, double target,
                   int border) {
  const PipelineConfig config = copt.resolve();
  const SyntheticScene scene = render_scene(sopt.spec(), sopt.seed);
  const auto views = scene_views(scene);
  const auto values = parse_doubles(alphas);
  const auto rows = calibrate_interval(views, config, values, scene.gt_depths[0], scene.interior_mask(0, border));
  std::optional<double> pick;
  for (const auto& r : rows) {
    std::cout << json{{"alpha", r.alpha}, {"coverage", r.coverage}, {"median_width", r.median_width}}.dump()
              << '\n';
    if (!pick && r.coverage >= target) pick = r.alpha;
  }
  json summary = {{"target_coverage", target}};
  summary["alpha"] = pick ? json(*pick) : json(nullptr);
  std::cout << summary.dump() << '\n';
}

void cmd_ablation(const SceneOptions& sopt, const ConfigOptions& copt, int border) {
  const PipelineConfig config = copt.resolve();
  const SyntheticScene scene = render_scene(sopt.spec(), sopt.seed);
  const auto views = scene_views(scene);
  PipelineConfig full = config;
  full.schedule = Schedule::kFull;
  const double spacing = run_pipeline(views, full).finest_spacing();
  const std::vector<Schedule> schedules = {Schedule::kUniformOnly, Schedule::kUniformThenVariance,
                                           Schedule::kUniformThenEpipolar, Schedule::kFull};
  const auto rows = ablation_run(views, config, schedules, scene.gt_depths[0], scene.interior_mask(0, border), spacing);
  for (const auto& r : rows) {
    json j = stats_json(r.stats);
    j["schedule"] = to_string(r.schedule);
    j["spacing"] = spacing;
    std::cout << j.dump() << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coarse-to-fine multi-view stereo with multi-strategy depth sampling"};
  app.require_subcommand(1);

  // depth
  auto* depth = app.add_subcommand("depth", "Estimate the reference view's depth map");
  std::string ref, cams, out, conf_out, summary;
  std::vector<std::string> srcs;
  ConfigOptions depth_cfg;
  depth->add_option("--ref", ref, "Reference image")->required();
  depth->add_option("--src", srcs, "Source images")->required();
  depth->add_option("--cams", cams, "Directory of <stem>_cam.txt files")->required();
  depth->add_option("--out", out, "Output depth map (PFM)")->required();
  depth->add_option("--confidence", conf_out, "Output confidence map (PFM)");
  depth->add_option("--summary", summary, "JSON-lines run summary file, '-' for stdout");
  depth_cfg.add(depth);

  // fuse
  auto* fuse_cmd = app.add_subcommand("fuse", "Fuse per-view depth maps into a point cloud");
  std::vector<std::string> depth_paths, image_paths;
  std::string fuse_cams, fuse_out;
  FusionParams fparams;
  ConfigOptions fuse_cfg;
  int fuse_threads = 1;
  fuse_cmd->add_option("--depths", depth_paths, "Depth maps (PFM), one per view")->required();
  fuse_cmd->add_option("--images", image_paths, "Colour sources, one per depth map");
  fuse_cmd->add_option("--cams", fuse_cams, "Directory of <stem>_cam.txt files")->required();
  auto* tau_px = fuse_cmd->add_option("--tau-px", fparams.tau_px, "Round-trip pixel threshold");
  auto* tau_rel = fuse_cmd->add_option("--tau-rel", fparams.tau_rel, "Relative depth threshold");
  auto* min_support = fuse_cmd->add_option("--min-support", fparams.min_support, "Agreeing views required");
  fuse_cmd->add_option("--voxel", fparams.voxel_size, "Dedup voxel edge (scene units, 0 = off)");
  fuse_cmd->add_option("--config", fuse_cfg.path, "Config file for thresholds");
  fuse_cmd->add_option("--threads", fuse_threads, "Worker threads");
  fuse_cmd->add_option("--out", fuse_out, "Output PLY")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Score a depth map or a point cloud");
  std::string eval_depth_path, eval_gt, eval_mask, eval_cloud_path, eval_gt_cloud;
  double spacing = 0.0, d_max = 0.0, eval_voxel = 0.0;
  int eval_threads = 1;
  eval->add_option("--depth", eval_depth_path, "Estimated depth map (PFM)");
  eval->add_option("--gt", eval_gt, "Ground-truth depth map (PFM)");
  eval->add_option("--spacing", spacing, "Tolerance unit for the within-k fractions");
  eval->add_option("--mask", eval_mask, "Evaluation mask image (non-zero = evaluate)");
  eval->add_option("--cloud", eval_cloud_path, "Reconstructed cloud (PLY)");
  eval->add_option("--gt-cloud", eval_gt_cloud, "Ground-truth cloud (PLY)");
  eval->add_option("--dmax", d_max, "Distance truncation (0 = none)");
  eval->add_option("--voxel", eval_voxel, "Downsample both clouds first (0 = off)");
  eval->add_option("--threads", eval_threads, "Worker threads");

  // synth
  auto* synth = app.add_subcommand("synth", "Render a synthetic scene with ground truth");
  SceneOptions synth_scene;
  std::string synth_out;
  int gt_min_views = 0, synth_border = 8;
  synth_scene.add(synth);
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--gt-min-views", gt_min_views, "Views a ground-truth sample must be visible in (0 = all)");
  synth->add_option("--border", synth_border, "Interior mask border (pixels)");

  // losscheck
  auto* losscheck = app.add_subcommand("losscheck", "Finite-difference audit of every loss gradient");
  int instances = 50;
  std::uint64_t loss_seed = 1;
  double tolerance = 1e-5;
  losscheck->add_option("--instances", instances, "Random instances per check");
  losscheck->add_option("--seed", loss_seed, "RNG seed");
  losscheck->add_option("--tolerance", tolerance, "Max relative error");

  // calibrate-interval
  auto* calibrate = app.add_subcommand("calibrate-interval", "Sweep the variance-interval scale on a synthetic scene");
  SceneOptions cal_scene;
  ConfigOptions cal_cfg;
  std::string alphas = "0.5,1,1.5,2,2.5,3,4";
  double target = 0.95;
  int cal_border = 8;
  cal_scene.add(calibrate);
  cal_cfg.add(calibrate);
  calibrate->add_option("--alphas", alphas, "Comma-separated alpha values");
  calibrate->add_option("--target", target, "Coverage the recommended alpha must reach");
  calibrate->add_option("--border", cal_border, "Interior mask border (pixels)");

  // ablation
  auto* ablation = app.add_subcommand("ablation", "Compare sampling schedules on a synthetic scene");
  SceneOptions abl_scene;
  ConfigOptions abl_cfg;
  int abl_border = 8;
  abl_scene.add(ablation);
  abl_cfg.add(ablation);
  ablation->add_option("--border", abl_border, "Interior mask border (pixels)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (depth->parsed()) cmd_depth(ref, srcs, cams, depth_cfg, out, conf_out, summary);
    if (fuse_cmd->parsed()) {
      cmd_fuse(depth_paths, image_paths, fuse_cams, fparams, fuse_cfg, tau_px->count() > 0, tau_rel->count() > 0,
               min_support->count() > 0, fuse_out, fuse_threads);
    }
    if (eval->parsed()) {
      cmd_eval(eval_depth_path, eval_gt, spacing, eval_mask, eval_cloud_path, eval_gt_cloud, d_max, eval_voxel,
               eval_threads);
    }
    if (synth->parsed()) cmd_synth(synth_scene, synth_out, gt_min_views, synth_border);
    if (losscheck->parsed()) return cmd_losscheck(instances, loss_seed, tolerance);
    if (calibrate->parsed()) cmd_calibrate(cal_scene, cal_cfg, alphas, target, cal_border);
    if (ablation->parsed()) cmd_ablation(abl_scene, abl_cfg, abl_border);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
