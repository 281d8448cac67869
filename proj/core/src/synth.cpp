#include "cvpyr/synth.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cvpyr/error.hpp"
#include "cvpyr/fusion.hpp"
#include "cvpyr/parallel.hpp"

namespace cvpyr {
namespace {

std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

std::vector<double> numbers(const std::string& key, const std::string& value, std::size_t expected) {
  std::istringstream in(value);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw InputError("scene key '" + key + "': bad number '" + tok + "'");
    }
  }
  if (out.size() != expected) {
    throw InputError("scene key '" + key + "': expected " + std::to_string(expected) + " numbers");
  }
  return out;
}

int integer(const std::string& key, const std::string& value) {
  const double d = numbers(key, value, 1)[0];
  if (d != std::floor(d)) throw InputError("scene key '" + key + "': expected an integer");
  return static_cast<int>(d);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const Eigen::Vector3d& v) { return fmt(v.x()) + " " + fmt(v.y()) + " " + fmt(v.z()); }

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double lattice(std::int64_t x, std::int64_t y, std::int64_t z, std::uint64_t seed) {
  std::uint64_t h = splitmix(seed);
  h = splitmix(h ^ static_cast<std::uint64_t>(x));
  h = splitmix(h ^ static_cast<std::uint64_t>(y));
  h = splitmix(h ^ static_cast<std::uint64_t>(z));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

double noise_octave(const Eigen::Vector3d& p, std::uint64_t seed) {
  const double fx = std::floor(p.x()), fy = std::floor(p.y()), fz = std::floor(p.z());
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  const auto iz = static_cast<std::int64_t>(fz);
  const double tx = smooth(p.x() - fx), ty = smooth(p.y() - fy), tz = smooth(p.z() - fz);
  double c[2][2][2];
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int k = 0; k < 2; ++k) c[a][b][k] = lattice(ix + a, iy + b, iz + k, seed);
  auto lerp = [](double u, double v, double t) { return u + (v - u) * t; };
  const double x00 = lerp(c[0][0][0], c[1][0][0], tx);
  const double x10 = lerp(c[0][1][0], c[1][1][0], tx);
  const double x01 = lerp(c[0][0][1], c[1][0][1], tx);
  const double x11 = lerp(c[0][1][1], c[1][1][1], tx);
  return lerp(lerp(x00, x10, ty), lerp(x01, x11, ty), tz);
}

void consider(std::optional<RayHit>& best, double t, const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
              Eigen::Vector3d normal) {
  if (!(t > 0.0) || !std::isfinite(t)) return;
  if (best && best->t <= t) return;
  if (normal.dot(dir) > 0.0) normal = -normal;
  best = RayHit{t, origin + t * dir, normal};
}

double albedo(const SceneSpec& spec, const Eigen::Vector3d& x, std::uint64_t seed) {
  for (const auto& band : spec.bands) {
    if (x.x() >= band.x0 && x.x() < band.x1) return 0.5;
  }
  const double n = value_noise(x / spec.texture_scale, spec.octaves, seed);
  return std::clamp(0.5 + 1.8 * (n - 0.5), 0.05, 0.95);
}

Eigen::Vector3d pixel_direction(const CameraParams& cam, const Eigen::Matrix3d& k_inv, double u, double v) {
  return cam.rotation.transpose() * (k_inv * Eigen::Vector3d(u, v, 1.0));
}

}  // namespace

void SceneSpec::validate() const {
  if (width < 16 || height < 16) throw InputError("scene images must be at least 16x16");
  if (!(focal > 0.0)) throw InputError("scene focal length must be positive");
  if (cameras < 2) throw InputError("a scene needs at least 2 cameras");
  if (!(baseline > 0.0)) throw InputError("scene baseline must be positive");
  if (!(depth_min > 0.0) || !(depth_max > depth_min)) throw InputError("scene depth range is invalid");
  if (!(texture_scale > 0.0) || octaves < 1) throw InputError("scene texture parameters are invalid");
  if (supersample < 1) throw InputError("supersample must be >= 1");
  if (!(light.norm() > 0.0)) throw InputError("light direction must be non-zero");
  if (planes.empty() && spheres.empty() && steps.empty()) throw InputError("scene has no surfaces");
  for (const auto& p : planes) {
    if (!(p.normal.norm() > 0.0)) throw InputError("plane normal must be non-zero");
  }
  for (const auto& s : spheres) {
    if (!(s.radius > 0.0)) throw InputError("sphere radius must be positive");
  }
  for (const auto& s : steps) {
    if (!(s.near > 0.0) || !(s.far > s.near)) throw InputError("step needs 0 < near < far");
  }
}

SceneSpec parse_scene_spec(const std::string& text) {
  SceneSpec spec;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("scene spec line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto vec3 = [&] {
      const auto v = numbers(key, value, 3);
      return Eigen::Vector3d(v[0], v[1], v[2]);
    };
    if (key == "width") spec.width = integer(key, value);
    else if (key == "height") spec.height = integer(key, value);
    else if (key == "focal") spec.focal = numbers(key, value, 1)[0];
    else if (key == "cameras") spec.cameras = integer(key, value);
    else if (key == "rig") {
      if (value == "line") spec.rig = Rig::kLine;
      else if (value == "ring") spec.rig = Rig::kRing;
      else throw InputError("scene key 'rig': expected line or ring");
    } else if (key == "baseline") spec.baseline = numbers(key, value, 1)[0];
    else if (key == "target") spec.target = vec3();
    else if (key == "depth_min") spec.depth_min = numbers(key, value, 1)[0];
    else if (key == "depth_max") spec.depth_max = numbers(key, value, 1)[0];
    else if (key == "texture_scale") spec.texture_scale = numbers(key, value, 1)[0];
    else if (key == "octaves") spec.octaves = integer(key, value);
    else if (key == "ambient") spec.ambient = numbers(key, value, 1)[0];
    else if (key == "light") spec.light = vec3();
    else if (key == "supersample") spec.supersample = integer(key, value);
    else if (key == "plane") {
      const auto v = numbers(key, value, 6);
      spec.planes.push_back({{v[0], v[1], v[2]}, {v[3], v[4], v[5]}});
    } else if (key == "sphere") {
      const auto v = numbers(key, value, 4);
      spec.spheres.push_back({{v[0], v[1], v[2]}, v[3]});
    } else if (key == "step") {
      const auto v = numbers(key, value, 3);
      spec.steps.push_back({v[0], v[1], v[2]});
    } else if (key == "band") {
      const auto v = numbers(key, value, 2);
      spec.bands.push_back({v[0], v[1]});
    } else {
      throw InputError("scene spec line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

SceneSpec read_scene_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scene spec " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene_spec(ss.str());
}

std::string format_scene_spec(const SceneSpec& spec) {
  std::ostringstream out;
  out << "width = " << spec.width << "\n"
      << "height = " << spec.height << "\n"
      << "focal = " << fmt(spec.focal) << "\n"
      << "cameras = " << spec.cameras << "\n"
      << "rig = " << (spec.rig == Rig::kLine ? "line" : "ring") << "\n"
      << "baseline = " << fmt(spec.baseline) << "\n"
      << "target = " << fmt(spec.target) << "\n"
      << "depth_min = " << fmt(spec.depth_min) << "\n"
      << "depth_max = " << fmt(spec.depth_max) << "\n"
      << "texture_scale = " << fmt(spec.texture_scale) << "\n"
      << "octaves = " << spec.octaves << "\n"
      << "ambient = " << fmt(spec.ambient) << "\n"
      << "light = " << fmt(spec.light) << "\n"
      << "supersample = " << spec.supersample << "\n";
  for (const auto& p : spec.planes) out << "plane = " << fmt(p.point) << " " << fmt(p.normal) << "\n";
  for (const auto& s : spec.spheres) out << "sphere = " << fmt(s.center) << " " << fmt(s.radius) << "\n";
  for (const auto& s : spec.steps) out << "step = " << fmt(s.near) << " " << fmt(s.far) << " " << fmt(s.edge) << "\n";
  for (const auto& b : spec.bands) out << "band = " << fmt(b.x0) << " " << fmt(b.x1) << "\n";
  return out.str();
}

SceneSpec plane_scene(double depth) {
  SceneSpec spec;
  spec.planes.push_back({{0, 0, depth}, {0, 0, -1}});
  return spec;
}

SceneSpec step_scene() {
  SceneSpec spec;
  spec.steps.push_back({550, 700, 0});
  return spec;
}

SceneSpec sphere_scene() {
  SceneSpec spec;
  spec.spheres.push_back({{0, 0, 600}, 120});
  spec.planes.push_back({{0, 0, 900}, {0, 0, -1}});
  return spec;
}

SceneSpec band_scene() {
  SceneSpec spec = plane_scene(600);
  spec.bands.push_back({-60, 60});
  return spec;
}

std::optional<RayHit> cast_ray(const SceneSpec& spec, const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) {
  std::optional<RayHit> best;
  for (const auto& p : spec.planes) {
    const double denom = p.normal.dot(dir);
    if (std::abs(denom) < 1e-15) continue;
    consider(best, p.normal.dot(p.point - origin) / denom, origin, dir, p.normal.normalized());
  }
  for (const auto& s : spec.spheres) {
    const Eigen::Vector3d oc = origin - s.center;
    const double a = dir.squaredNorm();
    const double b = oc.dot(dir);
    const double c = oc.squaredNorm() - s.radius * s.radius;
    const double disc = b * b - a * c;
    if (disc < 0.0) continue;
    const double sq = std::sqrt(disc);
    for (double t : {(-b - sq) / a, (-b + sq) / a}) {
      if (t > 0.0) {
        consider(best, t, origin, dir, (origin + t * dir - s.center) / s.radius);
        break;
      }
    }
  }
  for (const auto& s : spec.steps) {
    if (dir.z() != 0.0) {
      const double tn = (s.near - origin.z()) / dir.z();
      if ((origin + tn * dir).x() < s.edge) consider(best, tn, origin, dir, {0, 0, -1});
      const double tf = (s.far - origin.z()) / dir.z();
      if ((origin + tf * dir).x() >= s.edge) consider(best, tf, origin, dir, {0, 0, -1});
    }
    if (dir.x() != 0.0) {
      const double tr = (s.edge - origin.x()) / dir.x();
      const double z = (origin + tr * dir).z();
      if (z >= s.near && z <= s.far) consider(best, tr, origin, dir, {-1, 0, 0});
    }
  }
  return best;
}

std::optional<double> surface_depth(const SceneSpec& spec, const CameraParams& cam, double u, double v) {
  const Eigen::Vector3d dir = pixel_direction(cam, cam.intrinsics.inverse(), u, v);
  const auto hit = cast_ray(spec, cam.center(), dir);
  if (!hit) return std::nullopt;
  return hit->t;
}

double value_noise(const Eigen::Vector3d& p, int octaves, std::uint64_t seed) {
  double sum = 0.0, amp = 1.0, norm = 0.0, freq = 1.0;
  for (int o = 0; o < octaves; ++o) {
    sum += amp * noise_octave(p * freq, seed + static_cast<std::uint64_t>(o) * 0x632be59bd9b4e019ull);
    norm += amp;
    amp *= 0.5;
    freq *= 2.0;
  }
  return sum / norm;
}

std::vector<CameraParams> scene_cameras(const SceneSpec& spec) {
  Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
  k(0, 0) = k(1, 1) = spec.focal;
  k(0, 2) = spec.width / 2.0;
  k(1, 2) = spec.height / 2.0;
  std::vector<CameraParams> cams;
  for (int i = 0; i < spec.cameras; ++i) {
    Eigen::Vector3d pos = Eigen::Vector3d::Zero();
    if (i > 0 && spec.rig == Rig::kLine) {
      const int k_off = (i + 1) / 2;
      pos.x() = (i % 2 == 1 ? 1.0 : -1.0) * k_off * spec.baseline;
    } else if (i > 0) {
      const double a = 2.0 * std::numbers::pi * (i - 1) / (spec.cameras - 1);
      pos = {spec.baseline * std::cos(a), spec.baseline * std::sin(a), 0.0};
    }
    cams.push_back(look_at(pos, spec.target, {0, 1, 0}, k, spec.depth_min, spec.depth_max));
  }
  return cams;
}

SyntheticScene render_scene(const SceneSpec& spec, std::uint64_t seed) {
  spec.validate();
  SyntheticScene scene;
  scene.spec = spec;
  scene.seed = seed;
  scene.cameras = scene_cameras(spec);
  const Eigen::Vector3d light = spec.light.normalized();
  const int s = spec.supersample;
  for (const auto& cam : scene.cameras) {
    const Eigen::Matrix3d k_inv = cam.intrinsics.inverse();
    const Eigen::Vector3d origin = cam.center();
    Image img;
    img.width = spec.width;
    img.height = spec.height;
    img.channels = 1;
    img.data.assign(static_cast<std::size_t>(spec.width) * spec.height, 0.0f);
    DepthMap gt(spec.width, spec.height, 0.0);
    parallel_rows(spec.height, 1, [&](int y) {
      for (int x = 0; x < spec.width; ++x) {
        if (auto hit = cast_ray(spec, origin, pixel_direction(cam, k_inv, x + 0.5, y + 0.5))) {
          gt(x, y) = hit->t;
        }
        double acc = 0.0;
        for (int sy = 0; sy < s; ++sy) {
          for (int sx = 0; sx < s; ++sx) {
            const double u = x + (sx + 0.5) / s;
            const double v = y + (sy + 0.5) / s;
            const auto hit = cast_ray(spec, origin, pixel_direction(cam, k_inv, u, v));
            if (!hit) continue;
            const double shade = spec.ambient + (1.0 - spec.ambient) * std::max(0.0, -hit->normal.dot(light));
            acc += albedo(spec, hit->point, seed) * shade;
          }
        }
        img.at(x, y) = static_cast<float>(std::clamp(acc / (s * s), 0.0, 1.0));
      }
    });
    for (double d : gt.values()) {
      if (d > 0.0 && (d < spec.depth_min || d > spec.depth_max)) {
        throw InputError("visible surface at depth " + fmt(d) + " lies outside the scene depth range");
      }
    }
    scene.images.push_back(std::move(img));
    scene.gt_depths.push_back(std::move(gt));
  }
  return scene;
}

namespace {

bool visible_in(const SceneSpec& spec, const CameraParams& cam, const Eigen::Vector3d& x, Eigen::Vector2d* pixel) {
  const auto q = cam.project(x);
  if (!q) return false;
  if (pixel != nullptr) *pixel = *q;
  const auto d = surface_depth(spec, cam, q->x(), q->y());
  if (!d) return false;
  const double z = cam.world_to_camera(x).z();
  return std::abs(*d - z) <= 1e-7 * z;
}

}  // namespace

std::vector<Eigen::Vector3d> SyntheticScene::covisible_samples(int min_views) const {
  std::vector<Eigen::Vector3d> out;
  for (std::size_t v = 0; v < cameras.size(); ++v) {
    const auto& cam = cameras[v];
    const auto& gt = gt_depths[v];
    for (int y = 0; y < gt.height(); ++y) {
      for (int x = 0; x < gt.width(); ++x) {
        if (!(gt(x, y) > 0.0)) continue;
        const Eigen::Matrix3d k_inv = cam.intrinsics.inverse();
        const auto hit = cast_ray(spec, cam.center(), pixel_direction(cam, k_inv, x + 0.5, y + 0.5));
        if (!hit) continue;
        int count = 1;
        for (std::size_t j = 0; j < cameras.size(); ++j) {
          if (j == v) continue;
          Eigen::Vector2d q;
          if (visible_in(spec, cameras[j], hit->point, &q) &&
              in_depth_sampling_domain(gt_depths[j].width(), gt_depths[j].height(), q)) {
            ++count;
          }
        }
        if (count >= min_views) out.push_back(hit->point);
      }
    }
  }
  return out;
}

Mask SyntheticScene::interior_mask(int view, int border) const {
  const auto& cam = cameras.at(static_cast<std::size_t>(view));
  const auto& gt = gt_depths[static_cast<std::size_t>(view)];
  Mask mask(gt.width(), gt.height(), 0);
  const Eigen::Matrix3d k_inv = cam.intrinsics.inverse();
  for (int y = border; y < gt.height() - border; ++y) {
    for (int x = border; x < gt.width() - border; ++x) {
      if (!(gt(x, y) > 0.0)) continue;
      const auto hit = cast_ray(spec, cam.center(), pixel_direction(cam, k_inv, x + 0.5, y + 0.5));
      if (!hit) continue;
      bool ok = true;
      for (std::size_t j = 0; j < cameras.size() && ok; ++j) {
        if (static_cast<int>(j) == view) continue;
        Eigen::Vector2d q;
        ok = visible_in(spec, cameras[j], hit->point, &q) && q.x() >= border && q.y() >= border &&
             q.x() <= gt_depths[j].width() - border && q.y() <= gt_depths[j].height() - border;
      }
      mask(x, y) = ok ? 1 : 0;
    }
  }
  return mask;
}

}  // namespace cvpyr
