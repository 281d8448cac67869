#include "cvpyr/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "cvpyr/error.hpp"

namespace cvpyr {
namespace {

std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw InputError("config key '" + key + "': expected a number, got '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != static_cast<int>(d)) {
    throw InputError("config key '" + key + "': expected an integer, got '" + v + "'");
  }
  return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string l = lower(v);
  if (l == "on" || l == "true" || l == "1" || l == "yes") return true;
  if (l == "off" || l == "false" || l == "0" || l == "no") return false;
  throw InputError("config key '" + key + "': expected on/off, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T, typename F>
std::vector<T> to_list(const std::string& key, const std::string& v, F convert) {
  std::vector<T> out;
  for (const auto& item : split_list(v)) out.push_back(convert(key, item));
  if (out.empty()) throw InputError("config key '" + key + "': empty list");
  return out;
}

template <typename T>
T at_stage(const std::vector<T>& list, int stage) {
  const auto i = static_cast<std::size_t>(std::max(stage, 1) - 1);
  return i < list.size() ? list[i] : list.back();
}

template <typename T>
std::string join(const std::vector<T>& list) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < list.size(); ++i) out << (i ? ", " : "") << list[i];
  return out.str();
}

}  // namespace

Schedule parse_schedule(std::string_view name) {
  const std::string l = lower(trim(name));
  if (l == "full" || l == "dhs1+dhs2+dhs3") return Schedule::kFull;
  if (l == "dhs1") return Schedule::kUniformOnly;
  if (l == "dhs1+dhs2") return Schedule::kUniformThenVariance;
  if (l == "dhs1+dhs3") return Schedule::kUniformThenEpipolar;
  throw InputError("unknown strategy override '" + std::string(name) +
                   "' (expected dhs1, dhs1+dhs2, dhs1+dhs3 or full)");
}

std::string to_string(Schedule schedule) {
  switch (schedule) {
    case Schedule::kFull: return "full";
    case Schedule::kUniformOnly: return "dhs1";
    case Schedule::kUniformThenVariance: return "dhs1+dhs2";
    case Schedule::kUniformThenEpipolar: return "dhs1+dhs3";
  }
  return "?";
}

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kUniform: return "dhs1";
    case Strategy::kVarianceInterval: return "dhs2";
    case Strategy::kEpipolar: return "dhs3";
  }
  return "?";
}

int PipelineConfig::hypotheses_at(int stage) const { return at_stage(hypotheses, stage); }
double PipelineConfig::stage_weight_at(int stage) const { return at_stage(stage_weights, stage); }
double PipelineConfig::alpha_at(int stage) const { return at_stage(interval_alpha, stage); }
double PipelineConfig::beta_at(int stage) const { return at_stage(interval_beta, stage); }

double PipelineConfig::handcrafted_width_at(int stage) const {
  const int i = stage - 2;
  if (i < 0) return handcrafted_widths.front();
  if (static_cast<std::size_t>(i) < handcrafted_widths.size()) return handcrafted_widths[i];
  const int extra = i - static_cast<int>(handcrafted_widths.size()) + 1;
  return handcrafted_widths.back() / static_cast<double>(1 << std::min(extra, 30));
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& what) { throw InputError("invalid config: " + what); };
  if (num_levels < 2) fail("levels must be >= 2");
  if (hypotheses.empty()) fail("hypotheses list is empty");
  for (int d : hypotheses) {
    if (d < 2) fail("every stage needs at least 2 hypotheses");
  }
  if (channels != 4 && channels != 8 && channels != 16) fail("channels must be 4, 8 or 16");
  if (groups < 1 || channels % groups != 0) fail("channels must be divisible by groups");
  if (aggregation_radius < 0) fail("aggregation radius must be >= 0");
  if (!(score_scale > 0.0)) fail("score_scale must be positive");
  if (lambda_sf < 0 || lambda_c < 0) fail("loss weights must be >= 0");
  if (stage_weights.empty()) fail("stage weights list is empty");
  for (double w : stage_weights) {
    if (w < 0) fail("stage weights must be >= 0");
  }
  if (interval_alpha.empty() || interval_beta.empty()) fail("interval parameter lists are empty");
  for (double a : interval_alpha) {
    if (a < 0) fail("interval alpha must be >= 0");
  }
  for (double b : interval_beta) {
    if (b < 0) fail("interval beta must be >= 0");
  }
  if (alpha_c < 0) fail("alpha_c must be >= 0");
  if (!(beta_c > 0)) fail("beta_c must be > 0");
  if (gamma < 0) fail("gamma must be >= 0");
  if (!(delta_px > 0)) fail("delta_px must be > 0");
  if (handcrafted_widths.empty()) fail("handcrafted widths list is empty");
  for (double w : handcrafted_widths) {
    if (!(w > 0)) fail("handcrafted widths must be > 0");
  }
  if (!(tau_px > 0) || !(tau_rel > 0)) fail("fusion thresholds must be > 0");
  if (min_support < 1) fail("min_support must be >= 1");
  if (threads < 1) fail("threads must be >= 1");
  if ((depth_min > 0 || depth_max > 0) && !(depth_min > 0 && depth_min < depth_max)) {
    fail("depth range override must satisfy 0 < depth_min < depth_max");
  }
}

PipelineConfig parse_config(const std::string& text, PipelineConfig base) {
  using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;
  auto d = [](double PipelineConfig::*m) -> Setter {
    return [m](PipelineConfig& c, const std::string& k, const std::string& v) { c.*m = to_double(k, v); };
  };
  auto i = [](int PipelineConfig::*m) -> Setter {
    return [m](PipelineConfig& c, const std::string& k, const std::string& v) { c.*m = to_int(k, v); };
  };
  auto dl = [](std::vector<double> PipelineConfig::*m) -> Setter {
    return [m](PipelineConfig& c, const std::string& k, const std::string& v) {
      c.*m = to_list<double>(k, v, to_double);
    };
  };
  static const std::map<std::string, Setter> setters = {
      {"levels", i(&PipelineConfig::num_levels)},
      {"hypotheses",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.hypotheses = to_list<int>(k, v, to_int);
       }},
      {"channels", i(&PipelineConfig::channels)},
      {"groups", i(&PipelineConfig::groups)},
      {"aggregation_radius", i(&PipelineConfig::aggregation_radius)},
      {"score_scale", d(&PipelineConfig::score_scale)},
      {"lambda_sf", d(&PipelineConfig::lambda_sf)},
      {"lambda_c", d(&PipelineConfig::lambda_c)},
      {"stage_weights", dl(&PipelineConfig::stage_weights)},
      {"interval_alpha", dl(&PipelineConfig::interval_alpha)},
      {"interval_beta", dl(&PipelineConfig::interval_beta)},
      {"alpha_c", d(&PipelineConfig::alpha_c)},
      {"beta_c", d(&PipelineConfig::beta_c)},
      {"gamma", d(&PipelineConfig::gamma)},
      {"focal_weight",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         const std::string l = lower(v);
         if (l == "printed") {
           c.focal_weight = FocalWeight::kPrinted;
         } else if (l == "conventional") {
           c.focal_weight = FocalWeight::kConventional;
         } else {
           throw InputError("config key '" + k + "': expected printed or conventional");
         }
       }},
      {"delta_px", d(&PipelineConfig::delta_px)},
      {"auf", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.auf = to_bool(k, v); }},
      {"variance_source",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         const std::string l = lower(v);
         if (l == "post_auf" || l == "post") {
           c.variance_source = VarianceSource::kPostFilter;
         } else if (l == "pre_auf" || l == "pre") {
           c.variance_source = VarianceSource::kPreFilter;
         } else {
           throw InputError("config key '" + k + "': expected post_auf or pre_auf");
         }
       }},
      {"strategy",
       [](PipelineConfig& c, const std::string&, const std::string& v) { c.schedule = parse_schedule(v); }},
      {"handcrafted_widths", dl(&PipelineConfig::handcrafted_widths)},
      {"tau_px", d(&PipelineConfig::tau_px)},
      {"tau_rel", d(&PipelineConfig::tau_rel)},
      {"min_support", i(&PipelineConfig::min_support)},
      {"threads", i(&PipelineConfig::threads)},
      {"depth_min", d(&PipelineConfig::depth_min)},
      {"depth_max", d(&PipelineConfig::depth_max)},
  };

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
      throw InputError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw InputError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    it->second(base, key, value);
  }
  base.validate();
  return base;
}

PipelineConfig read_config(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

std::string format_config(const PipelineConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "levels = " << c.num_levels << '\n'
      << "hypotheses = " << join(c.hypotheses) << '\n'
      << "channels = " << c.channels << '\n'
      << "groups = " << c.groups << '\n'
      << "aggregation_radius = " << c.aggregation_radius << '\n'
      << "score_scale = " << c.score_scale << '\n'
      << "lambda_sf = " << c.lambda_sf << '\n'
      << "lambda_c = " << c.lambda_c << '\n'
      << "stage_weights = " << join(c.stage_weights) << '\n'
      << "interval_alpha = " << join(c.interval_alpha) << '\n'
      << "interval_beta = " << join(c.interval_beta) << '\n'
      << "alpha_c = " << c.alpha_c << '\n'
      << "beta_c = " << c.beta_c << '\n'
      << "gamma = " << c.gamma << '\n'
      << "focal_weight = " << (c.focal_weight == FocalWeight::kPrinted ? "printed" : "conventional") << '\n'
      << "delta_px = " << c.delta_px << '\n'
      << "auf = " << (c.auf ? "on" : "off") << '\n'
      << "variance_source = " << (c.variance_source == VarianceSource::kPostFilter ? "post_auf" : "pre_auf") << '\n'
      << "strategy = " << to_string(c.schedule) << '\n'
      << "handcrafted_widths = " << join(c.handcrafted_widths) << '\n'
      << "tau_px = " << c.tau_px << '\n'
      << "tau_rel = " << c.tau_rel << '\n'
      << "min_support = " << c.min_support << '\n'
      << "threads = " << c.threads << '\n'
      << "depth_min = " << c.depth_min << '\n'
      << "depth_max = " << c.depth_max << '\n';
  return out.str();
}

}  // namespace cvpyr
