#include "rodom/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rodom/errors.hpp"

namespace rodom {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw MalformedFileError(path.string() + ": cannot open");
  std::stringstream ss;
  ss << is.rdbuf();
  return from_string(ss.str(), path.string());
}

KeyValueFile KeyValueFile::from_string(const std::string& text, const std::string& origin) {
  KeyValueFile kv;
  kv.origin_ = origin;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw MalformedFileError(origin + ":" + std::to_string(line_no) +
                               ": expected 'key = value'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw MalformedFileError(origin + ":" + std::to_string(line_no) + ": empty key");
    }
    if (!kv.values_.emplace(key, value).second) {
      throw MalformedFileError(origin + ":" + std::to_string(line_no) + ": duplicate key '" +
                               key + "'");
    }
  }
  return kv;
}

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) {
  consumed_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueFile::get_double(const std::string& key, double fallback) {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw MalformedFileError(origin_ + ": key '" + key + "': bad number '" + it->second + "'");
  }
}

int KeyValueFile::get_int(const std::string& key, int fallback) {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw MalformedFileError(origin_ + ": key '" + key + "': bad integer '" + it->second + "'");
  }
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw MalformedFileError(origin_ + ": key '" + key + "': bad boolean '" + it->second + "'");
}

std::string KeyValueFile::require(const std::string& key) {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw MalformedFileError(origin_ + ": missing required key '" + key + "'");
  }
  return it->second;
}

void KeyValueFile::reject_unknown_keys() const {
  for (const auto& [key, value] : values_) {
    if (!consumed_.count(key)) {
      throw MalformedFileError(origin_ + ": unknown key '" + key + "'");
    }
  }
}

std::vector<Pose2> parse_mounts(const std::string& text) {
  std::vector<Pose2> mounts;
  std::istringstream groups(text);
  std::string group;
  while (std::getline(groups, group, ';')) {
    std::istringstream ss(group);
    Pose2 p;
    if (!(ss >> p.x >> p.y >> p.theta)) {
      throw MalformedFileError("sensor_mounts: expected 'x y theta' triples, got '" + group +
                               "'");
    }
    double extra;
    if (ss >> extra) {
      throw MalformedFileError("sensor_mounts: too many values in '" + group + "'");
    }
    mounts.push_back(p);
  }
  return mounts;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  KeyValueFile kv = KeyValueFile::load(path);
  const std::string mode_str = kv.require("mode");
  ScanMode mode;
  if (mode_str == "automotive") {
    mode = ScanMode::automotive;
  } else if (mode_str == "scanning") {
    mode = ScanMode::scanning;
  } else {
    throw MalformedFileError(path.string() + ": mode must be automotive or scanning, got '" +
                             mode_str + "'");
  }

  PipelineConfig cfg = default_config(mode);
  if (kv.has("rng_seed")) {
    const std::string seed = kv.require("rng_seed");
    try {
      std::size_t pos = 0;
      cfg.rng_seed = std::stoull(seed, &pos);
      if (pos != seed.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw MalformedFileError(path.string() + ": key 'rng_seed': bad integer '" + seed + "'");
    }
  }
  cfg.submap_n = kv.get_int("submap.n", cfg.submap_n);
  if (kv.has("downsample_hz")) cfg.downsample_hz = kv.get_double("downsample_hz", 0.0);
  if (kv.has("sensor_mounts")) cfg.sensor_mounts = parse_mounts(kv.require("sensor_mounts"));

  auto& pp = cfg.preprocess;
  pp.threshold = kv.get_double("preprocess.threshold", pp.threshold);
  pp.max_range_scanning = kv.get_double("preprocess.max_range_scanning", pp.max_range_scanning);
  pp.max_range_automotive =
      kv.get_double("preprocess.max_range_automotive", pp.max_range_automotive);
  pp.ransac_inlier_threshold =
      kv.get_double("preprocess.ransac_inlier_threshold", pp.ransac_inlier_threshold);
  pp.ransac_iterations = kv.get_int("preprocess.ransac_iterations", pp.ransac_iterations);
  pp.ransac_min_inlier_fraction =
      kv.get_double("preprocess.ransac_min_inlier_fraction", pp.ransac_min_inlier_fraction);
  pp.azimuth_sigma_scanning = kv.get_double("preprocess.azimuth_sigma_scanning_deg",
                                            pp.azimuth_sigma_scanning * 180.0 / kPi) *
                              kPi / 180.0;

  auto& ndt = cfg.ndt;
  ndt.grid_size = kv.get_double("ndt.grid_size", ndt.grid_size);
  ndt.shift_s = kv.get_double("ndt.shift_s", ndt.shift_s);
  ndt.min_points_per_cell = kv.get_int("ndt.min_points_per_cell", ndt.min_points_per_cell);
  ndt.cov_condition_cap = kv.get_double("ndt.cov_condition_cap", ndt.cov_condition_cap);

  auto& m = cfg.match;
  m.max_newton_iterations = kv.get_int("match.max_newton_iterations", m.max_newton_iterations);
  m.convergence_epsilon = kv.get_double("match.convergence_epsilon", m.convergence_epsilon);
  m.max_step_halvings = kv.get_int("match.max_step_halvings", m.max_step_halvings);
  m.max_acceleration = kv.get_double("match.max_acceleration", m.max_acceleration);
  m.grid_escalation_step = kv.get_double("match.grid_escalation_step", m.grid_escalation_step);
  m.grid_ceiling = kv.get_double("match.grid_ceiling", m.grid_ceiling);
  m.shift_halvings_max = kv.get_int("match.shift_halvings_max", m.shift_halvings_max);
  m.low_speed_grid = kv.get_double("match.low_speed_grid", m.low_speed_grid);
  m.low_speed_threshold = kv.get_double("match.low_speed_threshold", m.low_speed_threshold);
  m.uncertainty_weighting = kv.get_bool("match.uncertainty_weighting", m.uncertainty_weighting);

  kv.reject_unknown_keys();

  if (cfg.mode == ScanMode::scanning) cfg.submap_n = 1;
  if (cfg.submap_n < 1) {
    throw ValueOutOfRangeError(path.string() + ": submap.n must be >= 1");
  }
  return cfg;
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
  KeyValueFile kv = KeyValueFile::load(path);
  SynthConfig cfg;
  auto& n = cfg.noise;
  n.range_sigma = kv.get_double("noise.range_sigma", n.range_sigma);
  n.azimuth_sigma =
      kv.get_double("noise.azimuth_sigma_deg", n.azimuth_sigma * 180.0 / kPi) * kPi / 180.0;
  n.doppler_sigma = kv.get_double("noise.doppler_sigma", n.doppler_sigma);
  n.speckle_density = kv.get_double("noise.speckle_density", n.speckle_density);
  n.speckle_power_min = kv.get_double("noise.speckle_power_min", n.speckle_power_min);
  n.speckle_power_max = kv.get_double("noise.speckle_power_max", n.speckle_power_max);
  n.ghost_fraction = kv.get_double("noise.ghost_fraction", n.ghost_fraction);
  n.ghost_power_threshold = kv.get_double("noise.ghost_power_threshold", n.ghost_power_threshold);
  n.ghost_attenuation = kv.get_double("noise.ghost_attenuation", n.ghost_attenuation);
  n.saturation_streaks = kv.get_int("noise.saturation_streaks", n.saturation_streaks);
  n.power_jitter = kv.get_double("noise.power_jitter", n.power_jitter);

  auto& s = cfg.sensor;
  if (kv.has("sensor.mounts")) s.mounts = parse_mounts(kv.require("sensor.mounts"));
  s.fov = kv.get_double("sensor.fov_deg", s.fov * 180.0 / kPi) * kPi / 180.0;
  s.max_range = kv.get_double("sensor.max_range", s.max_range);
  s.accuracy.range_sigma = kv.get_double("sensor.range_accuracy_sigma", s.accuracy.range_sigma);
  s.accuracy.azimuth_sigma = kv.get_double("sensor.azimuth_accuracy_sigma_deg",
                                           s.accuracy.azimuth_sigma * 180.0 / kPi) *
                             kPi / 180.0;
  s.azimuth_count = static_cast<std::uint32_t>(kv.get_int("sensor.azimuth_count",
                                                          static_cast<int>(s.azimuth_count)));
  s.range_bin_count = static_cast<std::uint32_t>(
      kv.get_int("sensor.range_bin_count", static_cast<int>(s.range_bin_count)));
  s.range_resolution = kv.get_double("sensor.range_resolution", s.range_resolution);
  s.wall_sample_spacing = kv.get_double("sensor.wall_sample_spacing", s.wall_sample_spacing);
  kv.reject_unknown_keys();
  return cfg;
}

}  // namespace rodom
