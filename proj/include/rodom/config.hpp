#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>

#include "rodom/pipeline.hpp"

namespace rodom {

/// Flat `key = value` text with dotted section prefixes and '#' comments.
class KeyValueFile {
 public:
  static KeyValueFile load(const std::filesystem::path& path);
  static KeyValueFile from_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key, double fallback);
  int get_int(const std::string& key, int fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::string require(const std::string& key);

  /// Throws MalformedFileError naming any key never consumed by a getter.
  void reject_unknown_keys() const;

 private:
  std::string origin_;
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
};

/// Pipeline configuration file. `mode` is required; everything else defaults
/// to the per-mode parameters. Unknown keys are rejected.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Synthesis configuration: noise.* and sensor.* keys, all optional.
struct SynthConfig {
  NoiseSpec noise;
  SynthSensorConfig sensor;
};
SynthConfig load_synth_config(const std::filesystem::path& path);

std::vector<Pose2> parse_mounts(const std::string& text);

}  // namespace rodom
