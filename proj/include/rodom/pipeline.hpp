#pragma once

#include <vector>

#include "rodom/egomotion.hpp"
#include "rodom/matcher.hpp"
#include "rodom/preprocess.hpp"

namespace rodom {

struct PipelineConfig {
  ScanMode mode = ScanMode::automotive;
  PreprocessConfig preprocess;
  NdtConfig ndt;
  MatchConfig match;
  int submap_n = 3;
  std::vector<Pose2> sensor_mounts;  // informational; carried for converters
  std::optional<double> downsample_hz;
  std::uint64_t rng_seed = 0;
};

/// Per-mode defaults: automotive g=3.0 m, s=0, N=3;
/// scanning g=3.75 m, s=0.333, N=1.
PipelineConfig default_config(ScanMode mode);

struct OdometryOutput {
  Trajectory trajectory;               // one pose per scan, pose(0) = identity
  std::vector<MatchResult> per_frame;  // one entry per scan after the first
  int escalation_count = 0;            // total extra ladder rungs across the run
  int failure_count = 0;               // frames that fell back to the motion prior
};

/// Automotive loop: Doppler ego-velocity, outlier gating, probabilistic
/// submap of the newest N scans, NDT matching with escalation.
OdometryOutput run_odometry(const std::vector<PointScan>& scans, const PipelineConfig& cfg);

/// Scanning loop: thresholding, single-scan reference (submap_n forced to 1),
/// NDT matching with escalation; prediction is the previous matched motion.
OdometryOutput run_odometry(const std::vector<PolarScan>& scans, const PipelineConfig& cfg);

/// Greedy rate limiter: keeps the first scan and each next scan at least
/// 1/target_hz after the last kept one.
template <typename Scan>
std::vector<Scan> downsample(const std::vector<Scan>& scans, double target_hz) {
  std::vector<Scan> out;
  const double min_gap = 1.0 / target_hz;
  for (const auto& scan : scans) {
    if (out.empty() || scan.timestamp >= out.back().timestamp + min_gap) {
      out.push_back(scan);
    }
  }
  return out;
}

}  // namespace rodom
