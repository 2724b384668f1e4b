#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rodom/core.hpp"
#include "rodom/errors.hpp"

namespace rodom {

/// Dense azimuth x range power image from a scanning radar.
/// Azimuths are implicitly uniform: azimuth(i) = 2*pi*i / azimuth_count.
struct PolarScan {
  double timestamp = 0.0;  // s
  std::uint32_t azimuth_count = 0;
  std::uint32_t range_bin_count = 0;
  double range_resolution = 0.0;  // m/bin
  std::vector<float> power;       // azimuth-major, values in [0,1]

  float at(std::uint32_t azimuth, std::uint32_t bin) const {
    return power[static_cast<std::size_t>(azimuth) * range_bin_count + bin];
  }
  float& at(std::uint32_t azimuth, std::uint32_t bin) {
    return power[static_cast<std::size_t>(azimuth) * range_bin_count + bin];
  }
  double azimuth_of(std::uint32_t i) const {
    return 2.0 * kPi * static_cast<double>(i) / static_cast<double>(azimuth_count);
  }
  /// Bin-center range convention.
  double range_of(std::uint32_t bin) const { return (bin + 0.5) * range_resolution; }
};

/// One radar return in the vehicle frame. `range` is measured along the ray
/// (from the emitting sensor), `azimuth` is the ray direction in the vehicle
/// frame. Automotive points carry radial velocity and no power; scanning
/// points the reverse.
struct RadarPoint {
  Vec2 position = Vec2::Zero();  // m, vehicle frame
  std::optional<double> radial_velocity;  // m/s, negative = approaching
  std::optional<double> power;            // [0,1]
  double range = 0.0;                     // m
  double azimuth = 0.0;                   // rad
  Mat2 cov = Mat2::Zero();                // m^2
};

struct PointScan {
  double timestamp = 0.0;  // s
  std::vector<RadarPoint> points;
};

struct TimedPose {
  double timestamp = 0.0;  // s
  Pose2 pose;
};

struct Trajectory {
  std::vector<TimedPose> poses;

  std::size_t size() const { return poses.size(); }
  bool empty() const { return poses.empty(); }
};

/// Polar measurement accuracy used to assign per-point position covariance:
/// cov = G * diag(sigma_r^2, r^2 * sigma_azimuth^2) * G^T with G the
/// polar-to-Cartesian rotation at the point's azimuth.
struct PolarAccuracy {
  double range_sigma = 0.25;                    // m
  double azimuth_sigma = 0.5 * kPi / 180.0;     // rad

  static PolarAccuracy automotive() { return {0.25, 0.5 * kPi / 180.0}; }
  static PolarAccuracy scanning(double range_resolution) {
    return {range_resolution, 0.9 * kPi / 180.0};
  }
};

Mat2 polar_point_covariance(double range, double azimuth, const PolarAccuracy& acc);

// ---------------------------------------------------------------------------
// On-disk formats
// ---------------------------------------------------------------------------

/// Binary polar scan, little-endian: magic "PRS1", float64 timestamp,
/// uint32 azimuth_count, uint32 range_bin_count, float64 range_resolution_m,
/// then azimuth-major float32 power values.
PolarScan load_polar_scan(const std::filesystem::path& path);
void write_polar_scan(const std::filesystem::path& path, const PolarScan& scan);

/// CSV with header `timestamp_s,x_m,y_m,range_m,azimuth_rad,vr_mps,power`;
/// an empty field means absent. One scan per file.
PointScan load_point_scan(const std::filesystem::path& path,
                          const PolarAccuracy& acc = PolarAccuracy::automotive());
void write_point_scan(const std::filesystem::path& path, const PointScan& scan);

/// CSV with header `timestamp_s,x_m,y_m,theta_rad`.
Trajectory load_trajectory(const std::filesystem::path& path);
void write_trajectory(const std::filesystem::path& path, const Trajectory& trajectory);

// ---------------------------------------------------------------------------
// Synthetic worlds
// ---------------------------------------------------------------------------

struct PointLandmark {
  Vec2 position = Vec2::Zero();
  double reflectivity = 1.0;  // [0,1]
};

struct WallLandmark {
  Vec2 a = Vec2::Zero();
  Vec2 b = Vec2::Zero();
  double reflectivity = 1.0;
};

struct MoverLandmark {
  Vec2 position = Vec2::Zero();  // at t = 0
  Vec2 velocity = Vec2::Zero();  // m/s, world frame
  double reflectivity = 1.0;
};

/// Text file of landmark primitives, one per line:
///   point x y reflectivity
///   wall x1 y1 x2 y2 reflectivity
///   mover x y vx vy reflectivity
/// '#' starts a comment.
struct WorldSpec {
  std::vector<PointLandmark> points;
  std::vector<WallLandmark> walls;
  std::vector<MoverLandmark> movers;

  bool empty() const { return points.empty() && walls.empty() && movers.empty(); }
};

WorldSpec load_world(const std::filesystem::path& path);
void write_world(const std::filesystem::path& path, const WorldSpec& world);

enum class ScanMode { automotive, scanning };

struct NoiseSpec {
  // Automotive measurement noise (polar, per point).
  double range_sigma = 0.0;    // m
  double azimuth_sigma = 0.0;  // rad
  double doppler_sigma = 0.0;  // m/s
  // Scanning image noise.
  double speckle_density = 0.0;  // fraction of bins hit by speckle
  double speckle_power_min = 0.02;
  double speckle_power_max = 0.3;
  double ghost_fraction = 0.0;  // probability a strong return spawns a multipath ghost
  double ghost_power_threshold = 0.6;
  double ghost_attenuation = 0.5;
  int saturation_streaks = 0;  // full-power azimuth streaks per scan
  double power_jitter = 0.0;   // sigma on deposited power
};

struct SynthSensorConfig {
  // Automotive.
  std::vector<Pose2> mounts = {Pose2{}};  // sensor poses in the vehicle frame
  double fov = 2.0 * kPi;                 // per-sensor field of view
  double max_range = 150.0;               // m
  PolarAccuracy accuracy = PolarAccuracy::automotive();  // covariance prior
  // Scanning.
  std::uint32_t azimuth_count = 400;
  std::uint32_t range_bin_count = 512;
  double range_resolution = 0.25;  // m/bin
  // Walls are sampled as independent returns at this spacing.
  double wall_sample_spacing = 0.5;  // m
};

/// Bin provenance labels for synthetic polar scans.
enum class BinLabel : std::uint8_t {
  empty = 0,
  landmark = 1,
  mover = 2,
  speckle = 3,
  ghost = 4,
  saturation = 5,
};

struct SyntheticScene {
  ScanMode mode = ScanMode::automotive;
  std::vector<PointScan> point_scans;  // automotive mode
  std::vector<PolarScan> polar_scans;  // scanning mode
  Trajectory ground_truth;
  /// Automotive: per scan, per point, true = return from a mover (outlier).
  std::vector<std::vector<std::uint8_t>> point_is_mover;
  /// Scanning: per scan, azimuth-major bin labels (same layout as power).
  std::vector<std::vector<std::uint8_t>> bin_labels;
};

/// Deterministic given `seed`. The trajectory supplies ground-truth poses;
/// body velocities are recovered from consecutive poses (exact unicycle arcs)
/// so Doppler output is consistent with the trajectory.
SyntheticScene synthesize_scene(const WorldSpec& world, const Trajectory& trajectory, ScanMode mode,
                                const NoiseSpec& noise, std::uint64_t seed,
                                const SynthSensorConfig& sensor = SynthSensorConfig{});

}  // namespace rodom
