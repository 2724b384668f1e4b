#include <algorithm>
#include <cmath>
#include <random>

#include "rodom/egomotion.hpp"
#include "rodom/ingest.hpp"

namespace rodom {

namespace {

struct Target {
  Vec2 position;       // world frame, at scan time
  Vec2 velocity;       // world frame
  double reflectivity;
  bool is_mover;
};

// Walls become rows of independent returns at fixed spacing.
std::vector<Target> world_targets(const WorldSpec& world, double time, double wall_spacing) {
  std::vector<Target> targets;
  for (const auto& p : world.points) {
    targets.push_back({p.position, Vec2::Zero(), p.reflectivity, false});
  }
  for (const auto& w : world.walls) {
    const Vec2 d = w.b - w.a;
    const double len = d.norm();
    const int samples = std::max(2, static_cast<int>(std::floor(len / wall_spacing)) + 1);
    for (int i = 0; i < samples; ++i) {
      const double t = samples == 1 ? 0.0 : static_cast<double>(i) / (samples - 1);
      targets.push_back({w.a + t * d, Vec2::Zero(), w.reflectivity, false});
    }
  }
  for (const auto& m : world.movers) {
    targets.push_back({m.position + time * m.velocity, m.velocity, m.reflectivity, true});
  }
  return targets;
}

// Body velocity at each trajectory sample, recovered from consecutive poses.
// The last sample reuses the preceding interval's velocity.
std::vector<std::pair<Vec2, double>> trajectory_velocities(const Trajectory& traj) {
  std::vector<std::pair<Vec2, double>> vels(traj.size(), {Vec2::Zero(), 0.0});
  if (traj.size() < 2) return vels;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const Pose2 rel = compose(inverse(traj.poses[k].pose), traj.poses[k + 1].pose);
    const double dt = traj.poses[k + 1].timestamp - traj.poses[k].timestamp;
    vels[k] = body_velocity_from_relative_pose(rel, dt);
  }
  vels.back() = vels[traj.size() - 2];
  return vels;
}

void synthesize_automotive(const WorldSpec& world, const Trajectory& traj,
                           const NoiseSpec& noise, const SynthSensorConfig& sensor,
                           std::mt19937_64& rng, SyntheticScene& out) {
  const auto vels = trajectory_velocities(traj);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const TimedPose& tp = traj.poses[k];
    const auto& [v_body, omega] = vels[k];
    const auto targets = world_targets(world, tp.timestamp, sensor.wall_sample_spacing);
    const Mat2 r_world = rotation_matrix(tp.pose.theta);
    PointScan scan;
    scan.timestamp = tp.timestamp;
    std::vector<std::uint8_t> labels;
    for (const auto& mount : sensor.mounts) {
      const Pose2 sensor_world = compose(tp.pose, mount);
      const Vec2 origin = sensor_world.translation();
      // Velocity of the sensor point itself, world frame.
      const Vec2 perp_mount{-mount.y, mount.x};
      const Vec2 sensor_vel = r_world * (v_body + omega * perp_mount);
      for (const auto& tgt : targets) {
        const Vec2 ray = tgt.position - origin;
        const double range = ray.norm();
        if (range < 1e-6 || range > sensor.max_range) continue;
        const double azimuth_world = std::atan2(ray.y(), ray.x());
        const double azimuth_sensor = normalize_angle(azimuth_world - sensor_world.theta);
        if (std::abs(azimuth_sensor) > sensor.fov / 2.0) continue;
        const Vec2 u = ray / range;
        const double vr = u.dot(tgt.velocity - sensor_vel) + noise.doppler_sigma * gauss(rng);
        // Noise lives in the ray's polar coordinates; the point position is
        // reconstructed from the noisy measurement so position, range,
        // azimuth, and covariance stay mutually consistent.
        const double noisy_range = std::max(0.0, range + noise.range_sigma * gauss(rng));
        const double azimuth_vehicle =
            normalize_angle(azimuth_world - tp.pose.theta + noise.azimuth_sigma * gauss(rng));
        const Vec2 mount_pos{mount.x, mount.y};
        RadarPoint pt;
        pt.range = noisy_range;
        pt.azimuth = azimuth_vehicle;
        pt.position = mount_pos + noisy_range * Vec2{std::cos(azimuth_vehicle),
                                                     std::sin(azimuth_vehicle)};
        pt.radial_velocity = vr;
        pt.cov = polar_point_covariance(noisy_range, azimuth_vehicle, sensor.accuracy);
        scan.points.push_back(pt);
        labels.push_back(tgt.is_mover ? 1 : 0);
      }
    }
    out.point_scans.push_back(std::move(scan));
    out.point_is_mover.push_back(std::move(labels));
  }
}

void deposit(PolarScan& scan, std::vector<std::uint8_t>& labels, std::uint32_t az,
             std::uint32_t bin, double power, BinLabel label) {
  const float p = static_cast<float>(std::clamp(power, 0.0, 1.0));
  float& cell = scan.at(az, bin);
  if (p > cell) {
    cell = p;
    labels[static_cast<std::size_t>(az) * scan.range_bin_count + bin] =
        static_cast<std::uint8_t>(label);
  }
}

void synthesize_scanning(const WorldSpec& world, const Trajectory& traj, const NoiseSpec& noise,
                         const SynthSensorConfig& sensor, std::mt19937_64& rng,
                         SyntheticScene& out) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double bin_azimuth = 2.0 * kPi / sensor.azimuth_count;
  for (const auto& tp : traj.poses) {
    PolarScan scan;
    scan.timestamp = tp.timestamp;
    scan.azimuth_count = sensor.azimuth_count;
    scan.range_bin_count = sensor.range_bin_count;
    scan.range_resolution = sensor.range_resolution;
    scan.power.assign(static_cast<std::size_t>(sensor.azimuth_count) * sensor.range_bin_count,
                      0.0f);
    std::vector<std::uint8_t> labels(scan.power.size(),
                                     static_cast<std::uint8_t>(BinLabel::empty));
    const Pose2 world_from_vehicle = tp.pose;
    const Pose2 vehicle_from_world = inverse(world_from_vehicle);
    const auto targets = world_targets(world, tp.timestamp, sensor.wall_sample_spacing);
    const double max_range = sensor.range_bin_count * sensor.range_resolution;
    for (const auto& tgt : targets) {
      const Vec2 local = transform_point(vehicle_from_world, tgt.position);
      const double range = local.norm();
      if (range < sensor.range_resolution || range >= max_range) continue;
      const double azimuth = std::atan2(local.y(), local.x());
      const auto az = static_cast<std::uint32_t>(
          (static_cast<std::int64_t>(std::llround(azimuth / bin_azimuth)) %
               sensor.azimuth_count +
           sensor.azimuth_count) %
          sensor.azimuth_count);
      const auto bin = static_cast<std::uint32_t>(range / sensor.range_resolution);
      double power = tgt.reflectivity + noise.power_jitter * gauss(rng);
      const BinLabel label = tgt.is_mover ? BinLabel::mover : BinLabel::landmark;
      deposit(scan, labels, az, bin, power, label);
      // Multipath: a strong return mirrored at doubled range, attenuated.
      if (power >= noise.ghost_power_threshold && unit(rng) < noise.ghost_fraction) {
        const auto ghost_bin = static_cast<std::uint32_t>(2.0 * range / sensor.range_resolution);
        if (ghost_bin < sensor.range_bin_count) {
          deposit(scan, labels, az, ghost_bin, power * noise.ghost_attenuation, BinLabel::ghost);
        }
      }
    }
    if (noise.speckle_density > 0.0) {
      std::uniform_real_distribution<double> speckle_power(noise.speckle_power_min,
                                                           noise.speckle_power_max);
      for (std::uint32_t a = 0; a < sensor.azimuth_count; ++a) {
        for (std::uint32_t b = 0; b < sensor.range_bin_count; ++b) {
          if (unit(rng) < noise.speckle_density) {
            deposit(scan, labels, a, b, speckle_power(rng), BinLabel::speckle);
          }
        }
      }
    }
    if (noise.saturation_streaks > 0) {
      std::uniform_int_distribution<std::uint32_t> pick_az(0, sensor.azimuth_count - 1);
      for (int i = 0; i < noise.saturation_streaks; ++i) {
        const std::uint32_t a = pick_az(rng);
        for (std::uint32_t b = 0; b < sensor.range_bin_count; ++b) {
          deposit(scan, labels, a, b, 1.0, BinLabel::saturation);
        }
      }
    }
    out.polar_scans.push_back(std::move(scan));
    out.bin_labels.push_back(std::move(labels));
  }
}

}  // namespace

SyntheticScene synthesize_scene(const WorldSpec& world, const Trajectory& trajectory,
                                ScanMode mode, const NoiseSpec& noise, std::uint64_t seed,
                                const SynthSensorConfig& sensor) {
  if (world.empty()) throw EmptyWorldError("synthesize_scene: world has no landmarks");
  SyntheticScene out;
  out.mode = mode;
  out.ground_truth = trajectory;
  std::mt19937_64 rng(seed);
  if (mode == ScanMode::automotive) {
    synthesize_automotive(world, trajectory, noise, sensor, rng, out);
  } else {
    synthesize_scanning(world, trajectory, noise, sensor, rng, out);
  }
  return out;
}

}  // namespace rodom
