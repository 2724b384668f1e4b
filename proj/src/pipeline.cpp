#include "rodom/pipeline.hpp"

#include <cmath>

#include "rodom/errors.hpp"
#include "rodom/submap.hpp"

namespace rodom {

PipelineConfig default_config(ScanMode mode) {
  PipelineConfig cfg;
  cfg.mode = mode;
  if (mode == ScanMode::automotive) {
    cfg.ndt.grid_size = 3.0;
    cfg.ndt.shift_s = 0.0;
    cfg.submap_n = 3;
  } else {
    cfg.ndt.grid_size = 3.75;
    cfg.ndt.shift_s = 0.333;
    cfg.submap_n = 1;
  }
  return cfg;
}

namespace {

// Motion covariance assumed when no ego estimate is available for a frame.
const Mat3 kFallbackMotionCov = Vec3(0.25, 0.25, 0.0025).asDiagonal();

PointScan range_gate_only(const PointScan& scan, double max_range) {
  PointScan out;
  out.timestamp = scan.timestamp;
  for (const auto& pt : scan.points) {
    if (pt.range <= max_range) out.points.push_back(pt);
  }
  return out;
}

Pose2 scale_constant_velocity(const Pose2& rel, double dt_prev, double dt) {
  const auto [v, omega] = body_velocity_from_relative_pose(rel, dt_prev);
  return integrate_body_velocity(v, omega, Mat3::Zero(), dt).pose;
}

struct FrameInput {
  std::vector<WeightedPoint> points;  // current scan, preprocessed
  Submap reference;                   // anchored at the previous scan's frame
  Pose2 prediction;
  std::optional<double> prev_speed;
  double dt = 0.0;
};

OdometryOutput match_loop(const std::vector<double>& timestamps,
                          const std::function<FrameInput(std::size_t, const MatchResult*)>& frame,
                          const PipelineConfig& cfg) {
  OdometryOutput out;
  out.trajectory.poses.push_back({timestamps[0], Pose2{}});
  const MatchResult* prev_result = nullptr;
  for (std::size_t k = 1; k < timestamps.size(); ++k) {
    const FrameInput in = frame(k, prev_result);
    const NdtMapBuilder builder = [&](double grid_size) {
      NdtConfig ndt_cfg = cfg.ndt;
      ndt_cfg.grid_size = grid_size;
      return build_ndt_map(in.reference, ndt_cfg);
    };
    MatchResult result =
        match_with_escalation(builder, in.points, in.prediction, in.prediction, in.prev_speed,
                              in.dt, cfg.match, cfg.ndt.grid_size, cfg.ndt.shift_s);
    const Pose2 pose = compose(out.trajectory.poses.back().pose, result.relative_pose);
    out.trajectory.poses.push_back({timestamps[k], pose});
    out.escalation_count += result.escalations;
    if (result.failure_reason != MatchFailure::none) ++out.failure_count;
    out.per_frame.push_back(std::move(result));
    prev_result = &out.per_frame.back();
  }
  return out;
}

}  // namespace

OdometryOutput run_odometry(const std::vector<PointScan>& scans, const PipelineConfig& cfg) {
  if (scans.size() < 2) {
    throw InsufficientInputError("run_odometry: need at least 2 scans, got " +
                                 std::to_string(scans.size()));
  }

  std::vector<EgoVelocityEstimate> ego(scans.size());
  std::vector<PointScan> filtered(scans.size());
  std::vector<double> timestamps(scans.size());
  for (std::size_t k = 0; k < scans.size(); ++k) {
    timestamps[k] = scans[k].timestamp;
    try {
      ego[k] = estimate_ego_velocity(scans[k], cfg.preprocess, cfg.rng_seed + k);
    } catch (const InsufficientDopplerError&) {
      ego[k].valid = false;
    }
    filtered[k] = ego[k].valid
                      ? gate_and_filter_automotive(scans[k], ego[k], cfg.preprocess)
                      : range_gate_only(scans[k], cfg.preprocess.max_range_automotive);
  }

  // Doppler-integrated motion between consecutive scans, used both for the
  // submap and as the matching prediction.
  std::vector<PoseWithCov> motions(scans.size() - 1);
  for (std::size_t j = 0; j + 1 < scans.size(); ++j) {
    const double dt = timestamps[j + 1] - timestamps[j];
    if (ego[j + 1].valid) {
      motions[j] = integrate_velocity(ego[j + 1], dt);
    } else if (ego[j].valid) {
      motions[j] = integrate_velocity(ego[j], dt);
    } else if (j > 0) {
      const double dt_prev = timestamps[j] - timestamps[j - 1];
      motions[j] = {scale_constant_velocity(motions[j - 1].pose, dt_prev, dt),
                    kFallbackMotionCov};
    } else {
      motions[j] = {Pose2{}, kFallbackMotionCov};
    }
  }

  const auto frame = [&](std::size_t k, const MatchResult* prev) {
    FrameInput in;
    in.dt = timestamps[k] - timestamps[k - 1];
    in.points = to_weighted_points(filtered[k]);
    const std::size_t first = k >= static_cast<std::size_t>(cfg.submap_n) ? k - cfg.submap_n : 0;
    in.reference = build_submap(
        std::span(filtered).subspan(first, k - first),
        std::span(motions).subspan(first, k - first - 1), cfg.submap_n);
    in.prediction = motions[k - 1].pose;
    if (ego[k].valid) {
      in.prev_speed = ego[k].speed();
    } else if (prev) {
      const double dt_prev = timestamps[k - 1] - timestamps[k - 2];
      in.prev_speed = prev->relative_pose.translation().norm() / dt_prev;
    }
    return in;
  };
  return match_loop(timestamps, frame, cfg);
}

OdometryOutput run_odometry(const std::vector<PolarScan>& scans, const PipelineConfig& cfg) {
  if (scans.size() < 2) {
    throw InsufficientInputError("run_odometry: need at least 2 scans, got " +
                                 std::to_string(scans.size()));
  }

  std::vector<PointScan> thresholded(scans.size());
  std::vector<double> timestamps(scans.size());
  for (std::size_t k = 0; k < scans.size(); ++k) {
    timestamps[k] = scans[k].timestamp;
    thresholded[k] = threshold_polar(scans[k], cfg.preprocess);
  }

  const auto frame = [&](std::size_t k, const MatchResult* prev) {
    FrameInput in;
    in.dt = timestamps[k] - timestamps[k - 1];
    in.points = to_weighted_points(thresholded[k]);
    // Scanning radar has no Doppler; the reference is the previous scan alone.
    in.reference.frame_timestamp = timestamps[k - 1];
    in.reference.points = to_weighted_points(thresholded[k - 1]);
    in.reference.scan_count = 1;
    if (prev) {
      const double dt_prev = timestamps[k - 1] - timestamps[k - 2];
      in.prediction = scale_constant_velocity(prev->relative_pose, dt_prev, in.dt);
      in.prev_speed = prev->relative_pose.translation().norm() / dt_prev;
    }
    return in;
  };
  return match_loop(timestamps, frame, cfg);
}

}  // namespace rodom
