#pragma once

#include <cstdint>
#include <utility>

#include "rodom/ingest.hpp"
#include "rodom/preprocess.hpp"

namespace rodom {

/// Instantaneous body velocity (v_x, v_y, omega) in the vehicle frame, with
/// the least-squares posterior covariance of the consensus refit.
struct EgoVelocityEstimate {
  Vec2 v = Vec2::Zero();  // m/s
  double omega = 0.0;     // rad/s
  Mat3 cov = Mat3::Zero();
  int inlier_count = 0;
  bool valid = false;

  double speed() const { return v.norm(); }
};

/// RANSAC + consensus least squares over the scan's Doppler measurements.
/// Model per point: vr = -(cos a, sin a) . (v + omega * perp(p)), which maps
/// body motion to the ray direction regardless of which mounted sensor
/// produced the return (perp(p) and perp(mount) project identically onto the
/// ray). Requires >= 3 points carrying radial velocity; deterministic given
/// `seed`. valid=false when the inlier fraction is below the configured
/// minimum.
EgoVelocityEstimate estimate_ego_velocity(const PointScan& scan, const PreprocessConfig& cfg,
                                          std::uint64_t seed);

/// Constant-velocity unicycle integration over dt: exact arc for omega != 0,
/// straight line below |omega| = 1e-9. Covariance propagates through the
/// Jacobian of the integration map. Throws InvalidEstimateError when the
/// estimate is invalid or dt <= 0.
PoseWithCov integrate_velocity(const EgoVelocityEstimate& est, double dt);

/// Same integration for a bare body velocity (no validity gate).
PoseWithCov integrate_body_velocity(const Vec2& v, double omega, const Mat3& vel_cov, double dt);

/// Inverse of the arc integration: body velocity (v, omega) that reproduces
/// `rel` over dt.
std::pair<Vec2, double> body_velocity_from_relative_pose(const Pose2& rel, double dt);

}  // namespace rodom
