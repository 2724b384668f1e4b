#pragma once

#include "rodom/ingest.hpp"

namespace rodom {

struct EgoVelocityEstimate;  // egomotion.hpp

struct PreprocessConfig {
  double threshold = 0.333;              // scanning power threshold, [0,1]
  double max_range_scanning = 62.5;      // m
  double max_range_automotive = 150.0;   // m
  double ransac_inlier_threshold = 0.2;  // m/s
  int ransac_iterations = 200;
  double ransac_min_inlier_fraction = 0.3;
  double azimuth_sigma_scanning = 0.9 * kPi / 180.0;  // rad, for assigned covariance
};

/// One RadarPoint per polar bin with power > threshold and range within the
/// scanning gate. Range uses the bin-center convention. Covariance is assigned
/// from (range_resolution, azimuth_sigma_scanning). Empty output is allowed.
PointScan threshold_polar(const PolarScan& scan, const PreprocessConfig& cfg);

/// Range gate plus Doppler consistency gate: keeps points whose measured
/// radial velocity matches the ego prediction within ransac_inlier_threshold.
/// Points without Doppler pass only the range gate.
PointScan gate_and_filter_automotive(const PointScan& scan, const EgoVelocityEstimate& ego,
                                     const PreprocessConfig& cfg);

/// Radial velocity of a stationary target predicted from body velocity
/// (v, omega), for a return at `azimuth` (ray direction, vehicle frame) and
/// vehicle-frame position `position`. Exact for any sensor mount on the ray.
double predicted_radial_velocity(const Vec2& v, double omega, double azimuth,
                                 const Vec2& position);

}  // namespace rodom
