#pragma once

#include <span>
#include <vector>

#include "rodom/ingest.hpp"

namespace rodom {

/// One submap constituent: position in the submap frame, raw weight (returned
/// power, or 1.0 when the sensor provides none) and propagated covariance.
struct WeightedPoint {
  Vec2 position = Vec2::Zero();
  double weight = 1.0;
  Mat2 cov = Mat2::Zero();
};

/// Weighted Gaussians accumulated from the newest N scans, expressed in the
/// newest scan's frame.
struct Submap {
  double frame_timestamp = 0.0;
  std::vector<WeightedPoint> points;
  int scan_count = 0;
};

/// Converts a single preprocessed scan (weight = power or 1.0).
std::vector<WeightedPoint> to_weighted_points(const PointScan& scan);

/// Accumulates the newest min(n, scans.size()) scans into the newest scan's
/// frame. `motions[i]` is the relative pose (with covariance) of scan i+1 in
/// scan i's frame, so motions.size() must equal scans.size() - 1. A point k
/// scans back is mapped through the inverse of the composed motion; its
/// covariance picks up the composed motion covariance on top of the
/// measurement covariance.
Submap build_submap(std::span<const PointScan> scans, std::span<const PoseWithCov> motions,
                    int n);

}  // namespace rodom
