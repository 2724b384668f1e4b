#include "rodom/submap.hpp"

#include <string>

#include "rodom/errors.hpp"

namespace rodom {

std::vector<WeightedPoint> to_weighted_points(const PointScan& scan) {
  std::vector<WeightedPoint> out;
  out.reserve(scan.points.size());
  for (const auto& pt : scan.points) {
    out.push_back({pt.position, pt.power.value_or(1.0), pt.cov});
  }
  return out;
}

Submap build_submap(std::span<const PointScan> scans, std::span<const PoseWithCov> motions,
                    int n) {
  if (scans.empty() || n < 1) {
    throw MotionCountMismatchError("build_submap: need at least one scan and n >= 1");
  }
  if (motions.size() + 1 != scans.size()) {
    throw MotionCountMismatchError("build_submap: " + std::to_string(scans.size()) +
                                   " scans need " + std::to_string(scans.size() - 1) +
                                   " motions, got " + std::to_string(motions.size()));
  }
  const std::size_t newest = scans.size() - 1;
  const std::size_t use = std::min<std::size_t>(static_cast<std::size_t>(n), scans.size());

  Submap map;
  map.frame_timestamp = scans[newest].timestamp;
  map.scan_count = static_cast<int>(use);

  // Walk backwards accumulating the motion from scan j to the newest frame;
  // emit oldest-first for deterministic ordering.
  std::vector<PoseWithCov> to_newest(use);  // composed motion scan j -> newest
  to_newest[use - 1] = PoseWithCov{};
  for (std::size_t back = 1; back < use; ++back) {
    const std::size_t j = newest - back;
    to_newest[use - 1 - back] = compose_with_covariance(motions[j], to_newest[use - back]);
  }

  for (std::size_t i = 0; i < use; ++i) {
    const std::size_t j = newest - (use - 1) + i;
    const PoseWithCov in_newest = inverse_with_covariance(to_newest[i]);
    for (const auto& pt : scans[j].points) {
      WeightedPoint wp;
      wp.position = transform_point(in_newest.pose, pt.position);
      wp.weight = pt.power.value_or(1.0);
      wp.cov = propagate_point_covariance(in_newest.pose, in_newest.cov, pt.position, pt.cov);
      map.points.push_back(wp);
    }
  }
  return map;
}

}  // namespace rodom
