#include "rodom/preprocess.hpp"

#include <cmath>

#include "rodom/egomotion.hpp"

namespace rodom {

double predicted_radial_velocity(const Vec2& v, double omega, double azimuth,
                                 const Vec2& position) {
  const double c = std::cos(azimuth);
  const double s = std::sin(azimuth);
  // Velocity of the ray origin projected onto the ray; perp(position) and
  // perp(mount) are interchangeable here because position lies on the ray.
  return -(c * (v.x() - omega * position.y()) + s * (v.y() + omega * position.x()));
}

PointScan threshold_polar(const PolarScan& scan, const PreprocessConfig& cfg) {
  PointScan out;
  out.timestamp = scan.timestamp;
  const PolarAccuracy acc{scan.range_resolution, cfg.azimuth_sigma_scanning};
  for (std::uint32_t a = 0; a < scan.azimuth_count; ++a) {
    const double azimuth = normalize_angle(scan.azimuth_of(a));
    const double c = std::cos(azimuth);
    const double s = std::sin(azimuth);
    for (std::uint32_t bin = 0; bin < scan.range_bin_count; ++bin) {
      const double r = scan.range_of(bin);
      if (r > cfg.max_range_scanning) break;  // bins are range-ordered
      const float p = scan.at(a, bin);
      if (!(p > cfg.threshold)) continue;
      RadarPoint pt;
      pt.position = {r * c, r * s};
      pt.range = r;
      pt.azimuth = azimuth;
      pt.power = static_cast<double>(p);
      pt.cov = polar_point_covariance(r, azimuth, acc);
      out.points.push_back(pt);
    }
  }
  return out;
}

PointScan gate_and_filter_automotive(const PointScan& scan, const EgoVelocityEstimate& ego,
                                     const PreprocessConfig& cfg) {
  PointScan out;
  out.timestamp = scan.timestamp;
  for (const auto& pt : scan.points) {
    if (pt.range > cfg.max_range_automotive) continue;
    if (pt.radial_velocity) {
      const double predicted =
          predicted_radial_velocity(ego.v, ego.omega, pt.azimuth, pt.position);
      if (std::abs(*pt.radial_velocity - predicted) > cfg.ransac_inlier_threshold) continue;
    }
    out.points.push_back(pt);
  }
  return out;
}

}  // namespace rodom
