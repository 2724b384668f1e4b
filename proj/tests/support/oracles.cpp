#include "support/oracles.hpp"

#include <cmath>
#include <random>

namespace rodom::testing {

Eigen::Matrix3d pose_matrix(const Pose2& p) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  const double c = std::cos(p.theta);
  const double s = std::sin(p.theta);
  m(0, 0) = c;
  m(0, 1) = -s;
  m(1, 0) = s;
  m(1, 1) = c;
  m(0, 2) = p.x;
  m(1, 2) = p.y;
  return m;
}

Pose2 pose_from_matrix(const Eigen::Matrix3d& m) {
  return {m(0, 2), m(1, 2), std::atan2(m(1, 0), m(0, 0))};
}

Pose2 matrix_compose(const Pose2& a, const Pose2& b) {
  return pose_from_matrix(pose_matrix(a) * pose_matrix(b));
}

Pose2 matrix_inverse(const Pose2& p) {
  return pose_from_matrix(pose_matrix(p).inverse().eval());
}

Vec2 matrix_transform_point(const Pose2& p, const Vec2& pt) {
  const Eigen::Vector3d h = pose_matrix(p) * Eigen::Vector3d(pt.x(), pt.y(), 1.0);
  return {h.x(), h.y()};
}

namespace {

Eigen::Matrix3d matrix_sqrt_psd(const Mat3& cov) {
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  Vec3 lam = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * lam.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
}

Mat2 matrix_sqrt_psd(const Mat2& cov) {
  Eigen::SelfAdjointEigenSolver<Mat2> eig(cov);
  Vec2 lam = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * lam.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Vec3 sample_gaussian3(const Vec3& mean, const Mat3& cov, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Vec3 z{gauss(rng), gauss(rng), gauss(rng)};
  return mean + matrix_sqrt_psd(cov) * z;
}

Mat2 monte_carlo_point_covariance(const Pose2& pose, const Mat3& pose_cov, const Vec2& pt,
                                  const Mat2& pt_cov, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Mat2 pt_sqrt = matrix_sqrt_psd(pt_cov);
  std::vector<Vec2> out;
  out.reserve(samples);
  Vec2 mean = Vec2::Zero();
  for (int i = 0; i < samples; ++i) {
    const Vec3 dp = sample_gaussian3(Vec3{pose.x, pose.y, pose.theta}, pose_cov, rng);
    const Vec2 noisy_pt = pt + pt_sqrt * Vec2{gauss(rng), gauss(rng)};
    const Vec2 y = matrix_transform_point({dp(0), dp(1), dp(2)}, noisy_pt);
    out.push_back(y);
    mean += y;
  }
  mean /= samples;
  Mat2 cov = Mat2::Zero();
  for (const auto& y : out) {
    const Vec2 d = y - mean;
    cov += d * d.transpose();
  }
  return cov / (samples - 1);
}

Mat3 monte_carlo_compose_covariance(const PoseWithCov& a, const PoseWithCov& b, int samples,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Vec3> out;
  out.reserve(samples);
  Vec3 mean = Vec3::Zero();
  for (int i = 0; i < samples; ++i) {
    const Vec3 pa = sample_gaussian3({a.pose.x, a.pose.y, a.pose.theta}, a.cov, rng);
    const Vec3 pb = sample_gaussian3({b.pose.x, b.pose.y, b.pose.theta}, b.cov, rng);
    const Pose2 c = matrix_compose({pa(0), pa(1), pa(2)}, {pb(0), pb(1), pb(2)});
    const Vec3 v{c.x, c.y, c.theta};
    out.push_back(v);
    mean += v;
  }
  mean /= samples;
  Mat3 cov = Mat3::Zero();
  for (const auto& v : out) {
    const Vec3 d = v - mean;
    cov += d * d.transpose();
  }
  return cov / (samples - 1);
}

LatticeSearch lattice_search(const NdtMap& map, std::span<const WeightedPoint> points, double s,
                             bool uncertainty_weighting, const Pose2& center, double half_xy,
                             double half_theta, double step_xy, double step_theta) {
  LatticeSearch best;
  best.min_cost = std::numeric_limits<double>::infinity();
  const int nxy = static_cast<int>(std::round(half_xy / step_xy));
  const int nth = static_cast<int>(std::round(half_theta / step_theta));
  for (int ix = -nxy; ix <= nxy; ++ix) {
    for (int iy = -nxy; iy <= nxy; ++iy) {
      for (int it = -nth; it <= nth; ++it) {
        const Pose2 pose{center.x + ix * step_xy, center.y + iy * step_xy,
                         center.theta + it * step_theta};
        const double cost = -ndt_score(map, points, pose, s, uncertainty_weighting);
        if (cost < best.min_cost) {
          best.min_cost = cost;
          best.argmin = pose;
        }
      }
    }
  }
  return best;
}

namespace {

double oracle_wrap(double t) { return std::atan2(std::sin(t), std::cos(t)); }

struct OraclePair {
  Pose2 est;
  Pose2 gt;
};

// Nearest-timestamp association by linear scan.
std::vector<OraclePair> oracle_align(const Trajectory& estimate, const Trajectory& ground_truth,
                                     double tolerance) {
  std::vector<OraclePair> pairs;
  for (const auto& ep : estimate.poses) {
    double best_dt = std::numeric_limits<double>::infinity();
    const TimedPose* best = nullptr;
    for (const auto& gp : ground_truth.poses) {
      const double dt = std::abs(gp.timestamp - ep.timestamp);
      if (dt < best_dt) {
        best_dt = dt;
        best = &gp;
      }
    }
    if (best && best_dt <= tolerance) pairs.push_back({ep.pose, best->pose});
  }
  return pairs;
}

}  // namespace

OracleEvalResult oracle_segment_errors(const Trajectory& estimate, const Trajectory& ground_truth,
                                       const std::vector<double>& lengths, double time_tolerance) {
  const auto pairs = oracle_align(estimate, ground_truth, time_tolerance);
  std::vector<double> dist(pairs.size(), 0.0);
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    const double dx = pairs[i].gt.x - pairs[i - 1].gt.x;
    const double dy = pairs[i].gt.y - pairs[i - 1].gt.y;
    dist[i] = dist[i - 1] + std::hypot(dx, dy);
  }
  OracleEvalResult out;
  double t_sum = 0.0;
  double r_sum = 0.0;
  int count = 0;
  for (double length : lengths) {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      std::size_t j = i;
      bool found = false;
      while (j < pairs.size()) {
        if (dist[j] >= dist[i] + length) {
          found = true;
          break;
        }
        ++j;
      }
      if (!found) break;
      const Eigen::Matrix3d gt_rel =
          pose_matrix(pairs[i].gt).inverse() * pose_matrix(pairs[j].gt);
      const Eigen::Matrix3d est_rel =
          pose_matrix(pairs[i].est).inverse() * pose_matrix(pairs[j].est);
      const Eigen::Matrix3d err = gt_rel.inverse() * est_rel;
      t_sum += std::hypot(err(0, 2), err(1, 2)) / length;
      r_sum += std::abs(std::atan2(err(1, 0), err(0, 0))) / length;
      ++count;
    }
  }
  out.trans_percent = count > 0 ? 100.0 * t_sum / count : 0.0;
  out.rot_deg_per_m = count > 0 ? (r_sum / count) * 180.0 / kPi : 0.0;
  return out;
}

OracleEvalResult oracle_frame_errors(const Trajectory& estimate, const Trajectory& ground_truth,
                                     double time_tolerance) {
  const auto pairs = oracle_align(estimate, ground_truth, time_tolerance);
  OracleEvalResult out;
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    const Eigen::Matrix3d gt_rel =
        pose_matrix(pairs[i - 1].gt).inverse() * pose_matrix(pairs[i].gt);
    const Eigen::Matrix3d est_rel =
        pose_matrix(pairs[i - 1].est).inverse() * pose_matrix(pairs[i].est);
    const Eigen::Matrix3d err = gt_rel.inverse() * est_rel;
    out.frame_translation.push_back(std::hypot(err(0, 2), err(1, 2)));
    out.frame_rotation_deg.push_back(std::abs(oracle_wrap(std::atan2(err(1, 0), err(0, 0)))) *
                                     180.0 / kPi);
  }
  return out;
}

}  // namespace rodom::testing
