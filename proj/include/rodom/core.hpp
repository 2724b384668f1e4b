#pragma once

#include <Eigen/Dense>
#include <numbers>

namespace rodom {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Covariance3 = Mat3;

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle into (-pi, pi]. Idempotent.
double normalize_angle(double theta);

/// SE(2) rigid transform. theta is kept normalized to (-pi, pi] by every
/// operation that produces a Pose2.
struct Pose2 {
  double x = 0.0;      // m
  double y = 0.0;      // m
  double theta = 0.0;  // rad

  Vec2 translation() const { return {x, y}; }
};

Mat2 rotation_matrix(double theta);

/// a (+) b: b expressed in a's frame.
Pose2 compose(const Pose2& a, const Pose2& b);
Pose2 inverse(const Pose2& p);

/// pt rotated by pose.theta, then translated.
Vec2 transform_point(const Pose2& pose, const Vec2& pt);

/// Jacobian of transform_point with respect to (x, y, theta), 2x3.
Eigen::Matrix<double, 2, 3> transform_point_jacobian(const Pose2& pose, const Vec2& pt);

template <typename Derived>
auto symmetrized(const Eigen::MatrixBase<Derived>& m) {
  return (0.5 * (m + m.transpose())).eval();
}

/// 2D Gaussian over position.
struct Gaussian2 {
  Vec2 mean = Vec2::Zero();
  Mat2 cov = Mat2::Zero();
};

/// First-order propagation of a point observed in the frame of `pose` into the
/// parent frame: R*pt_cov*R^T + J*pose_cov*J^T, symmetrized.
Mat2 propagate_point_covariance(const Pose2& pose, const Covariance3& pose_cov, const Vec2& pt,
                                const Mat2& pt_cov);

struct PoseWithCov {
  Pose2 pose;
  Covariance3 cov = Covariance3::Zero();
};

/// Pose composition with first-order covariance chaining, assuming a and b
/// are independent: cov = Ja*cov_a*Ja^T + Jb*cov_b*Jb^T.
PoseWithCov compose_with_covariance(const PoseWithCov& a, const PoseWithCov& b);

/// Pose inversion with first-order covariance propagation.
PoseWithCov inverse_with_covariance(const PoseWithCov& p);

}  // namespace rodom
