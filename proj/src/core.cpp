#include "rodom/core.hpp"

#include <cmath>

namespace rodom {

double normalize_angle(double theta) {
  double t = std::fmod(theta, 2.0 * kPi);
  if (t <= -kPi) {
    t += 2.0 * kPi;
  } else if (t > kPi) {
    t -= 2.0 * kPi;
  }
  return t;
}

Mat2 rotation_matrix(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

Pose2 compose(const Pose2& a, const Pose2& b) {
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  return {a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y, normalize_angle(a.theta + b.theta)};
}

Pose2 inverse(const Pose2& p) {
  const double c = std::cos(p.theta);
  const double s = std::sin(p.theta);
  return {-(c * p.x + s * p.y), -(-s * p.x + c * p.y), normalize_angle(-p.theta)};
}

Vec2 transform_point(const Pose2& pose, const Vec2& pt) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  return {pose.x + c * pt.x() - s * pt.y(), pose.y + s * pt.x() + c * pt.y()};
}

Eigen::Matrix<double, 2, 3> transform_point_jacobian(const Pose2& pose, const Vec2& pt) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  Eigen::Matrix<double, 2, 3> j;
  j << 1.0, 0.0, -s * pt.x() - c * pt.y(),  //
      0.0, 1.0, c * pt.x() - s * pt.y();
  return j;
}

Mat2 propagate_point_covariance(const Pose2& pose, const Covariance3& pose_cov, const Vec2& pt,
                                const Mat2& pt_cov) {
  const Mat2 r = rotation_matrix(pose.theta);
  const Eigen::Matrix<double, 2, 3> j = transform_point_jacobian(pose, pt);
  const Mat2 out = r * pt_cov * r.transpose() + j * pose_cov * j.transpose();
  return symmetrized(out);
}

PoseWithCov compose_with_covariance(const PoseWithCov& a, const PoseWithCov& b) {
  const double c = std::cos(a.pose.theta);
  const double s = std::sin(a.pose.theta);
  Mat3 ja = Mat3::Identity();
  ja(0, 2) = -s * b.pose.x - c * b.pose.y;
  ja(1, 2) = c * b.pose.x - s * b.pose.y;
  Mat3 jb = Mat3::Identity();
  jb.topLeftCorner<2, 2>() = rotation_matrix(a.pose.theta);
  PoseWithCov out;
  out.pose = compose(a.pose, b.pose);
  out.cov = symmetrized(ja * a.cov * ja.transpose() + jb * b.cov * jb.transpose());
  return out;
}

PoseWithCov inverse_with_covariance(const PoseWithCov& p) {
  const double c = std::cos(p.pose.theta);
  const double s = std::sin(p.pose.theta);
  Mat3 j;
  j << -c, -s, s * p.pose.x - c * p.pose.y,  //
      s, -c, c * p.pose.x + s * p.pose.y,    //
      0.0, 0.0, -1.0;
  PoseWithCov out;
  out.pose = inverse(p.pose);
  out.cov = symmetrized(j * p.cov * j.transpose());
  return out;
}

}  // namespace rodom
