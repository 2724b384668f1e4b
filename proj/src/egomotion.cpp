#include "rodom/egomotion.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "rodom/errors.hpp"

namespace rodom {

namespace {

// Row of the linear Doppler model: vr = -row . (vx, vy, omega).
Vec3 doppler_row(const RadarPoint& pt) {
  const double c = std::cos(pt.azimuth);
  const double s = std::sin(pt.azimuth);
  return {c, s, s * pt.position.x() - c * pt.position.y()};
}

struct LinearSystem {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
};

LinearSystem build_system(const std::vector<const RadarPoint*>& pts) {
  LinearSystem sys;
  sys.a.resize(static_cast<Eigen::Index>(pts.size()), 3);
  sys.b.resize(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    sys.a.row(static_cast<Eigen::Index>(i)) = doppler_row(*pts[i]).transpose();
    sys.b(static_cast<Eigen::Index>(i)) = *pts[i]->radial_velocity;
  }
  return sys;
}

// Minimum-norm least-squares solve of A x = -b; rank-deficient systems (all
// sensors on the vehicle origin make omega unobservable) fall back to the
// reduced solution with omega = 0.
Vec3 solve_min_norm(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int* rank_out = nullptr) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-9);
  if (rank_out) *rank_out = static_cast<int>(svd.rank());
  return svd.solve(-b);
}

Mat3 pseudo_inverse(const Mat3& m) {
  Eigen::SelfAdjointEigenSolver<Mat3> eig(m);
  const double floor = std::max(eig.eigenvalues().maxCoeff(), 0.0) * 1e-12;
  Mat3 inv = Mat3::Zero();
  for (int i = 0; i < 3; ++i) {
    const double lam = eig.eigenvalues()(i);
    if (lam > floor && lam > 0.0) {
      inv += eig.eigenvectors().col(i) * eig.eigenvectors().col(i).transpose() / lam;
    }
  }
  return inv;
}

}  // namespace

EgoVelocityEstimate estimate_ego_velocity(const PointScan& scan, const PreprocessConfig& cfg,
                                          std::uint64_t seed) {
  std::vector<const RadarPoint*> usable;
  usable.reserve(scan.points.size());
  for (const auto& pt : scan.points) {
    if (pt.radial_velocity) usable.push_back(&pt);
  }
  if (usable.size() < 3) {
    throw InsufficientDopplerError("estimate_ego_velocity: " + std::to_string(usable.size()) +
                                   " Doppler points, need 3");
  }

  const LinearSystem sys = build_system(usable);
  const auto count_inliers = [&](const Vec3& x, std::vector<int>* idx) {
    int count = 0;
    for (Eigen::Index i = 0; i < sys.b.size(); ++i) {
      const double residual = sys.b(i) + sys.a.row(i).dot(x);
      if (std::abs(residual) <= cfg.ransac_inlier_threshold) {
        ++count;
        if (idx) idx->push_back(static_cast<int>(i));
      }
    }
    return count;
  };

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, usable.size() - 1);
  Vec3 best_model = Vec3::Zero();
  int best_count = -1;
  for (int iter = 0; iter < cfg.ransac_iterations; ++iter) {
    std::size_t i0 = pick(rng);
    std::size_t i1 = pick(rng);
    std::size_t i2 = pick(rng);
    if (i0 == i1 || i0 == i2 || i1 == i2) continue;
    Eigen::Matrix3d a;
    a.row(0) = sys.a.row(static_cast<Eigen::Index>(i0));
    a.row(1) = sys.a.row(static_cast<Eigen::Index>(i1));
    a.row(2) = sys.a.row(static_cast<Eigen::Index>(i2));
    Vec3 b{sys.b(static_cast<Eigen::Index>(i0)), sys.b(static_cast<Eigen::Index>(i1)),
           sys.b(static_cast<Eigen::Index>(i2))};
    const Vec3 model = solve_min_norm(a, b);
    const int count = count_inliers(model, nullptr);
    if (count > best_count) {
      best_count = count;
      best_model = model;
    }
  }

  // Consensus refit, iterated until the inlier set stabilizes: re-selecting
  // inliers with the refined model removes the tilt of the minimal-sample fit.
  std::vector<int> consensus;
  count_inliers(best_model, &consensus);
  if (consensus.empty()) {
    EgoVelocityEstimate est;
    est.valid = false;
    return est;
  }
  Vec3 refined = best_model;
  int rank = 0;
  Eigen::MatrixXd ac;
  Eigen::VectorXd bc;
  for (int round = 0; round < 5; ++round) {
    ac.resize(static_cast<Eigen::Index>(consensus.size()), 3);
    bc.resize(static_cast<Eigen::Index>(consensus.size()));
    for (std::size_t i = 0; i < consensus.size(); ++i) {
      ac.row(static_cast<Eigen::Index>(i)) = sys.a.row(consensus[i]);
      bc(static_cast<Eigen::Index>(i)) = sys.b(consensus[i]);
    }
    refined = solve_min_norm(ac, bc, &rank);
    std::vector<int> reselected;
    count_inliers(refined, &reselected);
    if (reselected.empty() || reselected == consensus) break;
    consensus = std::move(reselected);
  }

  EgoVelocityEstimate est;
  est.v = refined.head<2>();
  est.omega = refined(2);
  est.inlier_count = static_cast<int>(consensus.size());

  const Eigen::VectorXd residuals = bc + ac * refined;
  const int dof = static_cast<int>(consensus.size()) - rank;
  const double sigma2 = dof > 0 ? residuals.squaredNorm() / dof : 0.0;
  est.cov = symmetrized(sigma2 * pseudo_inverse(ac.transpose() * ac));

  const double fraction = static_cast<double>(consensus.size()) / static_cast<double>(usable.size());
  est.valid = fraction >= cfg.ransac_min_inlier_fraction;
  return est;
}

PoseWithCov integrate_body_velocity(const Vec2& v, double omega, const Mat3& vel_cov, double dt) {
  PoseWithCov out;
  Mat3 j = Mat3::Zero();
  const double u = omega * dt;
  if (std::abs(omega) < 1e-9) {
    out.pose = {v.x() * dt, v.y() * dt, normalize_angle(u)};
    j(0, 0) = dt;
    j(1, 1) = dt;
    j(0, 2) = -v.y() * dt * dt / 2.0;
    j(1, 2) = v.x() * dt * dt / 2.0;
    j(2, 2) = dt;
  } else {
    const double su = std::sin(u);
    const double half = std::sin(u / 2.0);
    const double a = dt * su / u;                    // sin(u)/omega
    const double b = dt * 2.0 * half * half / u;     // (1 - cos(u))/omega
    const double x = v.x() * a - v.y() * b;
    const double y = v.x() * b + v.y() * a;
    out.pose = {x, y, normalize_angle(u)};
    j(0, 0) = a;
    j(0, 1) = -b;
    j(1, 0) = b;
    j(1, 1) = a;
    j(2, 2) = dt;
    if (std::abs(u) < 1e-3) {
      // Series forms; the closed-form omega derivatives cancel badly here.
      j(0, 2) = -v.x() * dt * dt * u / 3.0 - v.y() * dt * dt * (0.5 - u * u / 8.0);
      j(1, 2) = v.x() * dt * dt * (0.5 - u * u / 8.0) - v.y() * dt * dt * u / 3.0;
    } else {
      const double cu = std::cos(u);
      j(0, 2) = (dt * (v.x() * cu - v.y() * su) - x) / omega;
      j(1, 2) = (dt * (v.x() * su + v.y() * cu) - y) / omega;
    }
  }
  out.cov = symmetrized(j * vel_cov * j.transpose());
  return out;
}

PoseWithCov integrate_velocity(const EgoVelocityEstimate& est, double dt) {
  if (!est.valid) throw InvalidEstimateError("integrate_velocity: estimate not valid");
  if (!(dt > 0.0)) throw InvalidEstimateError("integrate_velocity: dt must be positive");
  return integrate_body_velocity(est.v, est.omega, est.cov, dt);
}

std::pair<Vec2, double> body_velocity_from_relative_pose(const Pose2& rel, double dt) {
  const double u = rel.theta;
  const double omega = u / dt;
  if (std::abs(omega) < 1e-9) {
    return {{rel.x / dt, rel.y / dt}, omega};
  }
  const double su = std::sin(u);
  const double half = std::sin(u / 2.0);
  const double a = dt * su / u;
  const double b = dt * 2.0 * half * half / u;
  const double det = a * a + b * b;
  Vec2 v{(a * rel.x + b * rel.y) / det, (-b * rel.x + a * rel.y) / det};
  return {v, omega};
}

}  // namespace rodom
