#include "rodom/matcher.hpp"

#include <cmath>
#include <vector>

#include "rodom/errors.hpp"

namespace rodom {

const char* to_string(MatchFailure f) {
  switch (f) {
    case MatchFailure::none: return "none";
    case MatchFailure::motion_prior: return "motion_prior";
    case MatchFailure::empty_map: return "empty_map";
    case MatchFailure::diverged: return "diverged";
  }
  return "unknown";
}

namespace {

double uncertainty_factor(const Mat2& point_cov) {
  const double sx = std::sqrt(std::max(point_cov(0, 0), 0.0));
  const double sy = std::sqrt(std::max(point_cov(1, 1), 0.0));
  return std::exp(-0.5 * (sx + sy));
}

}  // namespace

double matching_weight(double raw_weight, double s, const Mat2& point_cov) {
  const double shifted = shifted_weight(raw_weight, s);
  return shifted <= 0.0 ? 0.0 : shifted * uncertainty_factor(point_cov);
}

double matching_weight(std::optional<double> power, double s, const Mat2& point_cov) {
  const double shifted = shifted_weight(power, s);
  return shifted <= 0.0 ? 0.0 : shifted * uncertainty_factor(point_cov);
}

namespace {

// Exponents beyond this contribute < 1e-14 of the weight; skipping them keeps
// the brute-force lattice sweeps cheap.
constexpr double kExponentCutoff = 64.0;

struct PreparedPoint {
  Vec2 position;
  double weight;
};

std::vector<PreparedPoint> prepare_points(std::span<const WeightedPoint> points, double s,
                                          bool uncertainty_weighting) {
  std::vector<PreparedPoint> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    const double w = uncertainty_weighting ? matching_weight(p.weight, s, p.cov)
                                           : shifted_weight(p.weight, s);
    if (w > 0.0) out.push_back({p.position, w});
  }
  return out;
}

double score_prepared(const NdtMap& map, const std::vector<PreparedPoint>& points,
                      const Pose2& pose) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  double score = 0.0;
  for (const auto& p : points) {
    const Vec2 q{pose.x + c * p.position.x() - s * p.position.y(),
                 pose.y + s * p.position.x() + c * p.position.y()};
    for (int layer = 0; layer < NdtMap::kLayers; ++layer) {
      const NdtCell* cell = map.cell_at(layer, q);
      if (!cell) continue;
      const Vec2 d = q - cell->mean;
      const double m = d.dot(cell->cov_inverse * d);
      if (m > 2.0 * kExponentCutoff) continue;
      score += p.weight * std::exp(-0.5 * m);
    }
  }
  return score;
}

ScoreDerivatives derivatives_prepared(const NdtMap& map, const std::vector<PreparedPoint>& points,
                                      const Pose2& pose) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  ScoreDerivatives out;
  for (const auto& p : points) {
    const double x1 = p.position.x();
    const double x2 = p.position.y();
    const Vec2 q{pose.x + c * x1 - s * x2, pose.y + s * x1 + c * x2};
    Eigen::Matrix<double, 2, 3> jq;
    jq << 1.0, 0.0, -s * x1 - c * x2,  //
        0.0, 1.0, c * x1 - s * x2;
    const Vec2 q_theta_theta{-c * x1 + s * x2, -s * x1 - c * x2};
    for (int layer = 0; layer < NdtMap::kLayers; ++layer) {
      const NdtCell* cell = map.cell_at(layer, q);
      if (!cell) continue;
      const Vec2 d = q - cell->mean;
      const Vec2 bd = cell->cov_inverse * d;
      const double m = d.dot(bd);
      if (m > 2.0 * kExponentCutoff) continue;
      const double se = p.weight * std::exp(-0.5 * m);
      const Vec3 v = jq.transpose() * bd;
      out.score += se;
      out.gradient -= se * v;
      Mat3 h = v * v.transpose() - jq.transpose() * cell->cov_inverse * jq;
      h(2, 2) -= bd.dot(q_theta_theta);
      out.hessian += se * h;
    }
  }
  out.hessian = symmetrized(out.hessian);
  return out;
}

Pose2 apply_increment(const Pose2& pose, const Vec3& delta) {
  return {pose.x + delta(0), pose.y + delta(1), normalize_angle(pose.theta + delta(2))};
}

}  // namespace

double ndt_score(const NdtMap& map, std::span<const WeightedPoint> points, const Pose2& pose,
                 double s, bool uncertainty_weighting) {
  return score_prepared(map, prepare_points(points, s, uncertainty_weighting), pose);
}

ScoreDerivatives ndt_score_derivatives(const NdtMap& map, std::span<const WeightedPoint> points,
                                       const Pose2& pose, double s, bool uncertainty_weighting) {
  return derivatives_prepared(map, prepare_points(points, s, uncertainty_weighting), pose);
}

MatchResult ndt_match(const NdtMap& map, std::span<const WeightedPoint> points,
                      const Pose2& initial_guess, const MatchConfig& cfg, double s) {
  MatchResult result;
  result.relative_pose = initial_guess;
  result.grid_size_used = map.grid_size;
  result.shift_used = s;

  const auto prepared = prepare_points(points, s, cfg.uncertainty_weighting);
  if (prepared.empty()) {
    result.failure_reason = MatchFailure::diverged;
    return result;
  }

  Pose2 pose = initial_guess;
  double cost = -score_prepared(map, prepared, pose);
  for (int iter = 0; iter < cfg.max_newton_iterations; ++iter) {
    result.iterations = iter + 1;
    const ScoreDerivatives d = derivatives_prepared(map, prepared, pose);
    const Vec3 grad = -d.gradient;
    Mat3 hess = -d.hessian;

    Eigen::SelfAdjointEigenSolver<Mat3> eig(hess);
    const double lam_min = eig.eigenvalues()(0);
    const double lam_max = eig.eigenvalues()(2);
    const double eps = 1e-6 * std::max(1.0, std::abs(lam_max));
    if (lam_min < eps) hess += (eps - lam_min) * Mat3::Identity();

    Vec3 step = hess.ldlt().solve(-grad);
    // An indefinite Hessian made barely-PSD can shoot the step far past the
    // basin; one grid length is the natural trust radius for NDT.
    const double max_step = map.grid_size;
    if (step.norm() > max_step) step *= max_step / step.norm();
    if (step.norm() < cfg.convergence_epsilon) {
      const Pose2 candidate = apply_increment(pose, step);
      const double candidate_cost = -score_prepared(map, prepared, candidate);
      if (candidate_cost < cost) {
        pose = candidate;
        cost = candidate_cost;
      }
      result.converged = true;
      break;
    }

    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h <= cfg.max_step_halvings; ++h) {
      const Pose2 candidate = apply_increment(pose, alpha * step);
      const double candidate_cost = -score_prepared(map, prepared, candidate);
      if (candidate_cost < cost) {
        pose = candidate;
        cost = candidate_cost;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // no descent available
    if ((alpha * step).norm() < cfg.convergence_epsilon) {
      result.converged = true;
      break;
    }
  }

  result.relative_pose = pose;
  result.score = -cost;
  result.failure_reason = result.converged ? MatchFailure::none : MatchFailure::diverged;
  return result;
}

MatchResult match_with_escalation(const NdtMapBuilder& map_builder,
                                  std::span<const WeightedPoint> points,
                                  const Pose2& initial_guess,
                                  std::optional<Pose2> predicted_motion,
                                  std::optional<double> prev_velocity, double dt,
                                  const MatchConfig& cfg, double base_grid_size, double s0) {
  if (!(dt > 0.0)) throw Error("match_with_escalation: dt must be positive");
  const double g0 = (prev_velocity && *prev_velocity < cfg.low_speed_threshold)
                        ? cfg.low_speed_grid
                        : base_grid_size;

  double grid = g0;
  double s = s0;
  int halvings = 0;
  int attempts = 0;
  MatchResult last;
  while (true) {
    bool rung_ok = false;
    try {
      const NdtMap map = map_builder(grid);
      last = ndt_match(map, points, initial_guess, cfg, s);
      if (last.converged) {
        const double speed = last.relative_pose.translation().norm() / dt;
        const bool acceleration_ok =
            !prev_velocity || std::abs(speed - *prev_velocity) / dt <= cfg.max_acceleration;
        rung_ok = acceleration_ok;
      }
    } catch (const EmptyMapError&) {
      last = MatchResult{};
      last.relative_pose = initial_guess;
      last.failure_reason = MatchFailure::empty_map;
    }
    last.grid_size_used = grid;
    last.shift_used = s;
    if (rung_ok) {
      last.escalations = attempts;
      last.failure_reason = MatchFailure::none;
      return last;
    }
    ++attempts;
    grid += cfg.grid_escalation_step;
    if (grid > cfg.grid_ceiling) {
      if (halvings >= cfg.shift_halvings_max) break;
      ++halvings;
      s *= 0.5;
      grid = g0;
    }
  }

  MatchResult fallback = last;
  fallback.relative_pose = predicted_motion.value_or(initial_guess);
  fallback.converged = false;
  fallback.failure_reason = MatchFailure::motion_prior;
  fallback.escalations = attempts;
  return fallback;
}

}  // namespace rodom
