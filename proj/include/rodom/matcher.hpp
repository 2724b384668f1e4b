#pragma once

#include <functional>
#include <optional>
#include <span>

#include "rodom/ndt.hpp"

namespace rodom {

struct MatchConfig {
  int max_newton_iterations = 50;
  double convergence_epsilon = 1e-4;  // pose-increment norm, combined m and rad
  int max_step_halvings = 10;
  double max_acceleration = 8.0;           // m/s^2, motion prior
  double grid_escalation_step = 2.5;       // m
  double grid_ceiling = 12.5;              // m
  int shift_halvings_max = 2;
  double low_speed_grid = 1.5;             // m
  double low_speed_threshold = 1.5 / 3.6;  // m/s (1.5 km/h)
  bool uncertainty_weighting = true;       // exp(-(sigma_x+sigma_y)/2) point factor
};

enum class MatchFailure { none, motion_prior, empty_map, diverged };
const char* to_string(MatchFailure f);

struct MatchResult {
  Pose2 relative_pose;
  double score = 0.0;
  int iterations = 0;
  bool converged = false;
  double grid_size_used = 0.0;
  double shift_used = 0.0;
  MatchFailure failure_reason = MatchFailure::none;
  int escalations = 0;  // ladder rungs retried before this result
};

/// Matching weight of a moving-scan point: shifted power scaled down by the
/// point's positional standard deviations.
double matching_weight(std::optional<double> power, double s, const Mat2& point_cov);
double matching_weight(double raw_weight, double s, const Mat2& point_cov);

/// Sum over points and layers of w_i * exp(-0.5 * d^T Sigma^-1 d) at `pose`.
/// Points landing in empty cells contribute zero. The cost minimized by
/// matching is the negative of this score.
double ndt_score(const NdtMap& map, std::span<const WeightedPoint> points, const Pose2& pose,
                 double s, bool uncertainty_weighting = true);

struct ScoreDerivatives {
  double score = 0.0;
  Vec3 gradient = Vec3::Zero();  // of the score w.r.t. (x, y, theta)
  Mat3 hessian = Mat3::Zero();
};

ScoreDerivatives ndt_score_derivatives(const NdtMap& map, std::span<const WeightedPoint> points,
                                       const Pose2& pose, double s,
                                       bool uncertainty_weighting = true);

/// Newton iterations on (x, y, theta) with analytic gradient/Hessian, Hessian
/// PSD-ification and a halving backtracking line search. Stops when the pose
/// increment norm drops below convergence_epsilon or the iteration cap hits.
MatchResult ndt_match(const NdtMap& map, std::span<const WeightedPoint> points,
                      const Pose2& initial_guess, const MatchConfig& cfg, double s);

using NdtMapBuilder = std::function<NdtMap(double grid_size)>;

/// Escalation ladder: run ndt_match at the base grid (low_speed_grid when the
/// previous speed is below the low-speed threshold); on failure (divergence or
/// implied acceleration above max_acceleration) enlarge the grid by
/// grid_escalation_step, and once the grid would pass grid_ceiling reset it
/// and halve s, up to shift_halvings_max times. A fully failed ladder returns
/// the constant-velocity prediction with failure_reason = motion_prior.
/// prev_velocity = nullopt disables the acceleration test (no motion history).
MatchResult match_with_escalation(const NdtMapBuilder& map_builder,
                                  std::span<const WeightedPoint> points,
                                  const Pose2& initial_guess,
                                  std::optional<Pose2> predicted_motion,
                                  std::optional<double> prev_velocity, double dt,
                                  const MatchConfig& cfg, double base_grid_size, double s0);

}  // namespace rodom
