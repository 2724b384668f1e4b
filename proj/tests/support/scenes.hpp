#pragma once

// Shared synthetic fixtures for matcher, pipeline, and acceptance tests.

#include <cstdint>
#include <vector>

#include "rodom/ingest.hpp"
#include "rodom/submap.hpp"

namespace rodom::testing {

/// Random urban-ish block scene: wall segments plus point clusters, sampled
/// as weighted points with per-point covariance and powers in [0.6, 1.0].
/// Dense enough that 3.75 m NDT cells hold several points.
std::vector<WeightedPoint> make_dense_scene(std::uint64_t seed, int walls = 10, int clusters = 12,
                                            double extent = 40.0);

/// Points as seen from a sensor displaced by `pose`: y = inverse(pose) * x,
/// covariances rotated along.
std::vector<WeightedPoint> observe_from(const std::vector<WeightedPoint>& points,
                                        const Pose2& pose);

Submap submap_from_points(std::vector<WeightedPoint> points, double timestamp = 0.0);

/// World of scattered point landmarks and a few walls around the origin.
WorldSpec make_landmark_world(std::uint64_t seed, int n_points, double extent,
                              double reflectivity_min = 0.6, double reflectivity_max = 1.0);

/// Structure-rich world: an outer wall box, interior walls at odd angles,
/// and small point clusters. Dense enough for scanning-mode NDT cells.
WorldSpec make_walled_world(std::uint64_t seed, double extent,
                            double reflectivity_min = 0.6, double reflectivity_max = 1.0);

/// Closed rounded-rectangle loop sampled at constant speed.
Trajectory make_loop_trajectory(int frames, double dt, double radius, double speed);

Trajectory make_straight_trajectory(int frames, double dt, double speed);

/// Five-sensor automotive mount set (front, two front corners, two rear).
std::vector<Pose2> five_mounts();

}  // namespace rodom::testing
