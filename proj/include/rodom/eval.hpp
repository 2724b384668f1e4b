#pragma once

#include <utility>
#include <vector>

#include "rodom/ingest.hpp"

namespace rodom {

struct EvalConfig {
  double time_tolerance = 0.05;  // s, nearest-timestamp association window
  bool interpolate = false;      // linear pose interpolation instead of nearest
};

struct SegmentStats {
  double length = 0.0;             // m
  double trans_percent = 0.0;      // mean ||t_err|| / length, percent
  double rot_deg_per_m = 0.0;      // mean |theta_err| / length, deg/m
  int sample_count = 0;
};

struct EvalReport {
  double translational_error_percent = 0.0;  // mean over all segment samples
  double rotational_error_deg_per_m = 0.0;
  std::vector<double> per_frame_translation_m;
  std::vector<double> per_frame_rotation_deg;
  std::vector<SegmentStats> segment_table;
};

/// KITTI-style relative errors: for each aligned pose and each segment length
/// L, take the first later pose whose accumulated ground-truth path length
/// reaches L; the error pose is inverse(gt_rel) (+) est_rel, reported as
/// ||translation||/L (percent) and |theta|/L (deg/m). The headline numbers
/// average over all (pose, L) samples. Throws NoOverlapError when no segment
/// fits and TimeAlignmentError when fewer than two poses associate.
EvalReport segment_errors(const Trajectory& estimate, const Trajectory& ground_truth,
                          const std::vector<double>& lengths, const EvalConfig& cfg = {});

/// Segment lengths 100 m to 800 m with a 100 m increment; also fills the
/// per-frame error lists.
EvalReport kitti_errors(const Trajectory& estimate, const Trajectory& ground_truth,
                        const EvalConfig& cfg = {});

/// Single 1 m segment: (translational percent, rotational deg/m).
std::pair<double, double> per_meter_error(const Trajectory& estimate,
                                          const Trajectory& ground_truth,
                                          const EvalConfig& cfg = {});

struct FrameErrors {
  std::vector<double> translation_m;  // per consecutive frame pair
  std::vector<double> rotation_deg;
  double mean_translation_m = 0.0;
  double mean_rotation_deg = 0.0;
};

/// Error pose between consecutive relative motions of the aligned trajectories.
FrameErrors frame_errors(const Trajectory& estimate, const Trajectory& ground_truth,
                         const EvalConfig& cfg = {});

}  // namespace rodom
