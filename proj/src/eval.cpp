#include "rodom/eval.hpp"

#include <algorithm>
#include <cmath>

#include "rodom/errors.hpp"

namespace rodom {

namespace {

struct AlignedPair {
  Pose2 est;
  Pose2 gt;
};

Pose2 interpolate_pose(const TimedPose& a, const TimedPose& b, double t) {
  const double span = b.timestamp - a.timestamp;
  const double f = span > 0.0 ? (t - a.timestamp) / span : 0.0;
  const double dtheta = normalize_angle(b.pose.theta - a.pose.theta);
  return {a.pose.x + f * (b.pose.x - a.pose.x), a.pose.y + f * (b.pose.y - a.pose.y),
          normalize_angle(a.pose.theta + f * dtheta)};
}

std::vector<AlignedPair> align(const Trajectory& estimate, const Trajectory& ground_truth,
                               const EvalConfig& cfg) {
  std::vector<AlignedPair> pairs;
  const auto& gt = ground_truth.poses;
  for (const auto& ep : estimate.poses) {
    if (gt.empty()) break;
    const auto it = std::lower_bound(
        gt.begin(), gt.end(), ep.timestamp,
        [](const TimedPose& p, double t) { return p.timestamp < t; });
    if (cfg.interpolate) {
      if (it == gt.begin() || it == gt.end()) {
        // Only exact endpoint hits are usable without extrapolating.
        const TimedPose& edge = it == gt.begin() ? gt.front() : gt.back();
        if (std::abs(edge.timestamp - ep.timestamp) <= cfg.time_tolerance) {
          pairs.push_back({ep.pose, edge.pose});
        }
        continue;
      }
      pairs.push_back({ep.pose, interpolate_pose(*(it - 1), *it, ep.timestamp)});
    } else {
      const TimedPose* best = nullptr;
      if (it != gt.end()) best = &*it;
      if (it != gt.begin()) {
        const TimedPose* prev = &*(it - 1);
        if (!best ||
            std::abs(prev->timestamp - ep.timestamp) <= std::abs(best->timestamp - ep.timestamp)) {
          best = prev;
        }
      }
      if (best && std::abs(best->timestamp - ep.timestamp) <= cfg.time_tolerance) {
        pairs.push_back({ep.pose, best->pose});
      }
    }
  }
  if (pairs.size() < 2) {
    throw TimeAlignmentError("trajectory alignment produced " + std::to_string(pairs.size()) +
                             " pairs");
  }
  return pairs;
}

std::vector<double> gt_cumulative_distance(const std::vector<AlignedPair>& pairs) {
  std::vector<double> dist(pairs.size(), 0.0);
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    const Vec2 step{pairs[i].gt.x - pairs[i - 1].gt.x, pairs[i].gt.y - pairs[i - 1].gt.y};
    dist[i] = dist[i - 1] + step.norm();
  }
  return dist;
}

}  // namespace

EvalReport segment_errors(const Trajectory& estimate, const Trajectory& ground_truth,
                          const std::vector<double>& lengths, const EvalConfig& cfg) {
  const auto pairs = align(estimate, ground_truth, cfg);
  const auto dist = gt_cumulative_distance(pairs);

  EvalReport report;
  double trans_sum = 0.0;
  double rot_sum = 0.0;
  int total = 0;
  for (double length : lengths) {
    SegmentStats stats;
    stats.length = length;
    double t_sum = 0.0;
    double r_sum = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto it = std::lower_bound(dist.begin() + static_cast<std::ptrdiff_t>(i), dist.end(),
                                       dist[i] + length);
      if (it == dist.end()) break;  // no later pose reaches this length
      const std::size_t j = static_cast<std::size_t>(it - dist.begin());
      const Pose2 gt_rel = compose(inverse(pairs[i].gt), pairs[j].gt);
      const Pose2 est_rel = compose(inverse(pairs[i].est), pairs[j].est);
      const Pose2 err = compose(inverse(gt_rel), est_rel);
      t_sum += err.translation().norm() / length;
      r_sum += std::abs(err.theta) / length;
      ++stats.sample_count;
    }
    if (stats.sample_count > 0) {
      stats.trans_percent = 100.0 * t_sum / stats.sample_count;
      stats.rot_deg_per_m = (r_sum / stats.sample_count) * 180.0 / kPi;
      trans_sum += t_sum;
      rot_sum += r_sum;
      total += stats.sample_count;
    }
    report.segment_table.push_back(stats);
  }
  if (total == 0) {
    throw NoOverlapError("segment_errors: no segment of the requested lengths fits the overlap");
  }
  report.translational_error_percent = 100.0 * trans_sum / total;
  report.rotational_error_deg_per_m = (rot_sum / total) * 180.0 / kPi;
  return report;
}

EvalReport kitti_errors(const Trajectory& estimate, const Trajectory& ground_truth,
                        const EvalConfig& cfg) {
  std::vector<double> lengths;
  for (int l = 100; l <= 800; l += 100) lengths.push_back(l);
  EvalReport report = segment_errors(estimate, ground_truth, lengths, cfg);
  const FrameErrors fe = frame_errors(estimate, ground_truth, cfg);
  report.per_frame_translation_m = fe.translation_m;
  report.per_frame_rotation_deg = fe.rotation_deg;
  return report;
}

std::pair<double, double> per_meter_error(const Trajectory& estimate,
                                          const Trajectory& ground_truth, const EvalConfig& cfg) {
  const EvalReport report = segment_errors(estimate, ground_truth, {1.0}, cfg);
  return {report.translational_error_percent, report.rotational_error_deg_per_m};
}

FrameErrors frame_errors(const Trajectory& estimate, const Trajectory& ground_truth,
                         const EvalConfig& cfg) {
  const auto pairs = align(estimate, ground_truth, cfg);
  FrameErrors out;
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    const Pose2 gt_rel = compose(inverse(pairs[i - 1].gt), pairs[i].gt);
    const Pose2 est_rel = compose(inverse(pairs[i - 1].est), pairs[i].est);
    const Pose2 err = compose(inverse(gt_rel), est_rel);
    out.translation_m.push_back(err.translation().norm());
    out.rotation_deg.push_back(std::abs(err.theta) * 180.0 / kPi);
  }
  for (double t : out.translation_m) out.mean_translation_m += t;
  for (double r : out.rotation_deg) out.mean_rotation_deg += r;
  out.mean_translation_m /= static_cast<double>(out.translation_m.size());
  out.mean_rotation_deg /= static_cast<double>(out.rotation_deg.size());
  return out;
}

}  // namespace rodom
