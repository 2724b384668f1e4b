#include <random>

#include "doctest.h"
#include "rodom/eval.hpp"
#include "support/oracles.hpp"

using namespace rodom;
namespace oracle = rodom::testing;

namespace {

Trajectory straight_line(int frames, double step, double scale = 1.0) {
  Trajectory traj;
  for (int k = 0; k < frames; ++k) {
    traj.poses.push_back({static_cast<double>(k), {scale * step * k, 0.0, 0.0}});
  }
  return traj;
}

// Smooth random trajectory with bounded curvature and irregular step
// lengths (exact-integer path sums would park every segment boundary on a
// comparison tie), plus a perturbed copy.
std::pair<Trajectory, Trajectory> random_pair(std::uint64_t seed, int frames, double step) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> turn(0.0, 0.02);
  std::normal_distribution<double> noise(0.0, 0.03);
  std::uniform_real_distribution<double> stretch(0.8, 1.2);
  Trajectory gt;
  Trajectory est;
  Pose2 g{};
  Pose2 e{};
  for (int k = 0; k < frames; ++k) {
    gt.poses.push_back({static_cast<double>(k), g});
    est.poses.push_back({static_cast<double>(k), e});
    const Pose2 rel{step * stretch(rng), 0.0, turn(rng)};
    const Pose2 rel_noisy{rel.x + noise(rng), noise(rng), rel.theta + 0.2 * turn(rng)};
    g = compose(g, rel);
    e = compose(e, rel_noisy);
  }
  return {est, gt};
}

}  // namespace

TEST_CASE("identical trajectories give zero errors everywhere") {
  const Trajectory t = straight_line(1200, 1.0);
  const EvalReport report = kitti_errors(t, t);
  CHECK(report.translational_error_percent == 0.0);
  CHECK(report.rotational_error_deg_per_m == 0.0);
  const auto [pm_t, pm_r] = per_meter_error(t, t);
  CHECK(pm_t == 0.0);
  CHECK(pm_r == 0.0);
  const FrameErrors fe = frame_errors(t, t);
  CHECK(fe.mean_translation_m == 0.0);
  CHECK(fe.mean_rotation_deg == 0.0);
}

TEST_CASE("a 1% scale factor reads as exactly 1% translational error") {
  const Trajectory gt = straight_line(1001, 1.0);
  const Trajectory est = straight_line(1001, 1.0, 1.01);
  const EvalReport report = kitti_errors(est, gt);
  CHECK(report.translational_error_percent == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(report.rotational_error_deg_per_m == 0.0);
  for (const auto& seg : report.segment_table) {
    if (seg.sample_count > 0) {
      CHECK(seg.trans_percent == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  const auto [pm_t, pm_r] = per_meter_error(est, gt);
  CHECK(pm_t == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(pm_r == 0.0);
}

TEST_CASE("randomized trajectories match the independent oracle to 1e-12") {
  std::vector<double> kitti_lengths;
  for (int l = 100; l <= 800; l += 100) kitti_lengths.push_back(l);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto [est, gt] = random_pair(seed, 1500, 1.0);
    const EvalReport mine = segment_errors(est, gt, kitti_lengths);
    const auto ref = oracle::oracle_segment_errors(est, gt, kitti_lengths);
    CHECK(std::abs(mine.translational_error_percent - ref.trans_percent) <= 1e-12);
    CHECK(std::abs(mine.rotational_error_deg_per_m - ref.rot_deg_per_m) <= 1e-12);

    const auto [pm_t, pm_r] = per_meter_error(est, gt);
    const auto pm_ref = oracle::oracle_segment_errors(est, gt, {1.0});
    CHECK(std::abs(pm_t - pm_ref.trans_percent) <= 1e-12);
    CHECK(std::abs(pm_r - pm_ref.rot_deg_per_m) <= 1e-12);

    const FrameErrors fe = frame_errors(est, gt);
    const auto fe_ref = oracle::oracle_frame_errors(est, gt);
    REQUIRE(fe.translation_m.size() == fe_ref.frame_translation.size());
    for (std::size_t i = 0; i < fe.translation_m.size(); ++i) {
      CHECK(std::abs(fe.translation_m[i] - fe_ref.frame_translation[i]) <= 1e-12);
      CHECK(std::abs(fe.rotation_deg[i] - fe_ref.frame_rotation_deg[i]) <= 1e-12);
    }
  }
}

TEST_CASE("metrics are invariant to a global rigid transform") {
  const auto [est, gt] = random_pair(3, 1200, 1.0);
  const Pose2 world_shift{123.0, -57.0, 1.1};
  auto shift = [&](const Trajectory& t) {
    Trajectory out = t;
    for (auto& tp : out.poses) tp.pose = compose(world_shift, tp.pose);
    return out;
  };
  const EvalReport base = kitti_errors(est, gt);
  const EvalReport moved = kitti_errors(shift(est), shift(gt));
  CHECK(std::abs(base.translational_error_percent - moved.translational_error_percent) <= 1e-9);
  CHECK(std::abs(base.rotational_error_deg_per_m - moved.rotational_error_deg_per_m) <= 1e-9);
}

TEST_CASE("kitti at L=1 equals per_meter_error exactly") {
  const auto [est, gt] = random_pair(5, 400, 1.0);
  const EvalReport at_one = segment_errors(est, gt, {1.0});
  const auto [pm_t, pm_r] = per_meter_error(est, gt);
  CHECK(at_one.translational_error_percent == pm_t);
  CHECK(at_one.rotational_error_deg_per_m == pm_r);
}

TEST_CASE("swapping estimate and ground truth is symmetric for equal step lengths") {
  // Same per-frame step lengths on both sides: association and segment
  // indices agree, and the relative error pose norm is swap-invariant.
  std::mt19937_64 rng(9);
  std::normal_distribution<double> turn(0.0, 0.05);
  std::uniform_real_distribution<double> stretch(0.8, 1.2);
  Trajectory a;
  Trajectory b;
  Pose2 pa{};
  Pose2 pb{};
  for (int k = 0; k < 600; ++k) {
    a.poses.push_back({static_cast<double>(k), pa});
    b.poses.push_back({static_cast<double>(k), pb});
    const double len = stretch(rng);
    pa = compose(pa, {len, 0.0, turn(rng)});
    pb = compose(pb, {len, 0.0, turn(rng)});
  }
  const EvalReport ab = segment_errors(a, b, {100.0, 200.0});
  const EvalReport ba = segment_errors(b, a, {100.0, 200.0});
  CHECK(std::abs(ab.translational_error_percent - ba.translational_error_percent) <= 1e-12);
}

TEST_CASE("error conditions: NoOverlap and TimeAlignment") {
  const Trajectory tiny = straight_line(40, 1.0);  // 39 m of path
  CHECK_THROWS_AS(kitti_errors(tiny, tiny), NoOverlapError);

  Trajectory late = tiny;
  for (auto& tp : late.poses) tp.timestamp += 1000.0;
  CHECK_THROWS_AS(frame_errors(tiny, late), TimeAlignmentError);
}

TEST_CASE("frame_errors reports an injected constant lateral slip") {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> turn(0.0, 0.03);
  Trajectory gt;
  Trajectory est;
  Pose2 g{};
  Pose2 e{};
  for (int k = 0; k < 200; ++k) {
    gt.poses.push_back({static_cast<double>(k), g});
    est.poses.push_back({static_cast<double>(k), e});
    const Pose2 rel{1.0, 0.0, turn(rng)};
    g = compose(g, rel);
    e = compose(e, compose(rel, Pose2{0.0, 0.05, 0.0}));
  }
  const FrameErrors fe = frame_errors(est, gt);
  CHECK(fe.mean_translation_m == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(fe.mean_rotation_deg == doctest::Approx(0.0));
}

TEST_CASE("interpolated alignment handles offset timestamps") {
  // Ground truth at 10 Hz; estimate sampled exactly on the same straight
  // motion but 50 ms later. Linear interpolation makes the errors vanish.
  Trajectory gt;
  Trajectory est;
  for (int k = 0; k < 300; ++k) {
    gt.poses.push_back({0.1 * k, {2.0 * 0.1 * k, 0.0, 0.0}});
  }
  for (int k = 0; k < 299; ++k) {
    const double t = 0.1 * k + 0.05;
    est.poses.push_back({t, {2.0 * t, 0.0, 0.0}});
  }
  EvalConfig cfg;
  cfg.interpolate = true;
  const FrameErrors fe = frame_errors(est, gt, cfg);
  CHECK(fe.mean_translation_m <= 1e-12);
}
