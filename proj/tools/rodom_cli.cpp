// Command-line surface for the radar odometry toolkit: run odometry over a
// scan directory, evaluate trajectories, synthesize test worlds, and export
// rasters / cost surfaces.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rodom/config.hpp"
#include "rodom/eval.hpp"
#include "rodom/matcher.hpp"
#include "rodom/pipeline.hpp"
#include "rodom/submap.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rodom;

namespace {

int parse_thread_cap() {
  // Caps internal parallelism (0 = auto). Evaluation is currently
  // single-threaded, which satisfies any cap.
  const char* env = std::getenv("RADAR_ODOM_THREADS");
  if (!env) return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 0) {
    std::cerr << "warning: ignoring invalid RADAR_ODOM_THREADS='" << env << "'\n";
    return 0;
  }
  return static_cast<int>(v);
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& extension) {
  if (!fs::is_directory(dir)) {
    throw MalformedFileError(dir.string() + ": not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != extension) continue;
    // synth drops the ground-truth trajectory next to the scans.
    if (entry.path().filename() == "ground_truth.csv") continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

void check_monotonic(double prev, double now, const fs::path& path) {
  if (now <= prev) {
    throw NonMonotonicTimeError(path.string() + ": scan timestamps not strictly increasing");
  }
}

void write_frame_log(const fs::path& path, const OdometryOutput& out) {
  std::ofstream os(path);
  if (!os) throw MalformedFileError(path.string() + ": cannot open for writing");
  for (std::size_t i = 0; i < out.per_frame.size(); ++i) {
    const MatchResult& r = out.per_frame[i];
    json line;
    line["frame"] = i + 1;
    line["timestamp"] = out.trajectory.poses[i + 1].timestamp;
    line["score"] = r.score;
    line["iterations"] = r.iterations;
    line["converged"] = r.converged;
    line["grid_size_used"] = r.grid_size_used;
    line["shift_used"] = r.shift_used;
    line["failure_reason"] = to_string(r.failure_reason);
    line["escalations"] = r.escalations;
    os << line.dump() << "\n";
  }
}

void write_pgm(const fs::path& path, const std::vector<std::uint8_t>& pixels, int width,
               int height) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw MalformedFileError(path.string() + ": cannot open for writing");
  os << "P5\n" << width << " " << height << "\n255\n";
  os.write(reinterpret_cast<const char*>(pixels.data()),
           static_cast<std::streamsize>(pixels.size()));
}

PipelineConfig resolve_config(const std::string& mode_flag, const std::string& config_path) {
  std::optional<ScanMode> mode;
  if (mode_flag == "automotive") mode = ScanMode::automotive;
  else if (mode_flag == "scanning") mode = ScanMode::scanning;
  else if (!mode_flag.empty()) {
    throw MalformedFileError("--mode must be automotive or scanning, got '" + mode_flag + "'");
  }
  if (config_path.empty()) {
    if (!mode) throw MalformedFileError("either --mode or --config is required");
    return default_config(*mode);
  }
  PipelineConfig cfg = load_pipeline_config(config_path);
  if (mode && cfg.mode != *mode) {
    throw MalformedFileError("--mode disagrees with the config file's mode");
  }
  return cfg;
}

// Loads a scan file as weighted points: .prs polar scans are thresholded
// first, .csv point scans are used as-is.
std::pair<std::vector<WeightedPoint>, double> load_scan_points(const fs::path& path,
                                                               const PreprocessConfig& pp) {
  if (path.extension() == ".prs") {
    const PointScan scan = threshold_polar(load_polar_scan(path), pp);
    return {to_weighted_points(scan), scan.timestamp};
  }
  const PointScan scan = load_point_scan(path);
  return {to_weighted_points(scan), scan.timestamp};
}

int cmd_odom(const std::string& mode_flag, const std::string& config_path,
             const fs::path& input_dir, const fs::path& output, std::string log_path) {
  PipelineConfig cfg = resolve_config(mode_flag, config_path);
  OdometryOutput out;
  if (cfg.mode == ScanMode::scanning) {
    std::vector<PolarScan> scans;
    for (const auto& f : sorted_files(input_dir, ".prs")) {
      PolarScan s = load_polar_scan(f);
      if (!scans.empty()) check_monotonic(scans.back().timestamp, s.timestamp, f);
      scans.push_back(std::move(s));
    }
    if (cfg.downsample_hz) scans = downsample(scans, *cfg.downsample_hz);
    out = run_odometry(scans, cfg);
  } else {
    std::vector<PointScan> scans;
    for (const auto& f : sorted_files(input_dir, ".csv")) {
      PointScan s = load_point_scan(f);
      if (!scans.empty()) check_monotonic(scans.back().timestamp, s.timestamp, f);
      scans.push_back(std::move(s));
    }
    if (cfg.downsample_hz) scans = downsample(scans, *cfg.downsample_hz);
    out = run_odometry(scans, cfg);
  }
  write_trajectory(output, out.trajectory);
  if (log_path.empty()) log_path = fs::path(output).replace_extension(".jsonl").string();
  write_frame_log(log_path, out);
  std::cout << "frames: " << out.trajectory.size() << "  escalations: " << out.escalation_count
            << "  fallbacks: " << out.failure_count << "\n";
  std::cout << "trajectory: " << output.string() << "\nlog: " << log_path << "\n";
  return 0;
}

int cmd_eval(const fs::path& estimate_path, const fs::path& gt_path, const std::string& metric,
             double downsample_hz, const std::string& out_csv, double tolerance,
             bool interpolate) {
  Trajectory est = load_trajectory(estimate_path);
  const Trajectory gt = load_trajectory(gt_path);
  if (downsample_hz > 0.0) est.poses = downsample(est.poses, downsample_hz);
  EvalConfig cfg;
  cfg.time_tolerance = tolerance;
  cfg.interpolate = interpolate;

  std::ofstream csv;
  if (!out_csv.empty()) {
    csv.open(out_csv);
    if (!csv) throw MalformedFileError(out_csv + ": cannot open for writing");
  }

  if (metric == "kitti") {
    const EvalReport r = kitti_errors(est, gt, cfg);
    std::cout << "segment  trans(%)  rot(deg/m)  samples\n";
    for (const auto& seg : r.segment_table) {
      std::printf("%6.0fm  %8.4f  %10.6f  %7d\n", seg.length, seg.trans_percent,
                  seg.rot_deg_per_m, seg.sample_count);
    }
    std::printf("overall  %8.4f  %10.6f\n", r.translational_error_percent,
                r.rotational_error_deg_per_m);
    if (csv.is_open()) {
      csv << "length_m,trans_percent,rot_deg_per_m,samples\n";
      for (const auto& seg : r.segment_table) {
        csv << seg.length << ',' << seg.trans_percent << ',' << seg.rot_deg_per_m << ','
            << seg.sample_count << "\n";
      }
      csv << "overall," << r.translational_error_percent << ','
          << r.rotational_error_deg_per_m << ",\n";
    }
  } else if (metric == "per-meter") {
    const auto [t, rot] = per_meter_error(est, gt, cfg);
    std::printf("per-meter  trans: %.4f %%  rot: %.6f deg/m\n", t, rot);
    if (csv.is_open()) {
      csv << "trans_percent,rot_deg_per_m\n" << t << ',' << rot << "\n";
    }
  } else if (metric == "per-frame") {
    const FrameErrors fe = frame_errors(est, gt, cfg);
    std::printf("per-frame  trans: %.4f m/frame  rot: %.4f deg/frame  (%zu frames)\n",
                fe.mean_translation_m, fe.mean_rotation_deg, fe.translation_m.size());
    if (csv.is_open()) {
      csv << "frame,translation_m,rotation_deg\n";
      for (std::size_t i = 0; i < fe.translation_m.size(); ++i) {
        csv << i + 1 << ',' << fe.translation_m[i] << ',' << fe.rotation_deg[i] << "\n";
      }
    }
  } else {
    throw MalformedFileError("--metric must be kitti, per-meter, or per-frame");
  }
  return 0;
}

int cmd_synth(const fs::path& world_path, const fs::path& traj_path, const std::string& mode_str,
              const std::string& noise_path, std::uint64_t seed, const fs::path& out_dir) {
  const WorldSpec world = load_world(world_path);
  const Trajectory traj = load_trajectory(traj_path);
  ScanMode mode;
  if (mode_str == "automotive") mode = ScanMode::automotive;
  else if (mode_str == "scanning") mode = ScanMode::scanning;
  else throw MalformedFileError("--mode must be automotive or scanning");
  SynthConfig synth;
  if (!noise_path.empty()) synth = load_synth_config(noise_path);
  const SyntheticScene scene = synthesize_scene(world, traj, mode, synth.noise, seed,
                                                synth.sensor);
  fs::create_directories(out_dir);
  char name[32];
  if (mode == ScanMode::automotive) {
    for (std::size_t k = 0; k < scene.point_scans.size(); ++k) {
      if (scene.point_scans[k].points.empty()) {
        // The CSV format carries the timestamp in its rows, so an empty
        // scan has no representation.
        std::cerr << "warning: frame " << k << " saw no targets, skipping\n";
        continue;
      }
      std::snprintf(name, sizeof(name), "scan_%06zu.csv", k);
      write_point_scan(out_dir / name, scene.point_scans[k]);
    }
  } else {
    for (std::size_t k = 0; k < scene.polar_scans.size(); ++k) {
      std::snprintf(name, sizeof(name), "scan_%06zu.prs", k);
      write_polar_scan(out_dir / name, scene.polar_scans[k]);
    }
  }
  write_trajectory(out_dir / "ground_truth.csv", scene.ground_truth);
  std::cout << "wrote " << traj.size() << " scans to " << out_dir.string() << "\n";
  return 0;
}

int viz_scan(const fs::path& scan_path, double threshold, double pixel_size,
             const fs::path& out) {
  PreprocessConfig pp;
  pp.threshold = threshold;
  const PointScan scan = threshold_polar(load_polar_scan(scan_path), pp);
  const double extent = pp.max_range_scanning;
  const int size = static_cast<int>(std::ceil(2.0 * extent / pixel_size));
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(size) * size, 0);
  for (const auto& pt : scan.points) {
    const int px = static_cast<int>((pt.position.x() + extent) / pixel_size);
    const int py = static_cast<int>((extent - pt.position.y()) / pixel_size);
    if (px < 0 || px >= size || py < 0 || py >= size) continue;
    auto& cell = pixels[static_cast<std::size_t>(py) * size + px];
    cell = std::max<std::uint8_t>(cell,
                                  static_cast<std::uint8_t>(pt.power.value_or(1.0) * 255.0));
  }
  write_pgm(out, pixels, size, size);
  std::cout << "wrote " << out.string() << " (" << size << "x" << size << ", "
            << scan.points.size() << " points)\n";
  return 0;
}

int viz_ndt_map(const fs::path& scan_path, double threshold, double grid_size, double shift,
                double pixel_size, const fs::path& out) {
  PreprocessConfig pp;
  pp.threshold = threshold;
  const auto [points, ts] = load_scan_points(scan_path, pp);
  Submap sub;
  sub.frame_timestamp = ts;
  sub.points = points;
  sub.scan_count = 1;
  NdtConfig cfg;
  cfg.grid_size = grid_size;
  cfg.shift_s = shift;
  const NdtMap map = build_ndt_map(sub, cfg);

  Vec2 lo{1e18, 1e18};
  Vec2 hi{-1e18, -1e18};
  for (const auto& layer : map.layers) {
    for (const auto& [idx, cell] : layer) {
      lo = lo.cwiseMin(cell.mean - Vec2{grid_size, grid_size});
      hi = hi.cwiseMax(cell.mean + Vec2{grid_size, grid_size});
    }
  }
  const int width = static_cast<int>(std::ceil((hi.x() - lo.x()) / pixel_size));
  const int height = static_cast<int>(std::ceil((hi.y() - lo.y()) / pixel_size));
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height, 0);
  for (int py = 0; py < height; ++py) {
    for (int px = 0; px < width; ++px) {
      const Vec2 p{lo.x() + (px + 0.5) * pixel_size, hi.y() - (py + 0.5) * pixel_size};
      double best = 0.0;
      for (int layer = 0; layer < NdtMap::kLayers; ++layer) {
        if (const NdtCell* cell = map.cell_at(layer, p)) {
          const Vec2 d = p - cell->mean;
          best = std::max(best, std::exp(-0.5 * d.dot(cell->cov_inverse * d)));
        }
      }
      pixels[static_cast<std::size_t>(py) * width + px] =
          static_cast<std::uint8_t>(best * 255.0);
    }
  }
  write_pgm(out, pixels, width, height);
  std::cout << "wrote " << out.string() << " (" << width << "x" << height << ")\n";
  return 0;
}

int viz_cost_surface(const fs::path& ref_path, const fs::path& mov_path, const std::string& axes,
                     double threshold, double grid_size, double shift, double half_extent,
                     double half_angle_deg, int steps, const fs::path& out) {
  PreprocessConfig pp;
  pp.threshold = threshold;
  const auto [ref_points, ref_ts] = load_scan_points(ref_path, pp);
  const auto [mov_points, mov_ts] = load_scan_points(mov_path, pp);
  Submap sub;
  sub.frame_timestamp = ref_ts;
  sub.points = ref_points;
  sub.scan_count = 1;
  NdtConfig cfg;
  cfg.grid_size = grid_size;
  cfg.shift_s = shift;
  const NdtMap map = build_ndt_map(sub, cfg);

  std::ofstream os(out);
  if (!os) throw MalformedFileError(out.string() + ": cannot open for writing");
  const double half_angle = half_angle_deg * kPi / 180.0;
  if (axes == "x-theta") {
    os << "x_m,theta_rad,cost\n";
    for (int i = -steps; i <= steps; ++i) {
      for (int j = -steps; j <= steps; ++j) {
        const Pose2 pose{half_extent * i / steps, 0.0, half_angle * j / steps};
        os << pose.x << ',' << pose.theta << ','
           << -ndt_score(map, mov_points, pose, shift) << "\n";
      }
    }
  } else if (axes == "x-y") {
    os << "x_m,y_m,cost\n";
    for (int i = -steps; i <= steps; ++i) {
      for (int j = -steps; j <= steps; ++j) {
        const Pose2 pose{half_extent * i / steps, half_extent * j / steps, 0.0};
        os << pose.x << ',' << pose.y << ',' << -ndt_score(map, mov_points, pose, shift)
           << "\n";
      }
    }
  } else {
    throw MalformedFileError("--axes must be x-theta or x-y");
  }
  std::cout << "wrote " << out.string() << " (" << (2 * steps + 1) << "x" << (2 * steps + 1)
            << " lattice)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D radar odometry: NDT scan matching for automotive and scanning radar"};
  app.require_subcommand(1);
  parse_thread_cap();

  // odom
  auto* odom = app.add_subcommand("odom", "Run odometry over a directory of scans");
  std::string odom_mode, odom_config, odom_log;
  fs::path odom_input, odom_output;
  odom->add_option("--mode", odom_mode, "automotive|scanning");
  odom->add_option("--config", odom_config, "pipeline config file (key = value)");
  odom->add_option("--input-dir", odom_input, "directory of scan files (.csv or .prs)")
      ->required();
  odom->add_option("--output", odom_output, "output trajectory CSV path")->required();
  odom->add_option("--log", odom_log, "per-frame JSON-lines log path (default: output.jsonl)");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a trajectory against ground truth");
  fs::path eval_est, eval_gt;
  std::string eval_metric = "kitti", eval_out;
  double eval_hz = 0.0, eval_tol = 0.05;
  bool eval_interp = false;
  eval->add_option("--estimate", eval_est, "estimated trajectory CSV")->required();
  eval->add_option("--ground-truth", eval_gt, "ground-truth trajectory CSV")->required();
  eval->add_option("--metric", eval_metric, "kitti|per-meter|per-frame (default kitti)");
  eval->add_option("--downsample-hz", eval_hz, "downsample the estimate to this rate (Hz)");
  eval->add_option("--out", eval_out, "also write the report as CSV");
  eval->add_option("--tolerance", eval_tol, "timestamp association tolerance (s, default 0.05)");
  eval->add_flag("--interpolate", eval_interp, "linear pose interpolation instead of nearest");

  // synth
  auto* synth = app.add_subcommand("synth", "Synthesize scans from a world and trajectory");
  fs::path synth_world, synth_traj, synth_out;
  std::string synth_mode, synth_noise;
  std::uint64_t synth_seed = 0;
  synth->add_option("--world", synth_world, "world spec file")->required();
  synth->add_option("--trajectory", synth_traj, "ground-truth trajectory CSV")->required();
  synth->add_option("--mode", synth_mode, "automotive|scanning")->required();
  synth->add_option("--noise", synth_noise, "synthesis config file (noise.* / sensor.* keys)");
  synth->add_option("--seed", synth_seed, "RNG seed (default 0)");
  synth->add_option("--out-dir", synth_out, "output directory")->required();

  // viz
  auto* viz = app.add_subcommand("viz", "Export rasters and cost surfaces");
  fs::path viz_scan_path, viz_ndt_path, viz_ref, viz_mov, viz_out;
  bool viz_cost = false;
  std::string viz_axes = "x-theta";
  double viz_threshold = 0.333, viz_grid = 3.75, viz_shift = 0.0, viz_pixel = 0.5;
  double viz_half_extent = 3.0, viz_half_angle = 10.0;
  int viz_steps = 30;
  viz->add_option("--scan", viz_scan_path, "polar scan (.prs): raster the thresholded scan");
  viz->add_option("--ndt-map", viz_ndt_path, "scan file: raster its ND map");
  viz->add_flag("--cost-surface", viz_cost, "dump an ndt_score lattice as CSV");
  viz->add_option("--ref", viz_ref, "reference scan for --cost-surface");
  viz->add_option("--mov", viz_mov, "moving scan for --cost-surface");
  viz->add_option("--axes", viz_axes, "cost-surface axes: x-theta|x-y (default x-theta)");
  viz->add_option("--threshold", viz_threshold, "power threshold in [0,1] (default 0.333)");
  viz->add_option("--grid-size", viz_grid, "NDT grid size in meters (default 3.75)");
  viz->add_option("--shift", viz_shift, "power shift s in [0,1] (default 0)");
  viz->add_option("--pixel-size", viz_pixel, "raster resolution in meters/pixel (default 0.5)");
  viz->add_option("--half-extent", viz_half_extent, "cost-surface half range in meters");
  viz->add_option("--half-angle-deg", viz_half_angle, "cost-surface half range in degrees");
  viz->add_option("--steps", viz_steps, "cost-surface half step count (default 30)");
  viz->add_option("--out", viz_out, "output file (.pgm or .csv)")->required();

  try {
    app.parse(argc, argv);
    if (odom->parsed()) {
      return cmd_odom(odom_mode, odom_config, odom_input, odom_output, odom_log);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_est, eval_gt, eval_metric, eval_hz, eval_out, eval_tol, eval_interp);
    }
    if (synth->parsed()) {
      return cmd_synth(synth_world, synth_traj, synth_mode, synth_noise, synth_seed, synth_out);
    }
    if (viz->parsed()) {
      if (viz_cost) {
        if (viz_ref.empty() || viz_mov.empty()) {
          std::cerr << "error: --cost-surface needs --ref and --mov\n";
          return 1;
        }
        return viz_cost_surface(viz_ref, viz_mov, viz_axes, viz_threshold, viz_grid, viz_shift,
                                viz_half_extent, viz_half_angle, viz_steps, viz_out);
      }
      if (!viz_scan_path.empty()) {
        return viz_scan(viz_scan_path, viz_threshold, viz_pixel, viz_out);
      }
      if (!viz_ndt_path.empty()) {
        return viz_ndt_map(viz_ndt_path, viz_threshold, viz_grid, viz_shift, viz_pixel, viz_out);
      }
      std::cerr << "error: viz needs one of --scan, --ndt-map, --cost-surface\n";
      return 1;
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
