#include "rodom/ingest.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

// The polar scan format is little-endian on disk and read/written natively.
static_assert(std::endian::native == std::endian::little);

namespace rodom {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void check_unit_interval(double v, const std::string& what, const std::filesystem::path& path) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ValueOutOfRangeError(path.string() + ": " + what + " = " + format_double(v) +
                               " outside [0,1]");
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw MalformedFileError("");
    return v;
  } catch (const std::exception&) {
    throw MalformedFileError(path.string() + ": cannot parse number '" + s + "'");
  }
}

template <typename T>
void write_raw(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is, const std::filesystem::path& path) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw MalformedFileError(path.string() + ": truncated file");
  return v;
}

}  // namespace

Mat2 polar_point_covariance(double range, double azimuth, const PolarAccuracy& acc) {
  const Mat2 g = rotation_matrix(azimuth);
  Mat2 d = Mat2::Zero();
  d(0, 0) = acc.range_sigma * acc.range_sigma;
  d(1, 1) = range * range * acc.azimuth_sigma * acc.azimuth_sigma;
  return symmetrized(g * d * g.transpose());
}

PolarScan load_polar_scan(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MalformedFileError(path.string() + ": cannot open");
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "PRS1", 4) != 0) {
    throw MalformedFileError(path.string() + ": bad magic, expected PRS1");
  }
  PolarScan scan;
  scan.timestamp = read_raw<double>(is, path);
  scan.azimuth_count = read_raw<std::uint32_t>(is, path);
  scan.range_bin_count = read_raw<std::uint32_t>(is, path);
  scan.range_resolution = read_raw<double>(is, path);
  if (scan.azimuth_count == 0 || scan.range_bin_count == 0 || scan.range_resolution <= 0.0) {
    throw MalformedFileError(path.string() + ": bad header dimensions");
  }
  const std::size_t n = static_cast<std::size_t>(scan.azimuth_count) * scan.range_bin_count;
  scan.power.resize(n);
  is.read(reinterpret_cast<char*>(scan.power.data()), static_cast<std::streamsize>(n * 4));
  if (!is) throw MalformedFileError(path.string() + ": truncated power matrix");
  for (float p : scan.power) check_unit_interval(p, "power", path);
  return scan;
}

void write_polar_scan(const std::filesystem::path& path, const PolarScan& scan) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw MalformedFileError(path.string() + ": cannot open for writing");
  os.write("PRS1", 4);
  write_raw(os, scan.timestamp);
  write_raw(os, scan.azimuth_count);
  write_raw(os, scan.range_bin_count);
  write_raw(os, scan.range_resolution);
  os.write(reinterpret_cast<const char*>(scan.power.data()),
           static_cast<std::streamsize>(scan.power.size() * 4));
  if (!os) throw MalformedFileError(path.string() + ": write failed");
}

namespace {
constexpr const char* kPointScanHeader = "timestamp_s,x_m,y_m,range_m,azimuth_rad,vr_mps,power";
constexpr const char* kTrajectoryHeader = "timestamp_s,x_m,y_m,theta_rad";
}  // namespace

PointScan load_point_scan(const std::filesystem::path& path, const PolarAccuracy& acc) {
  std::ifstream is(path);
  if (!is) throw MalformedFileError(path.string() + ": cannot open");
  std::string line;
  if (!std::getline(is, line)) throw MalformedFileError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kPointScanHeader) {
    throw MalformedFileError(path.string() + ": bad header, expected '" +
                             std::string(kPointScanHeader) + "'");
  }
  PointScan scan;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) {
      throw MalformedFileError(path.string() + ": expected 7 fields, got " +
                               std::to_string(f.size()));
    }
    const double ts = parse_double(f[0], path);
    if (first) {
      scan.timestamp = ts;
      first = false;
    }
    RadarPoint pt;
    pt.position = {parse_double(f[1], path), parse_double(f[2], path)};
    pt.range = parse_double(f[3], path);
    if (pt.range < 0.0) {
      throw ValueOutOfRangeError(path.string() + ": negative range " + f[3]);
    }
    pt.azimuth = parse_double(f[4], path);
    if (!f[5].empty()) pt.radial_velocity = parse_double(f[5], path);
    if (!f[6].empty()) {
      const double p = parse_double(f[6], path);
      check_unit_interval(p, "power", path);
      pt.power = p;
    }
    pt.cov = polar_point_covariance(pt.range, pt.azimuth, acc);
    scan.points.push_back(pt);
  }
  if (first) throw MalformedFileError(path.string() + ": point scan has no rows");
  return scan;
}

void write_point_scan(const std::filesystem::path& path, const PointScan& scan) {
  if (scan.points.empty()) {
    throw MalformedFileError(path.string() + ": refusing to write empty point scan");
  }
  std::ofstream os(path);
  if (!os) throw MalformedFileError(path.string() + ": cannot open for writing");
  os << kPointScanHeader << "\n";
  for (const auto& pt : scan.points) {
    os << format_double(scan.timestamp) << ',' << format_double(pt.position.x()) << ','
       << format_double(pt.position.y()) << ',' << format_double(pt.range) << ','
       << format_double(pt.azimuth) << ',';
    if (pt.radial_velocity) os << format_double(*pt.radial_velocity);
    os << ',';
    if (pt.power) os << format_double(*pt.power);
    os << "\n";
  }
  if (!os) throw MalformedFileError(path.string() + ": write failed");
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw MalformedFileError(path.string() + ": cannot open");
  std::string line;
  if (!std::getline(is, line)) throw MalformedFileError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrajectoryHeader) {
    throw MalformedFileError(path.string() + ": bad header, expected '" +
                             std::string(kTrajectoryHeader) + "'");
  }
  Trajectory traj;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) {
      throw MalformedFileError(path.string() + ": expected 4 fields, got " +
                               std::to_string(f.size()));
    }
    TimedPose tp;
    tp.timestamp = parse_double(f[0], path);
    tp.pose = {parse_double(f[1], path), parse_double(f[2], path), parse_double(f[3], path)};
    if (!traj.poses.empty() && tp.timestamp <= traj.poses.back().timestamp) {
      throw NonMonotonicTimeError(path.string() + ": timestamps not strictly increasing at t=" +
                                  format_double(tp.timestamp));
    }
    traj.poses.push_back(tp);
  }
  return traj;
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& trajectory) {
  std::ofstream os(path);
  if (!os) throw MalformedFileError(path.string() + ": cannot open for writing");
  os << kTrajectoryHeader << "\n";
  for (const auto& tp : trajectory.poses) {
    os << format_double(tp.timestamp) << ',' << format_double(tp.pose.x) << ','
       << format_double(tp.pose.y) << ',' << format_double(tp.pose.theta) << "\n";
  }
  if (!os) throw MalformedFileError(path.string() + ": write failed");
}

WorldSpec load_world(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw MalformedFileError(path.string() + ": cannot open");
  WorldSpec world;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::string kind;
    if (!(ss >> kind)) continue;
    auto want = [&](int n) {
      std::vector<double> v(n);
      for (int i = 0; i < n; ++i) {
        if (!(ss >> v[i])) {
          throw MalformedFileError(path.string() + ":" + std::to_string(line_no) +
                                   ": bad arguments for '" + kind + "'");
        }
      }
      double trailing;
      if (ss >> trailing) {
        throw MalformedFileError(path.string() + ":" + std::to_string(line_no) +
                                 ": too many arguments for '" + kind + "'");
      }
      return v;
    };
    if (kind == "point") {
      const auto v = want(3);
      check_unit_interval(v[2], "reflectivity", path);
      world.points.push_back({{v[0], v[1]}, v[2]});
    } else if (kind == "wall") {
      const auto v = want(5);
      check_unit_interval(v[4], "reflectivity", path);
      world.walls.push_back({{v[0], v[1]}, {v[2], v[3]}, v[4]});
    } else if (kind == "mover") {
      const auto v = want(5);
      check_unit_interval(v[4], "reflectivity", path);
      world.movers.push_back({{v[0], v[1]}, {v[2], v[3]}, v[4]});
    } else {
      throw MalformedFileError(path.string() + ":" + std::to_string(line_no) +
                               ": unknown primitive '" + kind + "'");
    }
  }
  return world;
}

void write_world(const std::filesystem::path& path, const WorldSpec& world) {
  std::ofstream os(path);
  if (!os) throw MalformedFileError(path.string() + ": cannot open for writing");
  for (const auto& p : world.points) {
    os << "point " << format_double(p.position.x()) << ' ' << format_double(p.position.y()) << ' '
       << format_double(p.reflectivity) << "\n";
  }
  for (const auto& w : world.walls) {
    os << "wall " << format_double(w.a.x()) << ' ' << format_double(w.a.y()) << ' '
       << format_double(w.b.x()) << ' ' << format_double(w.b.y()) << ' '
       << format_double(w.reflectivity) << "\n";
  }
  for (const auto& m : world.movers) {
    os << "mover " << format_double(m.position.x()) << ' ' << format_double(m.position.y()) << ' '
       << format_double(m.velocity.x()) << ' ' << format_double(m.velocity.y()) << ' '
       << format_double(m.reflectivity) << "\n";
  }
  if (!os) throw MalformedFileError(path.string() + ": write failed");
}

}  // namespace rodom
