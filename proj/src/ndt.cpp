#include "rodom/ndt.hpp"

#include <cmath>
#include <vector>

#include "rodom/errors.hpp"

namespace rodom {

double shifted_weight(std::optional<double> power, double s) {
  if (!power) return 1.0;
  return std::max(*power - s, 0.0);
}

namespace {

// Degenerate cells (all mass at one point with zero measurement covariance)
// cannot be inverted and are dropped.
constexpr double kDegenerateEigenvalue = 1e-12;

std::optional<NdtCell> make_cell(const std::vector<const WeightedPoint*>& pts, double s,
                                 const NdtConfig& cfg) {
  double mass = 0.0;
  Vec2 mean = Vec2::Zero();
  int count = 0;
  for (const auto* p : pts) {
    const double w = shifted_weight(p->weight, s);
    if (w <= 0.0) continue;
    mass += w;
    mean += w * p->position;
    ++count;
  }
  if (count < cfg.min_points_per_cell || mass <= 0.0) return std::nullopt;
  mean /= mass;

  Mat2 cov = Mat2::Zero();
  for (const auto* p : pts) {
    const double w = shifted_weight(p->weight, s);
    if (w <= 0.0) continue;
    const Vec2 d = p->position - mean;
    cov += w * (d * d.transpose() + p->cov);
  }
  cov = symmetrized(cov / mass);

  Eigen::SelfAdjointEigenSolver<Mat2> eig(cov);
  const double lam_small = eig.eigenvalues()(0);
  const double lam_large = eig.eigenvalues()(1);
  if (lam_large <= kDegenerateEigenvalue) return std::nullopt;
  const double floor = lam_large / cfg.cov_condition_cap;
  if (lam_small < floor) {
    cov = symmetrized(eig.eigenvectors() * Eigen::Vector2d(floor, lam_large).asDiagonal() *
                      eig.eigenvectors().transpose());
  }

  NdtCell cell;
  cell.mean = mean;
  cell.cov = cov;
  cell.cov_inverse = cov.inverse();
  cell.weight_mass = mass;
  cell.point_count = count;
  return cell;
}

}  // namespace

NdtMap build_ndt_map(const Submap& submap, const NdtConfig& cfg) {
  NdtMap map;
  map.grid_size = cfg.grid_size;
  map.source_point_count = static_cast<int>(submap.points.size());

  for (int layer = 0; layer < NdtMap::kLayers; ++layer) {
    std::unordered_map<CellIndex, std::vector<const WeightedPoint*>, CellIndexHash> buckets;
    for (const auto& pt : submap.points) {
      if (shifted_weight(pt.weight, cfg.shift_s) <= 0.0) continue;
      buckets[NdtMap::index_of(pt.position, layer, cfg.grid_size)].push_back(&pt);
    }
    for (const auto& [idx, pts] : buckets) {
      if (auto cell = make_cell(pts, cfg.shift_s, cfg)) {
        map.layers[layer].emplace(idx, *cell);
      }
    }
  }

  bool any = false;
  for (const auto& layer : map.layers) any = any || !layer.empty();
  if (!any) {
    throw EmptyMapError("build_ndt_map: no cell reached " +
                        std::to_string(cfg.min_points_per_cell) + " points at g=" +
                        std::to_string(cfg.grid_size));
  }
  return map;
}

}  // namespace rodom
