#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <unordered_map>

#include "rodom/submap.hpp"

namespace rodom {

struct NdtConfig {
  double grid_size = 3.0;  // m, g
  double shift_s = 0.0;    // power shift, [0,1]
  int min_points_per_cell = 3;
  double cov_condition_cap = 1000.0;
};

/// Per-cell weighted Gaussian statistics.
struct NdtCell {
  Vec2 mean = Vec2::Zero();
  Mat2 cov = Mat2::Zero();
  Mat2 cov_inverse = Mat2::Zero();
  double weight_mass = 0.0;
  int point_count = 0;
};

struct CellIndex {
  std::int32_t ix = 0;
  std::int32_t iy = 0;
  bool operator==(const CellIndex&) const = default;
};

struct CellIndexHash {
  std::size_t operator()(const CellIndex& c) const {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.ix))
                                       << 32) |
                                      static_cast<std::uint32_t>(c.iy));
  }
};

/// Four half-cell-offset grid layers of Gaussian cells. Immutable once built;
/// safe for concurrent read-only scoring.
struct NdtMap {
  static constexpr int kLayers = 4;
  using Layer = std::unordered_map<CellIndex, NdtCell, CellIndexHash>;

  double grid_size = 0.0;
  std::array<Layer, kLayers> layers;
  int source_point_count = 0;

  static Vec2 layer_offset(int layer, double grid_size) {
    return {(layer & 1) ? grid_size / 2.0 : 0.0, (layer & 2) ? grid_size / 2.0 : 0.0};
  }
  static CellIndex index_of(const Vec2& p, int layer, double grid_size) {
    const Vec2 off = layer_offset(layer, grid_size);
    return {static_cast<std::int32_t>(std::floor((p.x() - off.x()) / grid_size)),
            static_cast<std::int32_t>(std::floor((p.y() - off.y()) / grid_size))};
  }
  const NdtCell* cell_at(int layer, const Vec2& p) const {
    const auto it = layers[layer].find(index_of(p, layer, grid_size));
    return it == layers[layer].end() ? nullptr : &it->second;
  }
};

/// Power shift of Eq.-style weighting: absent power weighs 1.0 (sensors
/// without power report), otherwise max(power - s, 0).
double shifted_weight(std::optional<double> power, double s);

/// Same shift applied to a stored raw weight.
inline double shifted_weight(double raw_weight, double s) {
  return std::max(raw_weight - s, 0.0);
}

/// Builds the weighted probabilistic ND map. Each cell with at least
/// min_points_per_cell positively-weighted points gets a weighted mean and a
/// covariance that absorbs the per-point covariances; the covariance is
/// regularized by flooring the small eigenvalue at lambda_max/cov_condition_cap.
/// Throws EmptyMapError when no cell qualifies (caller escalates grid size).
NdtMap build_ndt_map(const Submap& submap, const NdtConfig& cfg);

}  // namespace rodom
