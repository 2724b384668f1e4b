#include <random>

#include "doctest.h"
#include "rodom/ndt.hpp"
#include "support/scenes.hpp"

using namespace rodom;

namespace {

Submap submap_of(std::initializer_list<WeightedPoint> pts) {
  Submap map;
  map.points = pts;
  map.scan_count = 1;
  return map;
}

const NdtCell& single_cell(const NdtMap& map, int layer = 0) {
  REQUIRE(map.layers[layer].size() == 1);
  return map.layers[layer].begin()->second;
}

}  // namespace

TEST_CASE("shifted_weight follows the power shift with clamping") {
  CHECK(shifted_weight(std::optional<double>(0.5), 0.333) == doctest::Approx(0.167));
  CHECK(shifted_weight(std::optional<double>(0.2), 0.333) == 0.0);
  CHECK(shifted_weight(std::nullopt, 0.333) == 1.0);
  CHECK(shifted_weight(std::nullopt, 0.9) == 1.0);
  CHECK(shifted_weight(1.0, 0.25) == doctest::Approx(0.75));
}

TEST_CASE("weighted mean of a single cell") {
  NdtConfig cfg;
  cfg.grid_size = 10.0;
  const Submap map_in = submap_of({{{0.0, 0.0}, 1.0, Mat2::Identity() * 0.01},
                                   {{2.0, 0.0}, 1.0, Mat2::Identity() * 0.01},
                                   {{1.0, 1.0}, 1.0, Mat2::Identity() * 0.01}});
  const NdtMap map = build_ndt_map(map_in, cfg);
  const NdtCell& cell = single_cell(map);
  CHECK(cell.mean.x() == doctest::Approx(1.0));
  CHECK(cell.mean.y() == doctest::Approx(1.0 / 3.0));
  CHECK(cell.point_count == 3);
  CHECK(cell.weight_mass == doctest::Approx(3.0));
}

TEST_CASE("unequal weights pull the mean") {
  NdtConfig cfg;
  cfg.grid_size = 10.0;
  cfg.min_points_per_cell = 2;
  const Submap map_in = submap_of(
      {{{0.0, 0.0}, 1.0, Mat2::Identity() * 0.01}, {{4.0, 0.0}, 3.0, Mat2::Identity() * 0.01}});
  const NdtMap map = build_ndt_map(map_in, cfg);
  const NdtCell& cell = single_cell(map);
  CHECK(cell.mean.x() == doctest::Approx(3.0));
  CHECK(cell.mean.y() == doctest::Approx(0.0));
}

TEST_CASE("collinear points are regularized to the condition cap") {
  NdtConfig cfg;
  cfg.grid_size = 10.0;
  const Submap map_in = submap_of({{{0.0, 0.0}, 1.0, Mat2::Zero()},
                                   {{1.0, 0.0}, 1.0, Mat2::Zero()},
                                   {{2.0, 0.0}, 1.0, Mat2::Zero()}});
  const NdtMap map = build_ndt_map(map_in, cfg);
  const NdtCell& cell = single_cell(map);
  Eigen::SelfAdjointEigenSolver<Mat2> eig(cell.cov);
  const double cond = eig.eigenvalues()(1) / eig.eigenvalues()(0);
  CHECK(cond == doctest::Approx(1000.0).epsilon(1e-9));
  // x variance of {0,1,2} with population divisor: 2/3.
  CHECK(eig.eigenvalues()(1) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("degenerate single-position cells are dropped") {
  NdtConfig cfg;
  cfg.grid_size = 10.0;
  const Submap map_in = submap_of({{{1.0, 1.0}, 1.0, Mat2::Zero()},
                                   {{1.0, 1.0}, 1.0, Mat2::Zero()},
                                   {{1.0, 1.0}, 1.0, Mat2::Zero()}});
  CHECK_THROWS_AS(build_ndt_map(map_in, cfg), EmptyMapError);
}

TEST_CASE("empty map signals escalation") {
  NdtConfig cfg;
  cfg.grid_size = 2.0;
  // Three isolated points, never 3 in one cell.
  const Submap map_in = submap_of({{{0.0, 0.0}, 1.0, Mat2::Identity()},
                                   {{10.0, 0.0}, 1.0, Mat2::Identity()},
                                   {{0.0, 10.0}, 1.0, Mat2::Identity()}});
  CHECK_THROWS_AS(build_ndt_map(map_in, cfg), EmptyMapError);
}

TEST_CASE("cell statistics match the brute-force weighted oracle") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> pos(0.5, 9.5);
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Submap map_in;
    map_in.scan_count = 1;
    const int n = 3 + static_cast<int>(weight(rng) * 20);
    for (int i = 0; i < n; ++i) {
      map_in.points.push_back({{pos(rng), pos(rng)}, weight(rng), Mat2::Zero()});
    }
    NdtConfig cfg;
    cfg.grid_size = 100.0;  // single cell holds everything
    cfg.cov_condition_cap = 1e9;
    const NdtMap map = build_ndt_map(map_in, cfg);
    const NdtCell& cell = map.cell_at(0, {5.0, 5.0}) ? *map.cell_at(0, {5.0, 5.0})
                                                     : NdtCell{};
    // Brute-force population statistics with divisor sum(w).
    double sw = 0.0;
    Vec2 mean = Vec2::Zero();
    for (const auto& p : map_in.points) {
      sw += p.weight;
      mean += p.weight * p.position;
    }
    mean /= sw;
    Mat2 cov = Mat2::Zero();
    for (const auto& p : map_in.points) {
      const Vec2 d = p.position - mean;
      cov += p.weight * d * d.transpose();
    }
    cov /= sw;
    CHECK((cell.mean - mean).norm() <= 1e-12);
    CHECK((cell.cov - cov).norm() <= 1e-12);
    CHECK((cell.cov_inverse * cell.cov - Mat2::Identity()).norm() <= 1e-8);
  }
}

TEST_CASE("with unit weights and zero point covariance the cell equals sample stats") {
  const Submap map_in = submap_of({{{1.0, 2.0}, 1.0, Mat2::Zero()},
                                   {{3.0, 4.0}, 1.0, Mat2::Zero()},
                                   {{5.0, 0.0}, 1.0, Mat2::Zero()},
                                   {{2.0, 1.0}, 1.0, Mat2::Zero()}});
  NdtConfig cfg;
  cfg.grid_size = 50.0;
  const NdtMap map = build_ndt_map(map_in, cfg);
  const NdtCell* cell = map.cell_at(0, {1.0, 1.0});
  REQUIRE(cell != nullptr);
  const Vec2 mean{11.0 / 4.0, 7.0 / 4.0};
  CHECK((cell->mean - mean).norm() <= 1e-14);
}

TEST_CASE("point covariance inflates the cell covariance") {
  const Mat2 c = Vec2(0.5, 0.25).asDiagonal();
  const Submap with_c = submap_of(
      {{{0.0, 0.0}, 1.0, c}, {{1.0, 0.5}, 1.0, c}, {{2.0, 1.0}, 1.0, c}});
  const Submap without_c = submap_of(
      {{{0.0, 0.0}, 1.0, Mat2::Zero()}, {{1.0, 0.5}, 1.0, Mat2::Zero()},
       {{2.0, 1.0}, 1.0, Mat2::Zero()}});
  NdtConfig cfg;
  cfg.grid_size = 50.0;
  cfg.cov_condition_cap = 1e12;
  const Mat2 inflated = single_cell(build_ndt_map(with_c, cfg)).cov;
  const Mat2 plain = single_cell(build_ndt_map(without_c, cfg)).cov;
  CHECK((inflated - plain - c).norm() <= 1e-12);
}

TEST_CASE("every stored cell satisfies the structural invariants") {
  const auto points = testing::make_dense_scene(61);
  Submap map_in;
  map_in.points = points;
  map_in.scan_count = 1;
  NdtConfig cfg;
  cfg.grid_size = 3.75;
  cfg.shift_s = 0.333;
  const NdtMap map = build_ndt_map(map_in, cfg);
  int cells = 0;
  for (int layer = 0; layer < NdtMap::kLayers; ++layer) {
    const Vec2 off = NdtMap::layer_offset(layer, cfg.grid_size);
    for (const auto& [idx, cell] : map.layers[layer]) {
      ++cells;
      CHECK(cell.point_count >= cfg.min_points_per_cell);
      CHECK(cell.weight_mass > 0.0);
      Eigen::SelfAdjointEigenSolver<Mat2> eig(cell.cov);
      CHECK(eig.eigenvalues()(0) > 0.0);
      CHECK(eig.eigenvalues()(1) / eig.eigenvalues()(0) <= cfg.cov_condition_cap * (1 + 1e-9));
      CHECK((cell.cov_inverse * cell.cov - Mat2::Identity()).norm() <= 1e-8);
      // Mean lies inside the cell box expanded by the max per-point sigma.
      const double max_sigma = 0.3;  // dense-scene point sigma is 0.173
      CHECK(cell.mean.x() >= idx.ix * cfg.grid_size + off.x() - max_sigma);
      CHECK(cell.mean.x() <= (idx.ix + 1) * cfg.grid_size + off.x() + max_sigma);
      CHECK(cell.mean.y() >= idx.iy * cfg.grid_size + off.y() - max_sigma);
      CHECK(cell.mean.y() <= (idx.iy + 1) * cfg.grid_size + off.y() + max_sigma);
      // Index consistency with the floor rule.
      CHECK(map.cell_at(layer, cell.mean) == &cell);
    }
  }
  CHECK(cells > 50);
}

TEST_CASE("raising s never raises any cell's weight mass") {
  const auto points = testing::make_dense_scene(62);
  Submap map_in;
  map_in.points = points;
  map_in.scan_count = 1;
  NdtConfig low;
  low.grid_size = 3.75;
  low.shift_s = 0.1;
  NdtConfig high = low;
  high.shift_s = 0.4;
  const NdtMap map_low = build_ndt_map(map_in, low);
  const NdtMap map_high = build_ndt_map(map_in, high);
  for (int layer = 0; layer < NdtMap::kLayers; ++layer) {
    for (const auto& [idx, cell_high] : map_high.layers[layer]) {
      const auto it = map_low.layers[layer].find(idx);
      REQUIRE(it != map_low.layers[layer].end());
      CHECK(cell_high.weight_mass <= it->second.weight_mass + 1e-12);
    }
  }
}

TEST_CASE("power shifting narrows the distribution of a mixed cell") {
  // High-power cluster plus a low-power spread inside one cell.
  Submap map_in;
  map_in.scan_count = 1;
  std::mt19937_64 rng(63);
  std::normal_distribution<double> tight(0.0, 0.15);
  std::uniform_real_distribution<double> wide(-1.8, 1.8);
  for (int i = 0; i < 12; ++i) {
    map_in.points.push_back({{2.0 + tight(rng), 2.0 + tight(rng)}, 0.9, Mat2::Zero()});
  }
  for (int i = 0; i < 12; ++i) {
    map_in.points.push_back({{2.0 + wide(rng), 2.0 + wide(rng)}, 0.4, Mat2::Zero()});
  }
  NdtConfig base;
  base.grid_size = 4.0;
  base.shift_s = 0.0;
  NdtConfig shifted = base;
  shifted.shift_s = 0.333;
  const double det_base = single_cell(build_ndt_map(map_in, base)).cov.determinant();
  const double det_shifted = single_cell(build_ndt_map(map_in, shifted)).cov.determinant();
  CHECK(det_shifted <= det_base);
  CHECK(det_shifted < det_base * 0.5);  // clearly narrower, not marginal
}
