#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gqn/bev_scene.hpp"
#include "gqn/error.hpp"

namespace gqn::bev {
namespace {

double min_pairwise_distance(const PosEncoding& enc) {
  const std::size_t n = enc.height * enc.width;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < n; ++a) {
    auto pa = enc.cell(a);
    for (std::size_t b = a + 1; b < n; ++b) {
      auto pb = enc.cell(b);
      double acc = 0.0;
      for (std::size_t j = 0; j < enc.dim; ++j) acc += (pa[j] - pb[j]) * (pa[j] - pb[j]);
      best = std::min(best, acc);
    }
  }
  return std::sqrt(best);
}

SceneSpec single_box_scene() {
  SceneSpec spec;
  spec.height = 8;
  spec.width = 8;
  spec.dim = 4;
  spec.boxes.push_back({.center_row = 4, .center_col = 4, .extent_rows = 3, .extent_cols = 3});
  return spec;
}

TEST(SinusoidalEncoding, OriginIsSinZeroCosOne) {
  for (std::size_t d : {4u, 8u, 16u}) {
    auto enc = sinusoidal_encoding(3, 3, d, 100.0);
    auto p = enc.cell(0);
    for (std::size_t j = 0; j < d; ++j) EXPECT_EQ(p[j], j % 2 == 0 ? 0.0 : 1.0);
  }
}

TEST(SinusoidalEncoding, ChannelLayout) {
  // d = 8: half = 4 channels per axis, frequencies 100^0 and 100^(-1/2).
  auto enc = sinusoidal_encoding(4, 5, 8, 100.0);
  auto p = enc.cell(2 * 5 + 3);  // row 2, column 3
  EXPECT_DOUBLE_EQ(p[0], std::sin(3.0));
  EXPECT_DOUBLE_EQ(p[1], std::cos(3.0));
  EXPECT_DOUBLE_EQ(p[2], std::sin(0.3));
  EXPECT_DOUBLE_EQ(p[3], std::cos(0.3));
  EXPECT_DOUBLE_EQ(p[4], std::sin(2.0));
  EXPECT_DOUBLE_EQ(p[5], std::cos(2.0));
  EXPECT_DOUBLE_EQ(p[6], std::sin(0.2));
  EXPECT_DOUBLE_EQ(p[7], std::cos(0.2));
}

TEST(SinusoidalEncoding, EntriesBounded) {
  auto enc = sinusoidal_encoding(32, 32, 16, 100.0);
  for (double v : enc.values) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(SinusoidalEncoding, RejectsWidthNotDivisibleByFour) {
  EXPECT_THROW(sinusoidal_encoding(4, 4, 6, 100.0), ConfigError);
  EXPECT_THROW(sinusoidal_encoding(4, 4, 0, 100.0), ConfigError);
}

TEST(SinusoidalEncoding, DistinctOnSixteenBySixteen) {
  EXPECT_GT(min_pairwise_distance(sinusoidal_encoding(16, 16, 8, 100.0)), 0.0);
}

TEST(SinusoidalEncoding, InjectiveUpToSixtyFourSquared) {
  for (std::size_t d : {8u, 12u}) {
    EXPECT_GT(min_pairwise_distance(sinusoidal_encoding(64, 64, d, 100.0)), 0.0) << "d=" << d;
  }
}

TEST(GenerateScene, CleanSceneIsZeroOutsideBoxes) {
  auto spec = single_box_scene();
  spec.boxes.push_back({.center_row = 1, .center_col = 6, .extent_rows = 2, .extent_cols = 2});
  auto scene = generate_scene(spec);
  for (std::size_t k = 0; k < scene.grid.cells(); ++k) {
    bool any = false;
    for (std::size_t j = 0; j < spec.dim; ++j) any = any || scene.grid.features[k * spec.dim + j] != 0.0;
    if (!scene.truth.mask[k]) EXPECT_FALSE(any) << "cell " << k;
  }
}

TEST(GenerateScene, SameSpecSameGrid) {
  auto spec = single_box_scene();
  spec.clutter_density = 0.3;
  spec.noise = 0.2;
  spec.seed = 77;
  auto a = generate_scene(spec);
  auto b = generate_scene(spec);
  EXPECT_EQ(a.grid.features, b.grid.features);
  EXPECT_EQ(a.truth.mask, b.truth.mask);
  spec.seed = 78;
  EXPECT_NE(generate_scene(spec).grid.features, a.grid.features);
}

TEST(GenerateScene, ThreeByThreeBoxMarksNineCells) {
  auto scene = generate_scene(single_box_scene());
  EXPECT_EQ(scene.truth.object_cells(), 9u);
  EXPECT_EQ(scene.truth.mask[3 * 8 + 3], 1);
  EXPECT_EQ(scene.truth.mask[5 * 8 + 5], 1);
  EXPECT_EQ(scene.truth.mask[2 * 8 + 4], 0);
}

TEST(GenerateScene, OverlapCountsOnceAndLaterBoxWins) {
  auto spec = single_box_scene();
  spec.boxes[0].doppler = 1.0;
  spec.boxes.push_back({.center_row = 5, .center_col = 5, .extent_rows = 3, .extent_cols = 3,
                        .doppler = -2.0});
  auto scene = generate_scene(spec);
  // Two 3x3 boxes offset by (1,1) overlap on a 2x2 patch: 9 + 9 - 4.
  EXPECT_EQ(scene.truth.object_cells(), 14u);
  EXPECT_EQ(scene.truth.object_id[4 * 8 + 4], 1);
  EXPECT_EQ(scene.grid.cell(4, 4)[spec.dim - 1], -2.0);
  EXPECT_EQ(scene.grid.cell(3, 3)[spec.dim - 1], 1.0);
}

TEST(GenerateScene, ExplicitSignatureAndEvenExtent) {
  SceneSpec spec;
  spec.height = 6;
  spec.width = 6;
  spec.dim = 3;
  spec.boxes.push_back({.center_row = 1, .center_col = 1, .extent_rows = 2, .extent_cols = 4,
                        .signature = {0.5, -0.5, 9.0}, .doppler = 0.25});
  auto scene = generate_scene(spec);
  EXPECT_EQ(scene.truth.object_cells(), 8u);
  auto cell = scene.grid.cell(2, 3);
  EXPECT_EQ(scene.truth.mask[2 * 6 + 4], 0);
  EXPECT_EQ(scene.truth.mask[0 * 6 + 0], 0);
  EXPECT_EQ(cell[0], 0.5);
  EXPECT_EQ(cell[1], -0.5);
  EXPECT_EQ(cell[2], 0.25);
}

TEST(GenerateScene, RejectsInvalidSpecs) {
  auto spec = single_box_scene();
  spec.boxes[0].center_row = 7;
  EXPECT_THROW(generate_scene(spec), ConfigError);
  spec = single_box_scene();
  spec.clutter_density = 1.5;
  EXPECT_THROW(generate_scene(spec), ConfigError);
  spec = single_box_scene();
  spec.noise = -1.0;
  EXPECT_THROW(generate_scene(spec), ConfigError);
  spec = single_box_scene();
  spec.boxes[0].signature = {1.0};
  EXPECT_THROW(generate_scene(spec), ConfigError);
}

TEST(FlattenGrid, RowMajorIndexing) {
  BevGrid grid{2, 3, 4, 1.0, {}};
  for (std::size_t i = 0; i < 24; ++i) grid.features.push_back(static_cast<double>(i));
  auto enc = sinusoidal_encoding(2, 3, 4, 100.0);
  auto flat = flatten_grid(grid, enc);
  ASSERT_EQ(flat.size(), 6u);
  auto s = flat.state(5);
  auto cell = grid.cell(1, 2);
  EXPECT_TRUE(std::equal(s.begin(), s.end(), cell.begin()));
  for (std::size_t k = 0; k < 6; ++k) {
    auto p = flat.encoding(k);
    auto q = enc.cell(k);
    EXPECT_TRUE(std::equal(p.begin(), p.end(), q.begin()));
  }
  EXPECT_EQ(unflatten_grid(flat).features, grid.features);
}

TEST(FlattenGrid, DimensionMismatch) {
  BevGrid grid{2, 3, 4, 1.0, std::vector<double>(24, 0.0)};
  EXPECT_THROW(flatten_grid(grid, sinusoidal_encoding(2, 3, 8, 100.0)), ShapeError);
  EXPECT_THROW(flatten_grid(grid, sinusoidal_encoding(3, 2, 4, 100.0)), ShapeError);
}

TEST(FlattenGrid, PermutePairsMovesStateAndEncodingTogether) {
  auto scene = generate_scene(single_box_scene());
  auto flat = flatten_grid(scene.grid, sinusoidal_encoding(8, 8, 4, 100.0));
  std::vector<std::size_t> order(flat.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = (i * 5 + 3) % order.size();
  auto moved = permute_pairs(flat, order);
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto a = moved.state(i);
    auto b = flat.state(order[i]);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
    auto pa = moved.encoding(i);
    auto pb = flat.encoding(order[i]);
    EXPECT_TRUE(std::equal(pa.begin(), pa.end(), pb.begin()));
  }
  order[0] = order[1];
  EXPECT_THROW(permute_pairs(flat, order), ShapeError);
}

TEST(GridCsv, HeaderAndOneRowPerCell) {
  BevGrid grid{2, 2, 2, 1.0, {0.5, 1, 2, 3, 4, 5, 6, 7.25}};
  std::ostringstream out;
  write_grid_csv(out, grid);
  EXPECT_EQ(out.str(), "r,c,f0,f1\n0,0,0.5,1\n0,1,2,3\n1,0,4,5\n1,1,6,7.25\n");
}

}  // namespace
}  // namespace gqn::bev
