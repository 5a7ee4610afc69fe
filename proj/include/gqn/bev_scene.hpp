#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "gqn/numerics/tensor.hpp"

namespace gqn::bev {

/// H x W grid of d-wide state features, row-major by cell.
struct BevGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t dim = 0;
  double cell_size = 1.0;  // metres; metadata only
  std::vector<double> features;

  std::size_t cells() const { return height * width; }
  std::span<const double> cell(std::size_t r, std::size_t c) const {
    return std::span<const double>(features).subspan((r * width + c) * dim, dim);
  }
};

/// Fixed 2D sinusoidal encodings: channels [0, d/2) encode the column,
/// [d/2, d) the row, sin/cos interleaved within each half.
struct PosEncoding {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t dim = 0;
  double base = 100.0;
  std::vector<double> values;

  std::span<const double> cell(std::size_t k) const {
    return std::span<const double>(values).subspan(k * dim, dim);
  }
};

/// Axis-aligned object footprint. Rows covered are
/// [center_row - (extent_rows - 1) / 2, ... + extent_rows), same for columns.
struct ObjectBox {
  std::size_t center_row = 0;
  std::size_t center_col = 0;
  std::size_t extent_rows = 1;
  std::size_t extent_cols = 1;
  // Per-object feature signature of width d; generated from the scene seed
  // when empty. The final channel is always overwritten with `doppler`.
  std::vector<double> signature;
  double doppler = 0.0;

  std::size_t row_begin() const { return center_row - (extent_rows - 1) / 2; }
  std::size_t col_begin() const { return center_col - (extent_cols - 1) / 2; }
};

struct SceneSpec {
  std::size_t height = 16;
  std::size_t width = 16;
  std::size_t dim = 8;
  double cell_size = 0.5;
  std::vector<ObjectBox> boxes;
  double clutter_density = 0.0;  // fraction of background cells with clutter
  double noise = 0.0;            // amplitude of additive uniform noise
  std::uint64_t seed = 0;

  /// Throws ConfigError for boxes outside the grid or negative amplitudes.
  void validate() const;
};

struct SceneTruth {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> mask;
  std::vector<int> object_id;  // -1 where no object

  std::size_t object_cells() const;
};

PosEncoding sinusoidal_encoding(std::size_t height, std::size_t width, std::size_t dim,
                                double base);

struct Scene {
  BevGrid grid;
  SceneTruth truth;
};

/// Deterministic synthetic scene. Object cells carry their signature plus
/// noise; background cells carry low-magnitude clutter with probability
/// `clutter_density`, otherwise noise scaled by 0.1. Where boxes overlap the
/// later box owns the cell.
Scene generate_scene(const SceneSpec& spec);

/// Row-major list of (x_k, p_k) pairs, k = r * W + c.
struct FlatGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t dim = 0;
  std::vector<double> states;
  std::vector<double> encodings;

  std::size_t size() const { return height * width; }
  std::span<const double> state(std::size_t k) const {
    return std::span<const double>(states).subspan(k * dim, dim);
  }
  std::span<const double> encoding(std::size_t k) const {
    return std::span<const double>(encodings).subspan(k * dim, dim);
  }
  numerics::Tensor states_tensor() const;
  numerics::Tensor encodings_tensor() const;
};

FlatGrid flatten_grid(const BevGrid& grid, const PosEncoding& encoding);
BevGrid unflatten_grid(const FlatGrid& flat, double cell_size = 1.0);

/// Pair i of the result is pair order[i] of `flat`.
FlatGrid permute_pairs(const FlatGrid& flat, std::span<const std::size_t> order);

/// One CSV row per cell: r, c, f0..f(d-1), with a header line.
void write_grid_csv(std::ostream& out, const BevGrid& grid);

}  // namespace gqn::bev
