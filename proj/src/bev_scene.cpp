#include "gqn/bev_scene.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "gqn/error.hpp"
#include "gqn/io.hpp"
#include "gqn/numerics/random.hpp"

namespace gqn::bev {

using numerics::CounterRng;

namespace {

constexpr double kClutterAmplitude = 0.3;
constexpr double kBackgroundNoiseScale = 0.1;

}  // namespace

void SceneSpec::validate() const {
  if (height == 0 || width == 0 || dim == 0) throw ConfigError("scene: empty grid");
  if (!(clutter_density >= 0.0 && clutter_density <= 1.0)) {
    throw ConfigError("scene: clutter density must lie in [0, 1]");
  }
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw ConfigError("scene: noise must be >= 0");
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const ObjectBox& b = boxes[i];
    const std::string tag = "scene: box " + std::to_string(i);
    if (b.extent_rows == 0 || b.extent_cols == 0) throw ConfigError(tag + " has zero extent");
    if (b.center_row < (b.extent_rows - 1) / 2 || b.center_col < (b.extent_cols - 1) / 2 ||
        b.row_begin() + b.extent_rows > height || b.col_begin() + b.extent_cols > width) {
      throw ConfigError(tag + " leaves the grid");
    }
    if (!b.signature.empty() && b.signature.size() != dim) {
      throw ConfigError(tag + " signature width differs from the feature width");
    }
  }
}

std::size_t SceneTruth::object_cells() const {
  std::size_t n = 0;
  for (auto m : mask) n += m;
  return n;
}

PosEncoding sinusoidal_encoding(std::size_t height, std::size_t width, std::size_t dim,
                                double base) {
  if (dim == 0 || dim % 4 != 0) {
    throw ConfigError("positional encoding width must be a positive multiple of 4");
  }
  if (height == 0 || width == 0) throw ConfigError("positional encoding: empty grid");
  if (!(base > 1.0)) throw ConfigError("positional encoding: frequency base must exceed 1");
  PosEncoding enc{height, width, dim, base, std::vector<double>(height * width * dim)};
  const std::size_t half = dim / 2;
  std::vector<double> inv_freq(half / 2);
  for (std::size_t i = 0; i < inv_freq.size(); ++i) {
    inv_freq[i] = std::pow(base, -static_cast<double>(2 * i) / static_cast<double>(half));
  }
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      double* out = &enc.values[(r * width + c) * dim];
      for (std::size_t axis = 0; axis < 2; ++axis) {
        const double pos = static_cast<double>(axis == 0 ? c : r);
        for (std::size_t i = 0; i < inv_freq.size(); ++i) {
          out[axis * half + 2 * i] = std::sin(pos * inv_freq[i]);
          out[axis * half + 2 * i + 1] = std::cos(pos * inv_freq[i]);
        }
      }
    }
  }
  return enc;
}

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  const std::size_t h = spec.height, w = spec.width, d = spec.dim;
  Scene scene;
  scene.grid = BevGrid{h, w, d, spec.cell_size, std::vector<double>(h * w * d, 0.0)};
  scene.truth = SceneTruth{h, w, std::vector<std::uint8_t>(h * w, 0), std::vector<int>(h * w, -1)};

  std::vector<std::vector<double>> signatures;
  for (std::size_t o = 0; o < spec.boxes.size(); ++o) {
    const ObjectBox& box = spec.boxes[o];
    std::vector<double> sig = box.signature;
    if (sig.empty()) {
      const CounterRng rng(spec.seed, "object-signature-" + std::to_string(o));
      sig.resize(d);
      for (std::size_t j = 0; j < d; ++j) {
        const double magnitude = rng.uniform(2 * j, 0.5, 1.5);
        sig[j] = rng.uniform(2 * j + 1) < 0.5 ? -magnitude : magnitude;
      }
    }
    sig[d - 1] = box.doppler;
    signatures.push_back(std::move(sig));
    for (std::size_t r = box.row_begin(); r < box.row_begin() + box.extent_rows; ++r)
      for (std::size_t c = box.col_begin(); c < box.col_begin() + box.extent_cols; ++c) {
        scene.truth.mask[r * w + c] = 1;
        scene.truth.object_id[r * w + c] = static_cast<int>(o);
      }
  }

  const CounterRng rng(spec.seed, "scene-cells");
  for (std::size_t k = 0; k < h * w; ++k) {
    const std::uint64_t block = k * (d + 1);
    double* out = &scene.grid.features[k * d];
    const int owner = scene.truth.object_id[k];
    if (owner >= 0) {
      const auto& sig = signatures[static_cast<std::size_t>(owner)];
      for (std::size_t j = 0; j < d; ++j) {
        out[j] = sig[j] + spec.noise * rng.uniform(block + 1 + j, -1.0, 1.0);
      }
    } else if (rng.uniform(block) < spec.clutter_density) {
      for (std::size_t j = 0; j < d; ++j) {
        out[j] = kClutterAmplitude * rng.uniform(block + 1 + j, -1.0, 1.0);
      }
    } else {
      for (std::size_t j = 0; j < d; ++j) {
        out[j] = kBackgroundNoiseScale * spec.noise * rng.uniform(block + 1 + j, -1.0, 1.0);
      }
    }
  }
  return scene;
}

numerics::Tensor FlatGrid::states_tensor() const {
  return numerics::Tensor::matrix(size(), dim, states);
}

numerics::Tensor FlatGrid::encodings_tensor() const {
  return numerics::Tensor::matrix(size(), dim, encodings);
}

FlatGrid flatten_grid(const BevGrid& grid, const PosEncoding& encoding) {
  if (grid.height != encoding.height || grid.width != encoding.width ||
      grid.dim != encoding.dim) {
    throw ShapeError("flatten_grid: grid and positional encoding dimensions differ");
  }
  if (grid.features.size() != grid.cells() * grid.dim ||
      encoding.values.size() != grid.cells() * grid.dim) {
    throw ShapeError("flatten_grid: storage does not match the stated dimensions");
  }
  return FlatGrid{grid.height, grid.width, grid.dim, grid.features, encoding.values};
}

BevGrid unflatten_grid(const FlatGrid& flat, double cell_size) {
  return BevGrid{flat.height, flat.width, flat.dim, cell_size, flat.states};
}

FlatGrid permute_pairs(const FlatGrid& flat, std::span<const std::size_t> order) {
  if (order.size() != flat.size()) throw ShapeError("permute_pairs: order has wrong length");
  FlatGrid out{flat.height, flat.width, flat.dim, {}, {}};
  out.states.reserve(flat.states.size());
  out.encodings.reserve(flat.encodings.size());
  std::vector<bool> used(flat.size(), false);
  for (std::size_t k : order) {
    if (k >= flat.size() || used[k]) throw ShapeError("permute_pairs: not a permutation");
    used[k] = true;
    auto s = flat.state(k);
    auto e = flat.encoding(k);
    out.states.insert(out.states.end(), s.begin(), s.end());
    out.encodings.insert(out.encodings.end(), e.begin(), e.end());
  }
  return out;
}

void write_grid_csv(std::ostream& out, const BevGrid& grid) {
  std::string line = "r,c";
  for (std::size_t j = 0; j < grid.dim; ++j) line += ",f" + std::to_string(j);
  out << line << '\n';
  for (std::size_t r = 0; r < grid.height; ++r)
    for (std::size_t c = 0; c < grid.width; ++c) {
      line = std::to_string(r) + "," + std::to_string(c);
      for (double v : grid.cell(r, c)) {
        line += ',';
        append_double(line, v);
      }
      out << line << '\n';
    }
}

}  // namespace gqn::bev
