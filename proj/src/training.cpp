#include "gqn/training.hpp"

#include <cmath>
#include <limits>

#include "gqn/error.hpp"
#include "gqn/numerics/ops.hpp"

namespace gqn::pipeline {

namespace ops = numerics;

bev::SceneSpec toy_scene(std::uint64_t seed) {
  bev::SceneSpec spec;
  spec.height = 16;
  spec.width = 16;
  spec.dim = 8;
  spec.cell_size = 0.5;
  spec.clutter_density = 0.05;
  spec.noise = 0.05;
  spec.seed = seed;
  spec.boxes = {
      {.center_row = 4, .center_col = 4, .extent_rows = 3, .extent_cols = 3, .signature = {}, .doppler = 0.8},
      {.center_row = 10, .center_col = 11, .extent_rows = 4, .extent_cols = 2, .signature = {}, .doppler = -0.6},
      {.center_row = 12, .center_col = 3, .extent_rows = 2, .extent_cols = 3, .signature = {}, .doppler = 0.0},
  };
  return spec;
}

TrainResult toy_train(const bev::SceneSpec& scene_spec, const GqnConfig& config,
                      const TrainOptions& options) {
  if (scene_spec.dim != config.dim) throw ConfigError("toy_train: scene and model widths differ");
  if (!(options.learning_rate > 0.0)) throw ConfigError("toy_train: learning rate must be > 0");
  const bev::Scene scene = bev::generate_scene(scene_spec);
  const bev::FlatGrid grid = bev::flatten_grid(
      scene.grid, bev::sinusoidal_encoding(scene_spec.height, scene_spec.width, config.dim,
                                           config.frequency_base));
  ParamStore params = init_params(config, scene_spec.height, scene_spec.width);
  const MlpSpec readout = MlpSpec::make("readout", {config.dim, 1});
  numerics::register_mlp(params, readout);

  std::vector<double> mask(scene.truth.mask.begin(), scene.truth.mask.end());
  const Tensor target = Tensor::matrix(grid.size(), 1, mask);
  const RunOptions run_options{options.threads, std::nullopt};

  TrainResult result;
  for (std::size_t step = 0;; ++step) {
    Tensor loss;
    try {
      const GqnOutput out = run_gqn(grid, config, params, run_options);
      loss = ops::mean_squared_error(numerics::mlp_forward(readout, params, out.skip_fused),
                                     target);
    } catch (const InvalidInput&) {
      // Non-finite parameters surface as invalid softmax scores.
      if (step == 0) throw;
      result.diverged = true;
      break;
    }
    if (!std::isfinite(loss.item())) {
      result.diverged = true;
      break;
    }
    result.losses.push_back(loss.item());
    if (step == options.steps) break;

    numerics::backward(loss, params);
    if (step == 0) {
      const Tensor& u = params.get("u");
      double smallest = std::numeric_limits<double>::infinity();
      for (std::size_t q = 0; q < u.rows(); ++q) {
        double norm = 0.0;
        for (std::size_t j = 0; j < u.cols(); ++j) norm += u.grad()[q * u.cols() + j] * u.grad()[q * u.cols() + j];
        smallest = std::min(smallest, std::sqrt(norm));
      }
      result.min_global_grad_norm = smallest;
    }
    for (const auto& entry : params.entries()) {
      Tensor tensor = entry.tensor;
      auto values = tensor.mutable_values();
      auto grad = tensor.grad();
      for (std::size_t i = 0; i < values.size(); ++i) values[i] -= options.learning_rate * grad[i];
    }
  }
  return result;
}

}  // namespace gqn::pipeline
