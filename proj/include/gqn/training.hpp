#pragma once

#include <vector>

#include "gqn/bev_scene.hpp"
#include "gqn/gqn_pipeline.hpp"

namespace gqn::pipeline {

/// 16 x 16 scene, d = 8, three objects with distinct Doppler values plus
/// light clutter and noise.
bev::SceneSpec toy_scene(std::uint64_t seed = 0);

struct TrainOptions {
  std::size_t steps = 200;
  double learning_rate = 1e-2;
  int threads = 1;
};

struct TrainResult {
  // Loss before each update; steps + 1 entries on a clean run.
  std::vector<double> losses;
  bool diverged = false;
  // Smallest per-query norm of dloss/du at the first step.
  double min_global_grad_norm = 0.0;
};

/// Plain gradient descent on the mean squared error between a linear
/// one-channel readout ("readout" group) of the skip-fused map and the scene
/// mask. A non-finite loss stops the run and sets `diverged`; `losses` then
/// ends with the last finite value.
TrainResult toy_train(const bev::SceneSpec& scene, const GqnConfig& config,
                      const TrainOptions& options = {});

}  // namespace gqn::pipeline
