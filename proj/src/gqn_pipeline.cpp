#include "gqn/gqn_pipeline.hpp"

#include <string>

#include "gqn/error.hpp"
#include "gqn/numerics/ops.hpp"
#include "gqn/numerics/parallel.hpp"

namespace gqn::pipeline {

namespace ops = numerics;

GqnConfig GqnConfig::full_size() {
  GqnConfig c;
  c.dim = 64;
  c.layers = 6;
  c.sets = {{32, 0.10, 4}, {32, 0.20, 8}, {32, 0.30, 12}};
  return c;
}

GqnConfig GqnConfig::toy() {
  GqnConfig c;
  c.dim = 8;
  c.layers = 2;
  c.sets = {{4, 0.10, 2}, {4, 0.20, 3}};
  return c;
}

std::size_t GqnConfig::total_queries() const {
  std::size_t tau = 0;
  for (const auto& s : sets) tau += s.queries;
  return tau;
}

void GqnConfig::validate(std::size_t m_bev) const {
  if (dim == 0 || dim % 4 != 0) throw ConfigError("gqn: d must be a positive multiple of 4");
  if (sets.empty()) throw ConfigError("gqn: at least one query set is required");
  if (!(frequency_base > 1.0)) throw ConfigError("gqn: frequency base must exceed 1");
  for (std::size_t s = 0; s < sets.size(); ++s) {
    sets[s].validate();
    if (s > 0 && !(sets[s].ratio > sets[s - 1].ratio)) {
      throw ConfigError("gqn: sampling ratios must be strictly ascending");
    }
    const std::size_t n = query::node_count(sets[s].ratio, m_bev);
    if (sets[s].k >= n) {
      throw ConfigError("gqn: set " + std::to_string(s) + " has K=" + std::to_string(sets[s].k) +
                        " but only N=" + std::to_string(n) + " nodes on a grid of " +
                        std::to_string(m_bev) + " cells");
    }
  }
}

GqnModel GqnModel::make(const GqnConfig& config) {
  const std::size_t d = config.dim;
  return {edge_focus::EdgeFocusSpec::make(d), deep_context::DeepContextSpec::make(d, config.layers),
          MlpSpec::make("mlp1", {(config.sets.size() + 2) * d, 2 * d, d}),
          MlpSpec::make("mlp2", {2 * d, d, 2})};
}

ParamStore init_params(const GqnConfig& config, std::size_t height, std::size_t width) {
  config.validate(height * width);
  const GqnModel model = GqnModel::make(config);
  ParamStore params(config.seed);
  params.add_uniform("u", {config.total_queries(), config.dim}, config.dim, config.dim);
  edge_focus::register_edge_focus(params, model.edge_focus);
  deep_context::register_deep_context(params, model.context);
  numerics::register_mlp(params, model.mlp1);
  numerics::register_mlp(params, model.mlp2);
  return params;
}

Tensor project_to_bev(const Tensor& nodes, std::span<const std::size_t> cells,
                      std::size_t num_cells) {
  return ops::scatter_mean(nodes, cells, num_cells);
}

Tensor concat_sets(std::span<const Tensor> maps) {
  if (maps.empty()) throw ShapeError("concat_sets: no maps");
  for (const auto& m : maps) {
    if (m.rank() != 2 || m.rows() != maps.front().rows()) {
      throw ShapeError("concat_sets: maps cover different grids");
    }
  }
  return ops::concat_cols(maps);
}

Tensor skip_fuse(const Tensor& input, const Tensor& concatenated, const Tensor& encodings,
                 const MlpSpec& mlp1, const ParamStore& params) {
  const std::size_t width = input.cols() + concatenated.cols() + encodings.cols();
  if (width != mlp1.input_width()) {
    throw ShapeError("skip_fuse: MLP1 expects width " + std::to_string(mlp1.input_width()) +
                     ", got " + std::to_string(width));
  }
  if (input.rows() != concatenated.rows() || input.rows() != encodings.rows()) {
    throw ShapeError("skip_fuse: inputs cover different grids");
  }
  return numerics::mlp_forward(mlp1, params, ops::concat_cols({input, concatenated, encodings}));
}

Fusion soft_fusion(const Tensor& graph, const Tensor& global, const MlpSpec& mlp2,
                   const ParamStore& params) {
  if (graph.shape() != global.shape()) throw ShapeError("soft_fusion: map shapes differ");
  if (mlp2.output_width() != 2) throw ShapeError("soft_fusion: MLP2 must emit two logits");
  const Tensor weights =
      ops::row_softmax(numerics::mlp_forward(mlp2, params, ops::concat_cols({graph, global})));
  const Tensor fused = ops::add(ops::scale_rows(graph, ops::column(weights, 0)),
                                ops::scale_rows(global, ops::column(weights, 1)));
  return {fused, weights};
}

GqnOutput run_gqn(const bev::FlatGrid& grid, const GqnConfig& config, const ParamStore& params,
                  const RunOptions& options) {
  const std::size_t m = grid.size();
  config.validate(m);
  if (grid.dim != config.dim) {
    throw ShapeError("run_gqn: grid width " + std::to_string(grid.dim) + " differs from d=" +
                     std::to_string(config.dim));
  }
  const GqnModel model = GqnModel::make(config);
  const std::size_t tau = config.total_queries();
  const Tensor states = grid.states_tensor();
  const Tensor positions = grid.encodings_tensor();
  const Tensor& globals = params.get("u");
  if (globals.rows() != tau || globals.cols() != config.dim) {
    throw ShapeError("run_gqn: parameter u does not match the query sets");
  }

  std::vector<std::size_t> set_of(tau);
  for (std::size_t s = 0, q = 0; s < config.sets.size(); ++s) {
    for (std::size_t i = 0; i < config.sets[s].queries; ++i) set_of[q++] = s;
  }

  GqnOutput out;
  out.queries.resize(tau);
  std::vector<Tensor> updated(tau), pooled(tau), infused(tau);
  numerics::parallel_for(tau, options.threads, [&](std::size_t q) {
    const std::size_t s = set_of[q];
    out.queries[q] = query::init_query(ops::row(globals, q), states, positions, grid,
                                       config.sets[s], s, q);
    updated[q] = edge_focus::apply(out.queries[q], model.edge_focus, params);
    pooled[q] = deep_context::pool_query(updated[q]);
  });

  out.global_vectors = globals;
  out.context_vectors =
      deep_context::context_exchange(ops::stack_rows(pooled), model.context, params);

  numerics::parallel_for(tau, options.threads, [&](std::size_t q) {
    infused[q] = deep_context::infuse_context(updated[q], ops::row(out.context_vectors, q),
                                              model.context.eta, params);
  });

  out.set_maps.resize(config.sets.size());
  numerics::parallel_for(config.sets.size(), options.threads, [&](std::size_t s) {
    std::vector<Tensor> blocks;
    std::vector<std::size_t> cells;
    for (std::size_t q = 0; q < tau; ++q) {
      if (set_of[q] != s) continue;
      blocks.push_back(infused[q]);
      for (const auto& node : out.queries[q].nodes) cells.push_back(node.bev_index);
    }
    out.set_maps[s] = project_to_bev(ops::concat_rows(blocks), cells, m);
  });

  out.concatenated = concat_sets(out.set_maps);
  out.skip_fused = skip_fuse(states, out.concatenated, positions, model.mlp1, params);
  if (options.global_map) {
    Fusion fusion = soft_fusion(out.skip_fused, *options.global_map, model.mlp2, params);
    out.fused = fusion.fused;
    out.fusion_weights = fusion.weights;
  }
  return out;
}

}  // namespace gqn::pipeline
