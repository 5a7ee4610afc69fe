#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gqn/bev_scene.hpp"
#include "gqn/deep_context.hpp"
#include "gqn/edge_focus.hpp"
#include "gqn/numerics/mlp.hpp"
#include "gqn/numerics/param_store.hpp"
#include "gqn/query_init.hpp"

namespace gqn::pipeline {

using numerics::MlpSpec;
using numerics::ParamStore;
using numerics::Tensor;

struct GqnConfig {
  std::size_t dim = 8;
  std::size_t layers = 2;  // self-attention steps L
  std::vector<query::QuerySetSpec> sets;
  double frequency_base = 100.0;
  std::uint64_t seed = 0;

  /// Three sets of 32 queries at 10/20/30 % with K = 4/8/12, d = 64, L = 6.
  static GqnConfig full_size();
  /// Two sets of 4 queries at 10/20 % with K = 2/3, d = 8, L = 2.
  static GqnConfig toy();

  std::size_t total_queries() const;
  /// Checks widths, strictly ascending ratios and K < N on an m_bev grid.
  void validate(std::size_t m_bev) const;
};

/// Network shapes derived from a config: MLP1 is (S + 2) d -> 2d -> d and
/// MLP2 is 2d -> d -> 2.
struct GqnModel {
  edge_focus::EdgeFocusSpec edge_focus;
  deep_context::DeepContextSpec context;
  MlpSpec mlp1;
  MlpSpec mlp2;

  static GqnModel make(const GqnConfig& config);
};

/// Registers u ([tau x d], group "u"), then phi, q, k, rho, attn, eta, mlp1
/// and mlp2, all seeded from config.seed.
ParamStore init_params(const GqnConfig& config, std::size_t height, std::size_t width);

struct RunOptions {
  int threads = 1;
  // Output of an external global pathway, [M_BEV x d]. When present the
  // result carries the soft-fused map.
  std::optional<Tensor> global_map;
};

struct GqnOutput {
  std::vector<Tensor> set_maps;  // [M_BEV x d] each, set order
  Tensor concatenated;           // [M_BEV x S d]
  Tensor global_vectors;         // u, [tau x d]
  Tensor context_vectors;        // g', [tau x d]
  Tensor skip_fused;             // [M_BEV x d]
  Tensor fused;                  // [M_BEV x d], only with a global map
  Tensor fusion_weights;         // [M_BEV x 2], only with a global map
  std::vector<query::GraphQuery> queries;
};

/// Mean of the node features each cell receives; `cells[r]` is the BEV cell
/// of row r of `nodes`. Untouched cells are zero.
Tensor project_to_bev(const Tensor& nodes, std::span<const std::size_t> cells,
                      std::size_t num_cells);

/// Channel concatenation in set order. Throws ShapeError on differing H*W.
Tensor concat_sets(std::span<const Tensor> maps);

/// MLP1 over (input || set maps || positional encoding), per cell.
Tensor skip_fuse(const Tensor& input, const Tensor& concatenated, const Tensor& encodings,
                 const MlpSpec& mlp1, const ParamStore& params);

struct Fusion {
  Tensor fused;    // w0 * graph + w1 * global
  Tensor weights;  // softmax(MLP2(graph || global)) per cell, [M x 2]
};
Fusion soft_fusion(const Tensor& graph, const Tensor& global, const MlpSpec& mlp2,
                   const ParamStore& params);

/// Whole pathway: query init, EdgeFocus and context pooling per query, then
/// per-set projection, concatenation, skip fusion and optional soft fusion.
/// Results are bit-identical for any thread count.
GqnOutput run_gqn(const bev::FlatGrid& grid, const GqnConfig& config, const ParamStore& params,
                  const RunOptions& options = {});

}  // namespace gqn::pipeline
