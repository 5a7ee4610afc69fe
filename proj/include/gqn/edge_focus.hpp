#pragma once

#include <span>

#include "gqn/numerics/mlp.hpp"
#include "gqn/numerics/param_store.hpp"
#include "gqn/query_init.hpp"

namespace gqn::edge_focus {

using numerics::MlpSpec;
using numerics::ParamStore;
using numerics::Tensor;

/// The four networks of the operator. phi and rho are 2d -> d -> d; the edge
/// query/key projections are single linear d -> d layers.
struct EdgeFocusSpec {
  MlpSpec phi;
  MlpSpec rho;
  MlpSpec query;
  MlpSpec key;

  static EdgeFocusSpec make(std::size_t dim);
};

void register_edge_focus(ParamStore& params, const EdgeFocusSpec& spec);

/// Row e is (p_target - p_source || x_target) for edges[e]; [E x 2d].
Tensor edge_inputs(const Tensor& node_states, const Tensor& node_positions,
                   std::span<const query::Edge> edges);

/// e_ij = phi(p_j - p_i || x_j) for every directed edge; [E x d].
Tensor edge_features(const Tensor& node_states, const Tensor& node_positions,
                     std::span<const query::Edge> edges, const MlpSpec& phi,
                     const ParamStore& params);
Tensor edge_features(const query::GraphQuery& graph, const MlpSpec& phi,
                     const ParamStore& params);

/// beta_ij = softmax over j in N(i) of q(e_ij) . k(e_ij). One weight per edge.
/// Throws ContractError when a node in [0, num_nodes) has no out-edge.
Tensor edge_attention(const Tensor& features, std::span<const query::Edge> edges,
                      std::size_t num_nodes, const MlpSpec& query, const MlpSpec& key,
                      const ParamStore& params);

/// v'_i = rho(sum_j beta_ij e_ij || x_i); [N x d]. The neighbour sum is
/// independent of the storage order of node i's edges.
Tensor update_nodes(const Tensor& node_states, const Tensor& features, const Tensor& beta,
                    std::span<const query::Edge> edges, const MlpSpec& rho,
                    const ParamStore& params);

/// Edge features, edge attention and node update for one graph query.
Tensor apply(const query::GraphQuery& graph, const EdgeFocusSpec& spec,
             const ParamStore& params);

}  // namespace gqn::edge_focus
