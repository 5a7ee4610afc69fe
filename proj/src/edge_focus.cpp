#include "gqn/edge_focus.hpp"

#include <string>
#include <vector>

#include "gqn/error.hpp"
#include "gqn/numerics/ops.hpp"

namespace gqn::edge_focus {

namespace ops = numerics;

namespace {

std::vector<std::size_t> sources(std::span<const query::Edge> edges) {
  std::vector<std::size_t> out;
  out.reserve(edges.size());
  for (const auto& e : edges) out.push_back(e.source);
  return out;
}

std::vector<std::size_t> targets(std::span<const query::Edge> edges) {
  std::vector<std::size_t> out;
  out.reserve(edges.size());
  for (const auto& e : edges) out.push_back(e.target);
  return out;
}

}  // namespace

EdgeFocusSpec EdgeFocusSpec::make(std::size_t dim) {
  return {MlpSpec::make("phi", {2 * dim, dim, dim}), MlpSpec::make("rho", {2 * dim, dim, dim}),
          MlpSpec::make("q", {dim, dim}), MlpSpec::make("k", {dim, dim})};
}

void register_edge_focus(ParamStore& params, const EdgeFocusSpec& spec) {
  numerics::register_mlp(params, spec.phi);
  numerics::register_mlp(params, spec.query);
  numerics::register_mlp(params, spec.key);
  numerics::register_mlp(params, spec.rho);
}

Tensor edge_inputs(const Tensor& node_states, const Tensor& node_positions,
                   std::span<const query::Edge> edges) {
  if (edges.empty()) throw ContractError("edge_inputs: graph has no edges");
  if (node_states.rows() != node_positions.rows()) {
    throw ShapeError("edge_inputs: states and positions disagree on node count");
  }
  const auto src = sources(edges);
  const auto dst = targets(edges);
  const Tensor relative = ops::sub(ops::gather_rows(node_positions, dst),
                                   ops::gather_rows(node_positions, src));
  return ops::concat_cols({relative, ops::gather_rows(node_states, dst)});
}

Tensor edge_features(const Tensor& node_states, const Tensor& node_positions,
                     std::span<const query::Edge> edges, const MlpSpec& phi,
                     const ParamStore& params) {
  const std::size_t width = node_states.cols() + node_positions.cols();
  if (phi.input_width() != width) {
    throw ShapeError("edge_features: phi expects width " + std::to_string(phi.input_width()) +
                     ", edges carry " + std::to_string(width));
  }
  return numerics::mlp_forward(phi, params, edge_inputs(node_states, node_positions, edges));
}

Tensor edge_features(const query::GraphQuery& graph, const MlpSpec& phi,
                     const ParamStore& params) {
  return edge_features(graph.node_states, graph.node_positions, graph.edges, phi, params);
}

Tensor edge_attention(const Tensor& features, std::span<const query::Edge> edges,
                      std::size_t num_nodes, const MlpSpec& query, const MlpSpec& key,
                      const ParamStore& params) {
  if (features.rank() != 2 || features.rows() != edges.size()) {
    throw ShapeError("edge_attention: one feature row per edge required");
  }
  std::vector<std::size_t> degree(num_nodes, 0);
  for (const auto& e : edges) {
    if (e.source >= num_nodes) throw ShapeError("edge_attention: edge source out of range");
    ++degree[e.source];
  }
  for (std::size_t i = 0; i < num_nodes; ++i) {
    if (degree[i] == 0) {
      throw ContractError("edge_attention: node " + std::to_string(i) + " has no edges");
    }
  }
  // Diagonal score q(e_ij) . k(e_ij). A full edge-to-edge reading would
  // replace this with matmul_nt over each neighbourhood.
  const Tensor scores = ops::rowwise_dot(numerics::mlp_forward(query, params, features),
                                         numerics::mlp_forward(key, params, features));
  return ops::group_softmax(scores, sources(edges), num_nodes);
}

Tensor update_nodes(const Tensor& node_states, const Tensor& features, const Tensor& beta,
                    std::span<const query::Edge> edges, const MlpSpec& rho,
                    const ParamStore& params) {
  const std::size_t n = node_states.rows();
  if (rho.input_width() != features.cols() + node_states.cols()) {
    throw ShapeError("update_nodes: rho expects width " + std::to_string(rho.input_width()));
  }
  const Tensor message = ops::group_weighted_sum(features, beta, sources(edges), n);
  return numerics::mlp_forward(rho, params, ops::concat_cols({message, node_states}));
}

Tensor apply(const query::GraphQuery& graph, const EdgeFocusSpec& spec,
             const ParamStore& params) {
  const Tensor features = edge_features(graph, spec.phi, params);
  const Tensor beta =
      edge_attention(features, graph.edges, graph.size(), spec.query, spec.key, params);
  return update_nodes(graph.node_states, features, beta, graph.edges, spec.rho, params);
}

}  // namespace gqn::edge_focus
