#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gqn/bev_scene.hpp"
#include "gqn/numerics/tensor.hpp"

namespace gqn::query {

/// One group of graph queries sharing a sampling ratio and neighbour count.
struct QuerySetSpec {
  std::size_t queries = 1;
  double ratio = 0.1;  // in (0, 1]
  std::size_t k = 1;

  void validate() const;
};

/// round(ratio * m_bev), clamped to [1, m_bev - 1] so that K < N stays
/// satisfiable on any grid with at least two cells.
std::size_t node_count(double ratio, std::size_t m_bev);

struct GraphNode {
  std::size_t bev_index = 0;
  double alpha = 0.0;
  std::vector<double> state;
  std::vector<double> position;
};

/// Directed edge between node slots.
struct Edge {
  std::size_t source = 0;
  std::size_t target = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// A populated graph query: global vector u, sampled nodes and kNN edges.
/// Slots are ordered by descending selection weight.
struct GraphQuery {
  std::size_t query_index = 0;
  std::size_t set_index = 0;
  double ratio = 0.0;
  std::size_t k = 0;
  numerics::Tensor global;  // u, [d]
  numerics::Tensor alpha;   // selection weights over the grid, [M_BEV]
  std::vector<GraphNode> nodes;
  std::vector<Edge> edges;
  // Differentiable node states x_k * M_BEV * alpha_k, [N x d].
  numerics::Tensor node_states;
  numerics::Tensor node_positions;  // [N x d], constant

  std::size_t size() const { return nodes.size(); }
  std::vector<std::size_t> bev_indices() const;
};

/// alpha_k = softmax_k(u . x_k) over the grid's state features [M x d].
numerics::Tensor attention_scores(const numerics::Tensor& global,
                                  const numerics::Tensor& states);

/// Indices of the n largest weights, descending; ties go to the lower index.
std::vector<std::size_t> top_n(std::span<const double> alpha, std::size_t n);

std::vector<GraphNode> select_nodes(std::span<const double> alpha, const bev::FlatGrid& grid,
                                    std::size_t n);

/// For every row i of `features` ([n x dim]), edges to the k rows nearest in
/// Euclidean distance, self excluded; ties resolved towards the lower slot.
/// Edges come out grouped by source, nearest first.
std::vector<Edge> build_knn_edges(std::span<const double> features, std::size_t dim,
                                  std::size_t k);
std::vector<Edge> build_knn_edges(const std::vector<GraphNode>& nodes, std::size_t k);

/// Full initialisation of one query over a flattened grid. `states` and
/// `positions` are the grid tensors ([M x d]); `global` is u.
GraphQuery init_query(const numerics::Tensor& global, const numerics::Tensor& states,
                      const numerics::Tensor& positions, const bev::FlatGrid& grid,
                      const QuerySetSpec& set, std::size_t set_index,
                      std::size_t query_index);

}  // namespace gqn::query
