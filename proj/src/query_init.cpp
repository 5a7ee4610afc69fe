#include "gqn/query_init.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gqn/error.hpp"
#include "gqn/numerics/ops.hpp"

namespace gqn::query {

using numerics::Tensor;

void QuerySetSpec::validate() const {
  if (queries == 0) throw ConfigError("query set: needs at least one query");
  if (k == 0) throw ConfigError("query set: K must be at least 1");
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("query set: ratio must lie in (0, 1]");
}

std::size_t node_count(double ratio, std::size_t m_bev) {
  if (m_bev == 0) throw ConfigError("node_count: empty grid");
  const auto rounded = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(m_bev)));
  const std::size_t upper = m_bev > 1 ? m_bev - 1 : 1;
  return std::clamp<std::size_t>(rounded, 1, upper);
}

std::vector<std::size_t> GraphQuery::bev_indices() const {
  std::vector<std::size_t> out;
  out.reserve(nodes.size());
  for (const auto& n : nodes) out.push_back(n.bev_index);
  return out;
}

Tensor attention_scores(const Tensor& global, const Tensor& states) {
  if (!states.defined() || states.numel() == 0) throw InvalidInput("attention_scores: empty grid");
  if (global.rank() != 1 || states.rank() != 2 || states.cols() != global.numel()) {
    throw ShapeError("attention_scores: global vector width differs from feature width");
  }
  return numerics::softmax(numerics::matvec(states, global));
}

std::vector<std::size_t> top_n(std::span<const double> alpha, std::size_t n) {
  if (n == 0 || n > alpha.size()) {
    throw ConfigError("top_n: N=" + std::to_string(n) + " outside [1, " +
                      std::to_string(alpha.size()) + "]");
  }
  std::vector<std::size_t> idx(alpha.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto before = [&](std::size_t a, std::size_t b) {
    return alpha[a] != alpha[b] ? alpha[a] > alpha[b] : a < b;
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end(), before);
  idx.resize(n);
  return idx;
}

std::vector<GraphNode> select_nodes(std::span<const double> alpha, const bev::FlatGrid& grid,
                                    std::size_t n) {
  if (alpha.size() != grid.size()) throw ShapeError("select_nodes: one weight per cell required");
  std::vector<GraphNode> nodes;
  for (std::size_t k : top_n(alpha, n)) {
    auto s = grid.state(k);
    auto p = grid.encoding(k);
    nodes.push_back({k, alpha[k], {s.begin(), s.end()}, {p.begin(), p.end()}});
  }
  return nodes;
}

std::vector<Edge> build_knn_edges(std::span<const double> features, std::size_t dim,
                                  std::size_t k) {
  if (dim == 0 || features.size() % dim != 0) throw ShapeError("build_knn_edges: ragged features");
  const std::size_t n = features.size() / dim;
  if (k == 0 || k >= n) {
    throw ConfigError("build_knn_edges: K=" + std::to_string(k) + " must lie in [1, N=" +
                      std::to_string(n) + ")");
  }
  std::vector<Edge> edges;
  edges.reserve(n * k);
  std::vector<std::pair<double, std::size_t>> candidates(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = &features[i * dim];
    std::size_t c = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double* xj = &features[j * dim];
      double dist = 0.0;
      for (std::size_t t = 0; t < dim; ++t) dist += (xi[t] - xj[t]) * (xi[t] - xj[t]);
      candidates[c++] = {dist, j};
    }
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                      candidates.end());
    for (std::size_t r = 0; r < k; ++r) edges.push_back({i, candidates[r].second});
  }
  return edges;
}

std::vector<Edge> build_knn_edges(const std::vector<GraphNode>& nodes, std::size_t k) {
  if (nodes.empty()) throw ConfigError("build_knn_edges: no nodes");
  const std::size_t dim = nodes.front().state.size();
  std::vector<double> features;
  features.reserve(nodes.size() * dim);
  for (const auto& node : nodes) {
    if (node.state.size() != dim) throw ShapeError("build_knn_edges: ragged node states");
    features.insert(features.end(), node.state.begin(), node.state.end());
  }
  return build_knn_edges(features, dim, k);
}

GraphQuery init_query(const Tensor& global, const Tensor& states, const Tensor& positions,
                      const bev::FlatGrid& grid, const QuerySetSpec& set,
                      std::size_t set_index, std::size_t query_index) {
  set.validate();
  const std::size_t m = grid.size();
  const std::size_t n = node_count(set.ratio, m);
  if (set.k >= n) {
    throw ConfigError("set " + std::to_string(set_index) + ": K=" + std::to_string(set.k) +
                      " needs more than N=" + std::to_string(n) + " nodes");
  }

  GraphQuery q;
  q.query_index = query_index;
  q.set_index = set_index;
  q.ratio = set.ratio;
  q.k = set.k;
  q.global = global;
  q.alpha = attention_scores(global, states);
  q.nodes = select_nodes(q.alpha.values(), grid, n);
  q.edges = build_knn_edges(q.nodes, set.k);

  const std::vector<std::size_t> idx = q.bev_indices();
  // Hard top-N choice, soft weight: scaling by M * alpha keeps a gradient
  // path to u and has unit expected magnitude under uniform alpha.
  const Tensor weights = numerics::scale(numerics::gather_rows(q.alpha, idx),
                                         static_cast<double>(m));
  q.node_states = numerics::scale_rows(numerics::gather_rows(states, idx), weights);
  q.node_positions = numerics::gather_rows(positions, idx);
  return q;
}

}  // namespace gqn::query
