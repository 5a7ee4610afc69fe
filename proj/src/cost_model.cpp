#include "gqn/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gqn/error.hpp"
#include "gqn/query_init.hpp"

namespace gqn::cost {

namespace {

void check_graph(std::uint64_t n, std::uint64_t k) {
  if (k < 1) throw ConfigError("cost: K must be >= 1");
  if (k >= n) {
    throw ConfigError("cost: K = " + std::to_string(k) + " must be below N = " +
                      std::to_string(n));
  }
}

Ratio one_minus(std::uint64_t part, std::uint64_t whole) {
  const std::uint64_t num = whole - part;
  const std::uint64_t g = std::gcd(num, whole);
  return {num / g, whole / g};
}

GraphCost graph_cost(std::uint64_t n, std::uint64_t k, std::uint64_t queries) {
  GraphCost cost;
  cost.nodes = n;
  cost.k = k;
  cost.queries = queries;
  cost.processing = processing_cost(n, k);
  cost.naive_construction = n * (n - 1) / 2;
  cost.indexed_construction = construction_cost(n, k, ConstructionMode::indexed);
  return cost;
}

// Per-layer multiply-add count of an MLP, plus one add per bias.
std::uint64_t mlp_flops(std::initializer_list<std::uint64_t> widths) {
  std::uint64_t total = 0;
  const auto* w = widths.begin();
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) total += 2 * w[l] * w[l + 1] + w[l + 1];
  return total;
}

}  // namespace

const char* to_string(ConstructionMode mode) {
  return mode == ConstructionMode::naive ? "naive" : "indexed";
}

std::uint64_t processing_cost(std::uint64_t n, std::uint64_t k) {
  check_graph(n, k);
  return n * k;
}

double construction_cost(std::uint64_t n, std::uint64_t k, ConstructionMode mode) {
  check_graph(n, k);
  const double nd = static_cast<double>(n);
  if (mode == ConstructionMode::naive) return nd * (nd - 1.0) / 2.0;
  return nd * std::log2(nd) + nd * static_cast<double>(k);
}

CostReport compare_full_vs_queries(std::uint64_t m_bev, const pipeline::GqnConfig& config,
                                   std::uint64_t full_k) {
  if (config.sets.empty()) throw ConfigError("cost: no query sets");
  CostReport report;
  report.m_bev = m_bev;
  report.full = graph_cost(m_bev, full_k, 1);
  for (const auto& set : config.sets) {
    const std::uint64_t n = query::node_count(set.ratio, m_bev);
    report.sets.push_back(graph_cost(n, set.k, set.queries));
    const GraphCost& c = report.sets.back();
    report.peak_processing = std::max(report.peak_processing, c.processing);
    report.peak_naive_construction = std::max(report.peak_naive_construction, c.naive_construction);
    report.peak_indexed_construction =
        std::max(report.peak_indexed_construction, c.indexed_construction);
  }
  report.processing_reduction = one_minus(report.peak_processing, report.full.processing);
  report.naive_construction_reduction =
      one_minus(report.peak_naive_construction, report.full.naive_construction);
  report.indexed_construction_reduction =
      1.0 - report.peak_indexed_construction / report.full.indexed_construction;
  report.flops = flop_estimate(config, m_bev, config.dim);
  return report;
}

std::uint64_t flop_estimate(const pipeline::GqnConfig& config, std::uint64_t m_bev,
                            std::uint64_t dim) {
  const std::uint64_t d = dim;
  const std::uint64_t m = m_bev;
  const std::uint64_t s = config.sets.size();
  std::uint64_t tau = 0;
  std::uint64_t total = 0;
  for (const auto& set : config.sets) {
    const std::uint64_t q = set.queries;
    const std::uint64_t n = query::node_count(set.ratio, m);
    const std::uint64_t k = set.k;
    const std::uint64_t e = n * k;
    tau += q;

    std::uint64_t per_query = 0;
    per_query += 2 * m * d + 3 * m;          // selection scores and softmax
    per_query += n * d;                      // weighted node states
    per_query += (n * (n - 1) / 2) * 3 * d;  // pairwise distances
    per_query += e;                          // neighbour selection
    per_query += e * (d + mlp_flops({2 * d, d, d}));  // edge inputs and phi
    per_query += e * (2 * mlp_flops({d, d}) + 2 * d + 3);  // q, k, score, softmax
    per_query += e * 2 * d;                                // weighted aggregation
    per_query += n * (mlp_flops({2 * d, d, d}) + d);       // rho and pooling
    per_query += n * mlp_flops({2 * d, d, d});             // eta
    per_query += n * d;                                    // projection sum
    total += q * per_query;
  }
  // Self-attention over the tau summaries, L steps.
  total += config.layers * (3 * 2 * tau * d * d + 2 * tau * tau * d + 3 * tau * tau +
                            2 * tau * tau * d + tau * d);
  total += s * m * d;                              // projection means
  total += m * mlp_flops({(s + 2) * d, 2 * d, d});  // MLP1
  total += m * (mlp_flops({2 * d, d, 2}) + 3 * d + 6);  // MLP2, softmax, blend
  return total;
}

}  // namespace gqn::cost
