#pragma once

#include <cstdint>
#include <vector>

#include "gqn/gqn_pipeline.hpp"

namespace gqn::cost {

enum class ConstructionMode { naive, indexed };

const char* to_string(ConstructionMode mode);

/// Exact non-negative fraction, kept reduced.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Ratio&, const Ratio&) = default;
};

/// N * K edge operations. Throws ConfigError unless N > K >= 1.
std::uint64_t processing_cost(std::uint64_t n, std::uint64_t k);

/// Naive: N (N - 1) / 2 distance evaluations. Indexed: N log2 N + N K.
/// Throws ConfigError unless N > K >= 1.
double construction_cost(std::uint64_t n, std::uint64_t k, ConstructionMode mode);

struct GraphCost {
  std::uint64_t nodes = 0;
  std::uint64_t k = 0;
  std::uint64_t queries = 0;  // graphs of this size; 1 for the full graph
  std::uint64_t processing = 0;
  std::uint64_t naive_construction = 0;
  double indexed_construction = 0.0;
};

struct CostReport {
  std::uint64_t m_bev = 0;
  std::vector<GraphCost> sets;
  GraphCost full;  // N = M_BEV, K = full_k
  // Most expensive single query graph.
  std::uint64_t peak_processing = 0;
  std::uint64_t peak_naive_construction = 0;
  double peak_indexed_construction = 0.0;
  // 1 - peak / full.
  Ratio processing_reduction;
  Ratio naive_construction_reduction;
  double indexed_construction_reduction = 0.0;
  std::uint64_t flops = 0;
};

inline constexpr std::uint64_t kFullSceneK = 20;

CostReport compare_full_vs_queries(std::uint64_t m_bev, const pipeline::GqnConfig& config,
                                   std::uint64_t full_k = kFullSceneK);

/// Floating-point operations of the graph pathway on an m_bev grid with width
/// `dim`, one multiply-add counted as 2. Depends on sizes only.
std::uint64_t flop_estimate(const pipeline::GqnConfig& config, std::uint64_t m_bev,
                            std::uint64_t dim);

}  // namespace gqn::cost
