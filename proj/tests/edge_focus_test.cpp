#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gqn/edge_focus.hpp"
#include "gqn/error.hpp"
#include "gqn/numerics/grad_check.hpp"
#include "gqn/numerics/ops.hpp"
#include "gqn/numerics/random.hpp"

namespace gqn::edge_focus {
namespace {

using query::Edge;

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  numerics::CounterRng rng(seed, "edge-focus-test");
  std::vector<double> v(n);
  for (auto& x : v) x = rng.next_uniform(-1.0, 1.0);
  return v;
}

// Random graph with out-degree k built by the library's kNN rule.
struct Fixture {
  Tensor states, positions;
  std::vector<Edge> edges;
  std::size_t n;
};

Fixture random_graph(std::size_t n, std::size_t d, std::size_t k, std::uint64_t seed) {
  auto x = random_values(n * d, seed);
  auto p = random_values(n * d, seed + 1000);
  return {Tensor::matrix(n, d, x), Tensor::matrix(n, d, p), query::build_knn_edges(x, d, k), n};
}

void set_identity(numerics::ParamStore& params, const std::string& name, std::size_t d) {
  std::vector<double> v(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) v[i * d + i] = 1.0;
  params.add_values(name, {d, d}, v);
}

TEST(EdgeInputs, CoincidentPositionsGiveZeroRelativeHalf) {
  auto states = Tensor::matrix(2, 2, {0.5, 0.25, -1.0, 3.0});
  auto positions = Tensor::matrix(2, 2, {0.7, 0.1, 0.7, 0.1});
  std::vector<Edge> edges = {{0, 1}};
  auto in = edge_inputs(states, positions, edges);
  EXPECT_EQ(std::vector<double>(in.values().begin(), in.values().end()),
            (std::vector<double>{0.0, 0.0, -1.0, 3.0}));
}

TEST(EdgeInputs, ReversingAnEdgeNegatesRelativePosition) {
  auto g = random_graph(5, 3, 2, 1);
  std::vector<Edge> forward = {{1, 3}}, reverse = {{3, 1}};
  auto a = edge_inputs(g.states, g.positions, forward);
  auto b = edge_inputs(g.states, g.positions, reverse);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(a[j], -b[j]);
}

TEST(EdgeFeatures, AllOnesLinearLayer) {
  // input [1, -1 || 2, 0] -> every unit 1 - 1 + 2 + 0 = 2
  numerics::ParamStore params;
  auto phi = MlpSpec::make("phi", {4, 2});
  params.add_values("phi.w0", {4, 2}, std::vector<double>(8, 1.0));
  params.add_values("phi.b0", {2}, {0.0, 0.0});
  auto states = Tensor::matrix(2, 2, {9.0, 9.0, 2.0, 0.0});
  auto positions = Tensor::matrix(2, 2, {0.0, 0.0, 1.0, -1.0});
  std::vector<Edge> edges = {{0, 1}};
  auto e = edge_features(states, positions, edges, phi, params);
  EXPECT_EQ(e.at(0, 0), 2.0);
  EXPECT_EQ(e.at(0, 1), 2.0);
}

TEST(EdgeFeatures, WidthMismatch) {
  numerics::ParamStore params;
  auto phi = MlpSpec::make("phi", {6, 2});
  numerics::register_mlp(params, phi);
  auto g = random_graph(4, 2, 1, 2);
  EXPECT_THROW(edge_features(g.states, g.positions, g.edges, phi, params), ShapeError);
}

TEST(EdgeAttention, SingleNeighbourGetsFullWeight) {
  numerics::ParamStore params(3);
  auto spec = EdgeFocusSpec::make(3);
  register_edge_focus(params, spec);
  auto g = random_graph(4, 3, 1, 3);
  auto e = edge_features(g.states, g.positions, g.edges, spec.phi, params);
  auto beta = edge_attention(e, g.edges, g.n, spec.query, spec.key, params);
  for (double b : beta.values()) EXPECT_EQ(b, 1.0);
}

TEST(EdgeAttention, IdenticalEdgeFeaturesGiveUniformWeights) {
  numerics::ParamStore params(4);
  auto spec = EdgeFocusSpec::make(2);
  register_edge_focus(params, spec);
  std::vector<Edge> edges = {{0, 1}, {0, 2}, {0, 3}, {0, 4}};
  std::vector<double> rows;
  for (int i = 0; i < 4; ++i) rows.insert(rows.end(), {0.3, -0.8});
  auto beta = edge_attention(Tensor::matrix(4, 2, rows), edges, 1, spec.query, spec.key, params);
  for (double b : beta.values()) EXPECT_DOUBLE_EQ(b, 0.25);
}

TEST(EdgeAttention, LogThreeAgainstZero) {
  // q = k = identity on width 1: score = e^2, so e = sqrt(ln 3) and 0 give
  // scores [ln 3, 0] and weights [3/4, 1/4].
  numerics::ParamStore params;
  auto q = MlpSpec::make("q", {1, 1});
  auto k = MlpSpec::make("k", {1, 1});
  params.add_values("q.w0", {1, 1}, {1.0});
  params.add_values("q.b0", {1}, {0.0});
  params.add_values("k.w0", {1, 1}, {1.0});
  params.add_values("k.b0", {1}, {0.0});
  std::vector<Edge> edges = {{0, 1}, {0, 2}};
  auto beta = edge_attention(Tensor::matrix(2, 1, {std::sqrt(std::log(3.0)), 0.0}), edges, 1, q,
                             k, params);
  EXPECT_NEAR(beta[0], 0.75, 1e-15);
  EXPECT_NEAR(beta[1], 0.25, 1e-15);
}

TEST(EdgeAttention, NodeWithoutEdgesIsAContractError) {
  numerics::ParamStore params(4);
  auto spec = EdgeFocusSpec::make(2);
  register_edge_focus(params, spec);
  std::vector<Edge> edges = {{0, 1}, {2, 1}};
  EXPECT_THROW(edge_attention(Tensor::matrix(2, 2, {1, 2, 3, 4}), edges, 3, spec.query, spec.key,
                              params),
               ContractError);
}

TEST(EdgeAttention, WeightsNormalisePerNode) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    numerics::ParamStore params(seed);
    auto spec = EdgeFocusSpec::make(4);
    register_edge_focus(params, spec);
    const std::size_t n = 6 + seed % 7, k = 1 + seed % 5;
    auto g = random_graph(n, 4, k, seed);
    auto e = edge_features(g.states, g.positions, g.edges, spec.phi, params);
    auto beta = edge_attention(e, g.edges, n, spec.query, spec.key, params);
    std::vector<double> totals(n, 0.0);
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
      EXPECT_GE(beta[i], 0.0);
      totals[g.edges[i].source] += beta[i];
    }
    for (double t : totals) EXPECT_NEAR(t, 1.0, 1e-9);
  }
}

TEST(UpdateNodes, SingleNeighbourUsesItsEdgeFeatureDirectly) {
  numerics::ParamStore params(8);
  auto spec = EdgeFocusSpec::make(3);
  register_edge_focus(params, spec);
  auto g = random_graph(4, 3, 1, 8);
  auto e = edge_features(g.states, g.positions, g.edges, spec.phi, params);
  auto beta = edge_attention(e, g.edges, g.n, spec.query, spec.key, params);
  auto v = update_nodes(g.states, e, beta, g.edges, spec.rho, params);
  auto direct = numerics::mlp_forward(spec.rho, params, numerics::concat_cols({e, g.states}));
  EXPECT_EQ(std::vector<double>(v.values().begin(), v.values().end()),
            std::vector<double>(direct.values().begin(), direct.values().end()));
}

TEST(UpdateNodes, ZeroMessagesAndPassThroughRhoReturnState) {
  // rho = [0 | I] on (message || x), one linear layer, zero bias.
  const std::size_t d = 3;
  numerics::ParamStore params;
  auto rho = MlpSpec::make("rho", {2 * d, d});
  std::vector<double> w(2 * d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) w[(d + i) * d + i] = 1.0;
  params.add_values("rho.w0", {2 * d, d}, w);
  params.add_values("rho.b0", {d}, std::vector<double>(d, 0.0));
  auto g = random_graph(5, d, 2, 9);
  auto zeros = Tensor::zeros({g.edges.size(), d});
  auto beta = Tensor::vector(std::vector<double>(g.edges.size(), 0.5));
  auto v = update_nodes(g.states, zeros, beta, g.edges, rho, params);
  for (std::size_t i = 0; i < v.numel(); ++i) EXPECT_EQ(v[i], g.states[i]);
}

TEST(UpdateNodes, EdgeStorageOrderDoesNotMatter) {
  std::mt19937_64 gen(10);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    numerics::ParamStore params(seed);
    auto spec = EdgeFocusSpec::make(4);
    register_edge_focus(params, spec);
    auto g = random_graph(9, 4, 4, seed + 50);
    auto run = [&](const std::vector<Edge>& edges) {
      auto e = edge_features(g.states, g.positions, edges, spec.phi, params);
      auto beta = edge_attention(e, edges, g.n, spec.query, spec.key, params);
      return update_nodes(g.states, e, beta, edges, spec.rho, params);
    };
    auto shuffled = g.edges;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    auto a = run(g.edges);
    auto b = run(shuffled);
    for (std::size_t i = 0; i < a.numel(); ++i) ASSERT_EQ(a[i], b[i]);
  }
}

TEST(EdgeFocus, SlotRelabelingPermutesOutputRows) {
  std::mt19937_64 gen(11);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    numerics::ParamStore params(seed);
    auto spec = EdgeFocusSpec::make(4);
    register_edge_focus(params, spec);
    const std::size_t n = 10, d = 4;
    auto g = random_graph(n, d, 3, seed + 70);
    // slot s of the relabelled graph holds original node perm[s].
    std::vector<std::size_t> perm(n), inverse(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    for (std::size_t s = 0; s < n; ++s) inverse[perm[s]] = s;
    auto states = numerics::gather_rows(g.states, perm);
    auto positions = numerics::gather_rows(g.positions, perm);
    std::vector<Edge> edges;
    for (auto e : g.edges) edges.push_back({inverse[e.source], inverse[e.target]});
    auto run = [&](const Tensor& x, const Tensor& p, const std::vector<Edge>& el) {
      auto e = edge_features(x, p, el, spec.phi, params);
      auto beta = edge_attention(e, el, n, spec.query, spec.key, params);
      return update_nodes(x, e, beta, el, spec.rho, params);
    };
    auto a = run(g.states, g.positions, g.edges);
    auto b = run(states, positions, edges);
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t j = 0; j < d; ++j) ASSERT_EQ(b.at(s, j), a.at(perm[s], j));
  }
}

TEST(EdgeFocus, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    numerics::ParamStore params(seed);
    auto spec = EdgeFocusSpec::make(4);
    register_edge_focus(params, spec);
    for (const auto& entry : params.entries()) {
      if (entry.name.find(".b") == std::string::npos) continue;
      auto b = params.get(entry.name).mutable_values();
      auto r = random_values(b.size(), seed * 13 + b.size());
      for (std::size_t i = 0; i < b.size(); ++i) b[i] = 0.2 * r[i];
    }
    auto g = random_graph(8, 4, 3, seed + 90);
    auto fn = [&](const numerics::ParamStore& p) {
      auto e = edge_features(g.states, g.positions, g.edges, spec.phi, p);
      auto beta = edge_attention(e, g.edges, g.n, spec.query, spec.key, p);
      auto v = update_nodes(g.states, e, beta, g.edges, spec.rho, p);
      return numerics::sum(numerics::mul(v, v));
    };
    auto report = numerics::grad_check(fn, params, {.eps = 1e-6});
    EXPECT_LE(report.max_rel_error, 1e-4) << "seed " << seed;
    for (const char* group : {"phi", "q", "k", "rho"}) {
      EXPECT_TRUE(report.group_error.contains(group));
    }
  }
}

}  // namespace
}  // namespace gqn::edge_focus
