#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "gqn/deep_context.hpp"
#include "gqn/error.hpp"
#include "gqn/numerics/grad_check.hpp"
#include "gqn/numerics/ops.hpp"
#include "gqn/numerics/random.hpp"

namespace gqn::deep_context {
namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  numerics::CounterRng rng(seed, "deep-context-test");
  std::vector<double> v(n);
  for (auto& x : v) x = rng.next_uniform(-1.0, 1.0);
  return v;
}

TEST(PoolQuery, Examples) {
  auto single = pool_query(Tensor::matrix(1, 2, {4.0, -1.0}));
  EXPECT_EQ(single[0], 4.0);
  EXPECT_EQ(single[1], -1.0);
  auto two = pool_query(Tensor::matrix(2, 2, {1.0, 5.0, 3.0, 2.0}));
  EXPECT_EQ(two[0], 3.0);
  EXPECT_EQ(two[1], 5.0);
  auto same = pool_query(Tensor::matrix(3, 2, {0.5, -0.5, 0.5, -0.5, 0.5, -0.5}));
  EXPECT_EQ(same[0], 0.5);
  EXPECT_EQ(same[1], -0.5);
}

TEST(PoolQuery, EmptyIsAContractError) { EXPECT_THROW(pool_query(Tensor()), ContractError); }

TEST(PoolQuery, MonotoneUnderAddingNodes) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto v = random_values(5 * 3, seed);
    auto base = pool_query(Tensor::matrix(4, 3, std::vector<double>(v.begin(), v.begin() + 12)));
    auto more = pool_query(Tensor::matrix(5, 3, v));
    for (std::size_t j = 0; j < 3; ++j) EXPECT_GE(more[j], base[j]);
  }
}

TEST(ContextExchange, ZeroStepsIsIdentity) {
  ParamStore params(1);
  auto spec = DeepContextSpec::make(4, 0);
  register_deep_context(params, spec);
  auto g = Tensor::matrix(3, 4, random_values(12, 1));
  auto out = context_exchange(g, spec, params);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(out[i], g[i]);
}

TEST(ContextExchange, SingleQueryWithZeroValueProjection) {
  ParamStore params(2);
  auto spec = DeepContextSpec::make(4, 6);
  register_deep_context(params, spec);
  auto wv = params.get(spec.attention.value_name()).mutable_values();
  std::fill(wv.begin(), wv.end(), 0.0);
  auto g = Tensor::matrix(1, 4, random_values(4, 2));
  auto out = context_exchange(g, spec, params);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(out[i], g[i]);
}

TEST(ContextExchange, PermutationEquivariant) {
  std::mt19937_64 gen(3);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ParamStore params(seed);
    auto spec = DeepContextSpec::make(4, 3);
    register_deep_context(params, spec);
    const std::size_t tau = 7;
    auto g = Tensor::matrix(tau, 4, random_values(tau * 4, seed + 10));
    std::vector<std::size_t> perm(tau);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    auto a = context_exchange(g, spec, params);
    auto b = context_exchange(numerics::gather_rows(g, perm), spec, params);
    for (std::size_t i = 0; i < tau; ++i)
      for (std::size_t j = 0; j < 4; ++j) ASSERT_EQ(b.at(i, j), a.at(perm[i], j));
  }
}

TEST(ContextExchange, DimensionMismatch) {
  ParamStore params(2);
  auto spec = DeepContextSpec::make(4, 1);
  register_deep_context(params, spec);
  EXPECT_THROW(context_exchange(Tensor::matrix(2, 3, random_values(6, 0)), spec, params),
               ShapeError);
}

TEST(InfuseContext, PassThroughOfNodeHalf) {
  const std::size_t d = 3;
  ParamStore params;
  auto eta = MlpSpec::make("eta", {2 * d, d});
  std::vector<double> w(2 * d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) w[i * d + i] = 1.0;
  params.add_values("eta.w0", {2 * d, d}, w);
  params.add_values("eta.b0", {d}, std::vector<double>(d, 0.0));
  auto nodes = Tensor::matrix(4, d, random_values(4 * d, 4));
  auto out = infuse_context(nodes, Tensor::vector({7.0, -9.0, 11.0}), eta, params);
  for (std::size_t i = 0; i < nodes.numel(); ++i) EXPECT_EQ(out[i], nodes[i]);
}

TEST(InfuseContext, ZeroWeightsGiveBias) {
  ParamStore params;
  auto eta = MlpSpec::make("eta", {4, 3, 2});
  params.add_values("eta.w0", {4, 3}, std::vector<double>(12, 0.0));
  params.add_values("eta.b0", {3}, {0.0, 0.0, 0.0});
  params.add_values("eta.w1", {3, 2}, std::vector<double>(6, 0.0));
  params.add_values("eta.b1", {2}, {1.5, -0.5});
  auto out = infuse_context(Tensor::matrix(3, 2, random_values(6, 5)), Tensor::vector({1, 2}),
                            eta, params);
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_EQ(out.at(r, 0), 1.5);
    EXPECT_EQ(out.at(r, 1), -0.5);
  }
}

TEST(InfuseContext, IdenticalNodesIdenticalOutputsAndWidthD) {
  ParamStore params(6);
  auto spec = DeepContextSpec::make(4, 1);
  register_deep_context(params, spec);
  auto row = random_values(4, 6);
  std::vector<double> v;
  for (int i = 0; i < 3; ++i) v.insert(v.end(), row.begin(), row.end());
  auto out = infuse_context(Tensor::matrix(3, 4, v), Tensor::vector(random_values(4, 7)), spec.eta,
                            params);
  ASSERT_EQ(out.shape(), (numerics::Shape{3, 4}));
  for (std::size_t r = 1; r < 3; ++r)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(out.at(r, j), out.at(0, j));
  EXPECT_THROW(infuse_context(Tensor::matrix(3, 4, v), Tensor::vector({1, 2}), spec.eta, params),
               ShapeError);
}

TEST(DeepContext, WholeModuleGradientCheck) {
  ParamStore params(8);
  auto spec = DeepContextSpec::make(4, 2);
  register_deep_context(params, spec);
  std::vector<Tensor> queries;
  for (std::uint64_t q = 0; q < 3; ++q) {
    queries.push_back(Tensor::matrix(5, 4, random_values(20, 100 + q)));
  }
  auto fn = [&](const ParamStore& p) {
    std::vector<Tensor> pooled;
    for (const auto& v : queries) pooled.push_back(pool_query(v));
    auto context = context_exchange(numerics::stack_rows(pooled), spec, p);
    Tensor total = Tensor::scalar(0.0);
    for (std::size_t q = 0; q < queries.size(); ++q) {
      auto out = infuse_context(queries[q], numerics::row(context, q), spec.eta, p);
      total = numerics::add(total, numerics::sum(numerics::mul(out, out)));
    }
    return total;
  };
  auto report = numerics::grad_check(fn, params, {.eps = 1e-6});
  EXPECT_LE(report.max_rel_error, 1e-4);
  EXPECT_TRUE(report.group_error.contains("attn"));
  EXPECT_TRUE(report.group_error.contains("eta"));
}

}  // namespace
}  // namespace gqn::deep_context
