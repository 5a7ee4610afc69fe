#include "gqn/numerics/attention.hpp"

#include <cmath>

#include "gqn/error.hpp"
#include "gqn/numerics/ops.hpp"

namespace gqn::numerics {

void register_attention(ParamStore& params, const AttentionSpec& spec) {
  if (spec.dim == 0) throw ConfigError("attention " + spec.name + ": zero width");
  const std::size_t d = spec.dim;
  params.add_uniform(spec.query_name(), {d, d}, d, d);
  params.add_uniform(spec.key_name(), {d, d}, d, d);
  params.add_uniform(spec.value_name(), {d, d}, d, d);
}

Tensor self_attention_layer(const AttentionSpec& spec, const ParamStore& params,
                            const Tensor& vectors) {
  if (vectors.rank() != 2 || vectors.cols() != spec.dim) {
    throw ShapeError("attention " + spec.name + ": expected rows of width " +
                     std::to_string(spec.dim));
  }
  const Tensor q = matmul(vectors, params.get(spec.query_name()));
  const Tensor k = matmul(vectors, params.get(spec.key_name()));
  const Tensor v = matmul(vectors, params.get(spec.value_name()));
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(spec.dim));
  const Tensor weights = row_softmax(scale(matmul_nt(q, k), inv_sqrt_d));
  return add(vectors, matmul(weights, v, SumOrder::canonical));
}

}  // namespace gqn::numerics
