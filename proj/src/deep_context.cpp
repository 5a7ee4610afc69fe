#include "gqn/deep_context.hpp"

#include <string>

#include "gqn/error.hpp"
#include "gqn/numerics/ops.hpp"

namespace gqn::deep_context {

DeepContextSpec DeepContextSpec::make(std::size_t dim, std::size_t steps) {
  return {numerics::AttentionSpec{"attn", dim}, steps, MlpSpec::make("eta", {2 * dim, dim, dim})};
}

void register_deep_context(ParamStore& params, const DeepContextSpec& spec) {
  numerics::register_attention(params, spec.attention);
  numerics::register_mlp(params, spec.eta);
}

Tensor pool_query(const Tensor& nodes) {
  if (!nodes.defined() || nodes.numel() == 0) throw ContractError("pool_query: no nodes");
  if (nodes.rank() != 2) throw ShapeError("pool_query: expected [N x d] node features");
  return numerics::max_rows(nodes);
}

Tensor context_exchange(const Tensor& summaries, const DeepContextSpec& spec,
                        const ParamStore& params) {
  if (summaries.rank() != 2 || summaries.cols() != spec.attention.dim) {
    throw ShapeError("context_exchange: summaries must be [tau x " +
                     std::to_string(spec.attention.dim) + "]");
  }
  Tensor current = summaries;
  for (std::size_t step = 0; step < spec.steps; ++step) {
    current = numerics::self_attention_layer(spec.attention, params, current);
  }
  return current;
}

Tensor infuse_context(const Tensor& nodes, const Tensor& context, const MlpSpec& eta,
                      const ParamStore& params) {
  if (nodes.rank() != 2 || context.rank() != 1) {
    throw ShapeError("infuse_context: expected [N x d] nodes and a [d] context vector");
  }
  if (eta.input_width() != nodes.cols() + context.numel()) {
    throw ShapeError("infuse_context: eta expects width " + std::to_string(eta.input_width()));
  }
  const Tensor shared = numerics::broadcast_rows(context, nodes.rows());
  return numerics::mlp_forward(eta, params, numerics::concat_cols({nodes, shared}));
}

}  // namespace gqn::deep_context
