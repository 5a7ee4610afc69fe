#pragma once

#include "gqn/numerics/attention.hpp"
#include "gqn/numerics/mlp.hpp"
#include "gqn/numerics/param_store.hpp"

namespace gqn::deep_context {

using numerics::MlpSpec;
using numerics::ParamStore;
using numerics::Tensor;

struct DeepContextSpec {
  numerics::AttentionSpec attention;  // shared by every step
  std::size_t steps = 0;              // L
  MlpSpec eta;                        // 2d -> d -> d

  static DeepContextSpec make(std::size_t dim, std::size_t steps);
};

void register_deep_context(ParamStore& params, const DeepContextSpec& spec);

/// g_q: elementwise maximum over a query's updated node features [N x d].
Tensor pool_query(const Tensor& nodes);

/// Applies the shared self-attention layer `spec.steps` times to the stacked
/// summaries [tau x d]; zero steps returns the input unchanged.
Tensor context_exchange(const Tensor& summaries, const DeepContextSpec& spec,
                        const ParamStore& params);

/// v''_i = eta(v'_i || g'_q) for every node of one query.
Tensor infuse_context(const Tensor& nodes, const Tensor& context, const MlpSpec& eta,
                      const ParamStore& params);

}  // namespace gqn::deep_context
