#pragma once

#include <string>

#include "gqn/numerics/param_store.hpp"
#include "gqn/numerics/tensor.hpp"

namespace gqn::numerics {

/// Single-head scaled dot-product self-attention with learned query, key and
/// value projections ("<name>.wq", ".wk", ".wv", each [d x d], no bias).
struct AttentionSpec {
  std::string name;
  std::size_t dim = 0;

  std::string query_name() const { return name + ".wq"; }
  std::string key_name() const { return name + ".wk"; }
  std::string value_name() const { return name + ".wv"; }
};

void register_attention(ParamStore& params, const AttentionSpec& spec);

/// out = X + softmax(X Wq (X Wk)^T / sqrt(d)) X Wv over the rows of X [t x d].
/// Softmax normalisers and the value mixture are reduced with canonical sums,
/// so permuting the rows of X permutes the output rows bit-exactly.
Tensor self_attention_layer(const AttentionSpec& spec, const ParamStore& params,
                            const Tensor& vectors);

}  // namespace gqn::numerics
