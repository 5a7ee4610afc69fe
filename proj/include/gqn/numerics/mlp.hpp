#pragma once

#include <string>
#include <vector>

#include "gqn/numerics/param_store.hpp"
#include "gqn/numerics/tensor.hpp"

namespace gqn::numerics {

enum class Activation { none, relu };

/// Layer widths plus per-layer activation and bias flags. Parameters live in
/// a ParamStore under "<name>.w<l>" ([in x out]) and "<name>.b<l>".
struct MlpSpec {
  std::string name;
  std::vector<std::size_t> widths;
  std::vector<Activation> activations;
  std::vector<bool> biases;

  /// ReLU on hidden layers, identity on the output layer, biases everywhere.
  static MlpSpec make(std::string name, std::vector<std::size_t> widths);

  std::size_t layers() const { return widths.size() - 1; }
  std::size_t input_width() const { return widths.front(); }
  std::size_t output_width() const { return widths.back(); }
  std::string weight_name(std::size_t layer) const;
  std::string bias_name(std::size_t layer) const;

  /// Throws ShapeError/ConfigError on an inconsistent spec.
  void validate() const;
};

void register_mlp(ParamStore& params, const MlpSpec& spec);

/// Applies the MLP to each row of `input` ([n x in] or a single [in] vector).
Tensor mlp_forward(const MlpSpec& spec, const ParamStore& params, const Tensor& input);

}  // namespace gqn::numerics
