#include "gqn/numerics/mlp.hpp"

#include "gqn/error.hpp"
#include "gqn/numerics/ops.hpp"

namespace gqn::numerics {

MlpSpec MlpSpec::make(std::string name, std::vector<std::size_t> widths) {
  MlpSpec spec;
  spec.name = std::move(name);
  const std::size_t layers = widths.size() < 2 ? 0 : widths.size() - 1;
  spec.widths = std::move(widths);
  spec.activations.assign(layers, Activation::relu);
  if (layers > 0) spec.activations.back() = Activation::none;
  spec.biases.assign(layers, true);
  spec.validate();
  return spec;
}

std::string MlpSpec::weight_name(std::size_t layer) const {
  return name + ".w" + std::to_string(layer);
}

std::string MlpSpec::bias_name(std::size_t layer) const {
  return name + ".b" + std::to_string(layer);
}

void MlpSpec::validate() const {
  if (widths.size() < 2) throw ConfigError("mlp " + name + ": needs at least two widths");
  for (std::size_t w : widths) {
    if (w == 0) throw ShapeError("mlp " + name + ": zero width");
  }
  if (activations.size() != layers() || biases.size() != layers()) {
    throw ConfigError("mlp " + name + ": one activation and bias flag per layer");
  }
  if (activations.back() != Activation::none) {
    throw ConfigError("mlp " + name + ": output layer must be linear");
  }
}

void register_mlp(ParamStore& params, const MlpSpec& spec) {
  spec.validate();
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    const std::size_t in = spec.widths[l], out = spec.widths[l + 1];
    params.add_uniform(spec.weight_name(l), {in, out}, in, out);
    if (spec.biases[l]) params.add_zeros(spec.bias_name(l), {out});
  }
}

Tensor mlp_forward(const MlpSpec& spec, const ParamStore& params, const Tensor& input) {
  spec.validate();
  const bool is_vector = input.rank() == 1;
  Tensor x = is_vector ? reshape(input, {1, input.numel()}) : input;
  if (x.rank() != 2 || x.cols() != spec.input_width()) {
    throw ShapeError("mlp " + spec.name + ": input width " + std::to_string(x.cols()) +
                     ", expected " + std::to_string(spec.input_width()));
  }
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    x = matmul(x, params.get(spec.weight_name(l)));
    if (spec.biases[l]) x = add_bias(x, params.get(spec.bias_name(l)));
    if (spec.activations[l] == Activation::relu) x = relu(x);
  }
  return is_vector ? reshape(x, {spec.output_width()}) : x;
}

}  // namespace gqn::numerics
