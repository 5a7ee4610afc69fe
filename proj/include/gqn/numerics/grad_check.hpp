#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include "gqn/numerics/param_store.hpp"
#include "gqn/numerics/tensor.hpp"

namespace gqn::numerics {

struct GradCheckOptions {
  double eps = 1e-6;
  // 0 checks every coordinate; otherwise at most this many per parameter,
  // drawn with `seed`.
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::map<std::string, double> param_error;
  std::map<std::string, double> group_error;
  // Largest |analytic gradient| per parameter.
  std::map<std::string, double> param_grad_norm;
  std::size_t coords_checked = 0;
};

using ScalarFn = std::function<Tensor(const ParamStore&)>;

/// Compares reverse-mode gradients of `fn` with central differences. Error
/// per coordinate is |a - n| / max(1, |a|, |n|). Throws ContractError if two
/// evaluations at the same point disagree, InvalidInput if eps is outside
/// [1e-7, 1e-3]. Parameter values are restored on return.
GradCheckReport grad_check(const ScalarFn& fn, ParamStore& params,
                           const GradCheckOptions& options = {});

}  // namespace gqn::numerics
