#include "gqn/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gqn/error.hpp"
#include "gqn/numerics/random.hpp"

namespace gqn::numerics {

namespace {

double evaluate(const ScalarFn& fn, const ParamStore& params) {
  NoGradGuard no_grad;
  const Tensor out = fn(params);
  if (out.numel() != 1) throw InvalidInput("grad_check: function is not scalar");
  return out.item();
}

std::vector<std::size_t> pick_coords(std::size_t numel, const GradCheckOptions& options,
                                     const std::string& name) {
  std::vector<std::size_t> all(numel);
  std::iota(all.begin(), all.end(), 0);
  if (options.max_coords_per_param == 0 || numel <= options.max_coords_per_param) return all;
  // Partial Fisher-Yates driven by the counter generator.
  const CounterRng rng(options.seed, name);
  for (std::size_t i = 0; i < options.max_coords_per_param; ++i) {
    const std::size_t j = i + rng.bits(i) % (numel - i);
    std::swap(all[i], all[j]);
  }
  all.resize(options.max_coords_per_param);
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

GradCheckReport grad_check(const ScalarFn& fn, ParamStore& params,
                           const GradCheckOptions& options) {
  if (!(options.eps >= 1e-7 && options.eps <= 1e-3)) {
    throw InvalidInput("grad_check: eps must lie in [1e-7, 1e-3]");
  }
  const double base = evaluate(fn, params);
  if (evaluate(fn, params) != base) {
    throw ContractError("grad_check: function is not deterministic");
  }

  {
    const Tensor loss = fn(params);
    backward(loss, params);
  }

  GradCheckReport report;
  for (const auto& entry : params.entries()) {
    Tensor tensor = entry.tensor;
    const std::vector<double> analytic(tensor.grad().begin(), tensor.grad().end());
    auto values = tensor.mutable_values();
    double worst = 0.0, largest = 0.0;
    for (double g : analytic) largest = std::max(largest, std::abs(g));
    for (std::size_t i : pick_coords(values.size(), options, entry.name)) {
      const double original = values[i];
      values[i] = original + options.eps;
      const double plus = evaluate(fn, params);
      values[i] = original - options.eps;
      const double minus = evaluate(fn, params);
      values[i] = original;
      const double numeric = (plus - minus) / (2.0 * options.eps);
      const double denom = std::max({1.0, std::abs(analytic[i]), std::abs(numeric)});
      worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
      ++report.coords_checked;
    }
    report.param_error[entry.name] = worst;
    report.param_grad_norm[entry.name] = largest;
    double& group = report.group_error[ParamStore::group_of(entry.name)];
    group = std::max(group, worst);
    report.max_rel_error = std::max(report.max_rel_error, worst);
  }
  return report;
}

}  // namespace gqn::numerics
