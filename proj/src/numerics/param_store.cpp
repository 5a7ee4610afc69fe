#include "gqn/numerics/param_store.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "gqn/error.hpp"
#include "gqn/numerics/random.hpp"

namespace gqn::numerics {

const Tensor& ParamStore::insert(const std::string& name, Tensor tensor) {
  if (index_.contains(name)) throw ConfigError("duplicate parameter name: " + name);
  index_.emplace(name, entries_.size());
  entries_.push_back({name, std::move(tensor)});
  return entries_.back().tensor;
}

const Tensor& ParamStore::add_uniform(const std::string& name, Shape shape,
                                      std::size_t fan_in, std::size_t fan_out) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  const CounterRng rng(seed_, name);
  std::vector<double> values(shape_numel(shape));
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = rng.uniform(i, -bound, bound);
  return insert(name, Tensor(std::move(shape), std::move(values), true));
}

const Tensor& ParamStore::add_zeros(const std::string& name, Shape shape) {
  return insert(name, Tensor::zeros(std::move(shape), true));
}

const Tensor& ParamStore::add_values(const std::string& name, Shape shape,
                                     std::vector<double> values) {
  return insert(name, Tensor(std::move(shape), std::move(values), true));
}

bool ParamStore::contains(std::string_view name) const { return index_.contains(name); }

const Tensor& ParamStore::get(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter: " + std::string(name));
  return entries_[it->second].tensor;
}

Tensor& ParamStore::get(std::string_view name) {
  return const_cast<Tensor&>(std::as_const(*this).get(name));
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

std::string ParamStore::group_of(std::string_view name) {
  return std::string(name.substr(0, name.find('.')));
}

std::vector<std::string> ParamStore::groups() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) {
    std::string g = group_of(e.name);
    if (out.empty() || std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
  }
  return out;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.numel();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

void backward(const Tensor& loss, ParamStore& params) {
  if (!loss.defined() || loss.numel() != 1) {
    throw InvalidInput("backward() needs a scalar loss");
  }
  params.zero_grad();
  backward(loss);
}

}  // namespace gqn::numerics
