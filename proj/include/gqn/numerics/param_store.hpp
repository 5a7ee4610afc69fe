#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gqn/numerics/tensor.hpp"

namespace gqn::numerics {

/// Named, seeded parameter tensors. Insertion order is preserved and is the
/// order used by reports and optimisers.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor tensor;
  };

  explicit ParamStore(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  static constexpr std::string_view init_scheme() { return "xavier_uniform"; }

  /// Registers a parameter drawn uniformly from [-a, a],
  /// a = sqrt(6 / (fan_in + fan_out)). The draw depends only on the store
  /// seed and the parameter name.
  const Tensor& add_uniform(const std::string& name, Shape shape, std::size_t fan_in,
                            std::size_t fan_out);
  const Tensor& add_zeros(const std::string& name, Shape shape);
  /// Registers explicit values (tests, hand-built networks).
  const Tensor& add_values(const std::string& name, Shape shape,
                           std::vector<double> values);

  bool contains(std::string_view name) const;
  const Tensor& get(std::string_view name) const;
  Tensor& get(std::string_view name);

  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<std::string> names() const;
  /// Distinct name prefixes before the first '.', in registration order.
  std::vector<std::string> groups() const;
  static std::string group_of(std::string_view name);

  std::size_t parameter_count() const;
  void zero_grad();

 private:
  const Tensor& insert(const std::string& name, Tensor tensor);

  std::uint64_t seed_;
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// Reverse-mode sweep that also guarantees every parameter in `params` ends
/// with a gradient buffer (zero when the loss does not reach it).
void backward(const Tensor& loss, ParamStore& params);

}  // namespace gqn::numerics
