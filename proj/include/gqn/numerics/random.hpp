#pragma once

#include <cstdint>
#include <string_view>

namespace gqn::numerics {

/// splitmix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// 64-bit FNV-1a, used to derive stream ids from names.
constexpr std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Counter-based generator: draw i of stream s under seed k is a pure
/// function of (k, s, i), so results never depend on call order or threads.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix64(seed ^ mix64(stream))) {}
  constexpr CounterRng(std::uint64_t seed, std::string_view stream)
      : CounterRng(seed, fnv1a(stream)) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const {
    return mix64(key_ ^ mix64(counter + 0x632be59bd9b4e019ULL));
  }
  /// Uniform in [0, 1).
  constexpr double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }
  /// Uniform in [lo, hi).
  constexpr double uniform(std::uint64_t counter, double lo, double hi) const {
    return lo + (hi - lo) * uniform(counter);
  }

  /// Sequential convenience interface over the same counter space.
  double next_uniform() { return uniform(cursor_++); }
  double next_uniform(double lo, double hi) { return uniform(cursor_++, lo, hi); }
  std::uint64_t next_bits() { return bits(cursor_++); }

 private:
  std::uint64_t key_;
  std::uint64_t cursor_ = 0;
};

}  // namespace gqn::numerics
