#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace gqn::reference {

// Default toy training run (toy_scene(0), GqnConfig::toy(), 200 steps at
// lr 1e-2), recorded once from this implementation.
inline const std::vector<std::pair<std::size_t, double>>& reference_curve() {
  static const std::vector<std::pair<std::size_t, double>> points{
      {0, 0.70411591717182986},   {1, 0.25695984043487502},   {10, 0.11491175965744992},
      {50, 0.036729356331984868}, {100, 0.019851501124938505}, {150, 0.013359078780102673},
      {200, 0.010142452592401542}};
  return points;
}

inline constexpr double kReferenceRelTolerance = 1e-9;

}  // namespace gqn::reference
