#pragma once

#include <cmath>
#include <numbers>

namespace ftrack {

// Wraps an angle into (-pi, pi].
inline double NormalizeAngle(double a) {
  constexpr double kPi = std::numbers::pi;
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

}  // namespace ftrack
