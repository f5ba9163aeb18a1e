#pragma once

#include <cmath>
#include <numbers>

namespace insar {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps to (-pi, pi]; an exact -pi maps to +pi.
inline double wrap_phase(double x) {
  double r = std::remainder(x, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

}  // namespace insar
