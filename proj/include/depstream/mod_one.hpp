#pragma once

#include <cmath>

#include "depstream/errors.hpp"

namespace depstream {

/// Largest double below one.
inline constexpr double kBelowOne = 1.0 - 0x1.0p-53;

/// Clamps a computed uniform into [0, 1-ulp]. Guards against round-off
/// pushing a bookkeeping value just outside the unit interval.
inline double clamp_unit(double u) {
  if (!(u > 0.0)) return 0.0;
  if (u >= 1.0) return kBelowOne;
  return u;
}

/// r - floor(r), in [0,1).
inline double mod_one(double r) {
  if (!std::isfinite(r)) throw NumericError("mod_one: non-finite argument");
  const double value = r - std::floor(r);
  // Tiny negative r rounds r - floor(r) up to exactly 1.
  return value < 1.0 ? value : kBelowOne;
}

/// Adds a stream output to an auxiliary uniform with wraparound at one.
/// Leaves Uniform[0,1) invariant for any fixed d.
inline double operator1(double u, double d) { return mod_one(u + d); }

}  // namespace depstream
