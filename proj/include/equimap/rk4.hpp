#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "equimap/error.hpp"

namespace equimap {

/// Classical fourth-order Runge-Kutta for an autonomous system y' = rhs(y),
/// from parameter 0 to `span` in `steps` equal steps (span may be negative).
template <std::size_t N, class Rhs>
std::array<double, N> rk4_integrate(Rhs&& rhs, std::array<double, N> y, double span, std::size_t steps) {
  if (steps == 0 || span == 0.0) return y;
  const double h = span / static_cast<double>(steps);
  if (h == 0.0) throw NumericError("rk4: step size underflow");
  auto axpy = [](const std::array<double, N>& base, double a, const std::array<double, N>& dir) {
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = base[i] + a * dir[i];
    return out;
  };
  for (std::size_t s = 0; s < steps; ++s) {
    const std::array<double, N> k1 = rhs(y);
    const std::array<double, N> k2 = rhs(axpy(y, 0.5 * h, k1));
    const std::array<double, N> k3 = rhs(axpy(y, 0.5 * h, k2));
    const std::array<double, N> k4 = rhs(axpy(y, h, k3));
    for (std::size_t i = 0; i < N; ++i) {
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!std::isfinite(y[i])) throw NumericError("rk4: solution diverged");
    }
  }
  return y;
}

}  // namespace equimap
