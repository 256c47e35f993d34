#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace aunce {

using ScalarFn = std::function<double(std::span<const double>)>;

/// Below this magnitude a gradient coordinate is compared on an absolute scale
/// (the relative-error denominator never drops under it).
inline constexpr double kGradScaleFloor = 1e-2;

struct GradCheckReport {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t coordinates = 0;
  bool passed = true;
};

/// Central differences (f(x + h e_k) - f(x - h e_k)) / 2h for every k.
/// Throws ConfigError unless h lies in [1e-7, 1e-4].
std::vector<double> central_difference(const ScalarFn& f, std::span<const double> x, double h);

/// Compares `analytic` against central differences of f at x. Relative error
/// per coordinate is |a - n| / max(|a|, |n|, kGradScaleFloor); the check
/// passes iff the maximum is below tol.
GradCheckReport grad_check(const ScalarFn& f, std::span<const double> x,
                           std::span<const double> analytic, double h, double tol);

}  // namespace aunce
