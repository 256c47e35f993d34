#include "aunce/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "aunce/errors.hpp"

namespace aunce {

std::vector<double> central_difference(const ScalarFn& f, std::span<const double> x, double h) {
  if (!(h >= 1e-7 && h <= 1e-4)) throw ConfigError("finite-difference step outside [1e-7, 1e-4]");
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double orig = probe[k];
    probe[k] = orig + h;
    const double up = f(probe);
    probe[k] = orig - h;
    const double down = f(probe);
    probe[k] = orig;
    out[k] = (up - down) / (2.0 * h);
  }
  return out;
}

GradCheckReport grad_check(const ScalarFn& f, std::span<const double> x,
                           std::span<const double> analytic, double h, double tol) {
  if (analytic.size() != x.size()) {
    throw ContractViolation("grad_check: analytic gradient has the wrong length");
  }
  const std::vector<double> numeric = central_difference(f, x, h);
  GradCheckReport report;
  report.coordinates = x.size();
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double diff = std::abs(analytic[k] - numeric[k]);
    const double denom = std::max({std::abs(analytic[k]), std::abs(numeric[k]), kGradScaleFloor});
    const double rel = diff / denom;
    report.max_abs_error = std::max(report.max_abs_error, diff);
    if (rel > report.max_rel_error || std::isnan(rel)) {
      report.max_rel_error = rel;
      report.worst_index = k;
    }
  }
  report.passed = report.max_rel_error < tol;
  return report;
}

}  // namespace aunce
