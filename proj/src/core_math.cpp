#include "aunce/core_math.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aunce/errors.hpp"

namespace aunce {

namespace {

void require_same_dim(const Vec& a, const Vec& b, const char* op) {
  if (a.size() != b.size()) {
    throw ContractViolation(std::string(op) + ": dimension mismatch (" +
                            std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")");
  }
}

}  // namespace

double dot(const Vec& a, const Vec& b) {
  require_same_dim(a, b, "dot");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

double exp_sim(const Vec& a, const Vec& b, double tau) {
  if (!(tau > 0.0)) throw ConfigError("exp_sim: temperature must be positive");
  return std::exp(dot(a, b) / tau);
}

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) throw ContractViolation("log_sum_exp: empty input");
  const double m = *std::max_element(xs.begin(), xs.end());
  if (std::isinf(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

Vec l2_normalize(const Vec& a, double eps) {
  const double n = norm(a);
  if (!std::isfinite(n)) throw NumericFailure("l2_normalize: non-finite vector");
  if (!(n > eps)) throw DegenerateInput("l2_normalize: vector norm is (near) zero");
  return scaled(a, 1.0 / n);
}

Vec l2_normalize_backward(const Vec& v, const Vec& g, double eps) {
  require_same_dim(v, g, "l2_normalize_backward");
  const double n = norm(v);
  if (!std::isfinite(n)) throw NumericFailure("l2_normalize_backward: non-finite vector");
  if (!(n > eps)) throw DegenerateInput("l2_normalize_backward: vector norm is (near) zero");
  const double inv = 1.0 / n;
  double proj = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) proj += g[k] * v[k] * inv;
  Vec out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = (g[k] - proj * v[k] * inv) * inv;
  return out;
}

void axpy(double alpha, const Vec& x, Vec& y) {
  require_same_dim(x, y, "axpy");
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += alpha * x[k];
}

Vec scaled(const Vec& a, double alpha) {
  Vec out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = alpha * a[k];
  return out;
}

Vec mean(std::span<const Vec> xs) {
  if (xs.empty()) throw DegenerateInput("mean: empty list");
  Vec out(xs.front().size());
  for (const Vec& x : xs) axpy(1.0, x, out);
  return scaled(out, 1.0 / static_cast<double>(xs.size()));
}

bool all_finite(std::span<const double> xs) noexcept {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace aunce
