#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace aunce {

/// Fixed-dimension dense vector of doubles. Dimension is set at construction;
/// binary operations require equal dimensions.
class Vec {
 public:
  Vec() = default;
  explicit Vec(std::size_t dim, double fill = 0.0) : values_(dim, fill) {}
  Vec(std::initializer_list<double> values) : values_(values) {}
  explicit Vec(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  std::span<double> span() noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  bool operator==(const Vec&) const = default;

 private:
  std::vector<double> values_;
};

/// One embedding per label, as produced by the encoder for a single sample.
using EmbeddingSet = std::vector<Vec>;

/// Default threshold below which a vector norm counts as zero.
inline constexpr double kNormEpsilon = 1e-12;

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);

/// exp(dot(a, b) / tau). Throws ConfigError when tau <= 0.
double exp_sim(const Vec& a, const Vec& b, double tau);

/// log(sum(exp(xs))) with max-shift. Throws ContractViolation on empty input.
double log_sum_exp(std::span<const double> xs);

/// a / |a|. Throws DegenerateInput when |a| <= eps and NumericFailure when the
/// norm is not finite.
Vec l2_normalize(const Vec& a, double eps = kNormEpsilon);

/// Gradient of v -> v/|v| pulled back through upstream g:
/// (g - (g . v_hat) v_hat) / |v|.
Vec l2_normalize_backward(const Vec& v, const Vec& g, double eps = kNormEpsilon);

/// y += alpha * x
void axpy(double alpha, const Vec& x, Vec& y);

Vec scaled(const Vec& a, double alpha);

/// Arithmetic mean of equal-dimension vectors. Throws DegenerateInput on an
/// empty list.
Vec mean(std::span<const Vec> xs);

bool all_finite(std::span<const double> xs) noexcept;
inline bool all_finite(const Vec& v) noexcept { return all_finite(v.span()); }

}  // namespace aunce
