#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace aunce {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double weight_decay = 1e-6;
  double eps = 1e-8;

  void validate() const;
};

/// Adaptive-moment optimizer with decoupled weight decay. One step:
///   p <- p * (1 - lr * wd)
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
///   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
/// with bias-corrected m_hat, v_hat.
class AdamW {
 public:
  AdamW(std::size_t n_params, AdamWConfig cfg);

  void step(std::span<double> params, std::span<const double> grads);

  const AdamWConfig& config() const noexcept { return cfg_; }
  std::uint64_t steps() const noexcept { return steps_; }
  const std::vector<double>& first_moment() const noexcept { return m_; }
  const std::vector<double>& second_moment() const noexcept { return v_; }

 private:
  AdamWConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::uint64_t steps_ = 0;
};

}  // namespace aunce
