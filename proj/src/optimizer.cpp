#include "aunce/optimizer.hpp"

#include <cmath>

#include "aunce/errors.hpp"

namespace aunce {

void AdamWConfig::validate() const {
  if (!(lr >= 0.0)) throw ConfigError("optimizer: lr must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("optimizer: moment decay rates must lie in [0, 1)");
  }
  if (!(weight_decay >= 0.0)) throw ConfigError("optimizer: weight_decay must be non-negative");
  if (!(eps > 0.0)) throw ConfigError("optimizer: eps must be positive");
}

AdamW::AdamW(std::size_t n_params, AdamWConfig cfg)
    : cfg_(cfg), m_(n_params, 0.0), v_(n_params, 0.0) {
  cfg_.validate();
}

void AdamW::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ContractViolation("AdamW::step: size mismatch");
  }
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double bc1 = 1.0 - std::pow(cfg_.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t);
  const double decay = 1.0 - cfg_.lr * cfg_.weight_decay;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = grads[k];
    m_[k] = cfg_.beta1 * m_[k] + (1.0 - cfg_.beta1) * g;
    v_[k] = cfg_.beta2 * v_[k] + (1.0 - cfg_.beta2) * g * g;
    const double m_hat = m_[k] / bc1;
    const double v_hat = v_[k] / bc2;
    params[k] = params[k] * decay - cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
  }
}

}  // namespace aunce
