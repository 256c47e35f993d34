#include "aunce/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aunce/errors.hpp"

namespace aunce {

namespace {

void check_rates(std::span<const double> rates) {
  if (rates.empty()) throw ConfigError("occurrence rates: empty list");
  for (double r : rates) {
    if (!(r > 0.0 && r < 1.0)) {
      throw ConfigError("occurrence rate " + std::to_string(r) + " outside (0, 1)");
    }
  }
}

void check_wce_shapes(std::size_t ny, std::size_t nhat, const AuWeights& w) {
  if (ny != nhat || ny != w.size()) {
    throw ContractViolation("wce: label, prediction and weight lengths differ");
  }
  if (ny == 0) throw ContractViolation("wce: empty label vector");
}

double clamp_prob(double p, double eps) { return std::clamp(p, eps, 1.0 - eps); }

}  // namespace

AuWeights au_weights(std::span<const double> rates) {
  check_rates(rates);
  const auto n = static_cast<double>(rates.size());
  double inv_sum = 0.0;
  for (double r : rates) inv_sum += 1.0 / r;
  AuWeights out;
  out.r.assign(rates.begin(), rates.end());
  out.w.reserve(rates.size());
  for (double r : rates) out.w.push_back((1.0 / r) * n / inv_sum);
  return out;
}

AuWeights uniform_weights(std::span<const double> rates) {
  check_rates(rates);
  return AuWeights{std::vector<double>(rates.size(), 1.0),
                   std::vector<double>(rates.begin(), rates.end())};
}

void AunceConfig::validate() const {
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  if (!(beta_minority > 0.0) || !(beta_majority > 0.0)) {
    throw ConfigError("beta values must be positive");
  }
  for (double p : {probs.highest, probs.augmented, probs.mixture, probs.lowest}) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("positive-kind probability outside [0, 1]");
  }
  const double total = probs.highest + probs.augmented + probs.mixture + probs.lowest;
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("positive-kind probabilities must sum to 1 (got " + std::to_string(total) +
                      ")");
  }
  if (!(eps > 0.0 && eps < 0.5)) throw ConfigError("eps must lie in (0, 0.5)");
}

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double wce_loss(std::span<const std::uint8_t> y, std::span<const double> yhat, const AuWeights& w,
                double eps) {
  check_wce_shapes(y.size(), yhat.size(), w);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = clamp_prob(yhat[i], eps);
    s += w.w[i] * (y[i] ? std::log(p) : std::log(1.0 - p));
  }
  return -s / static_cast<double>(y.size());
}

std::vector<double> wce_grad(std::span<const std::uint8_t> y, std::span<const double> yhat,
                             const AuWeights& w, double eps) {
  check_wce_shapes(y.size(), yhat.size(), w);
  const auto n = static_cast<double>(y.size());
  std::vector<double> g(y.size(), 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = yhat[i];
    if (p <= eps || p >= 1.0 - eps) continue;
    g[i] = -(w.w[i] / n) * (y[i] ? 1.0 / p : -1.0 / (1.0 - p));
  }
  return g;
}

WceLogitResult wce_with_logits(std::span<const std::uint8_t> y, std::span<const double> logits,
                               const AuWeights& w, double eps) {
  check_wce_shapes(y.size(), logits.size(), w);
  WceLogitResult out;
  out.probs.reserve(logits.size());
  for (double z : logits) out.probs.push_back(sigmoid(z));
  out.value = wce_loss(y, out.probs, w, eps);
  const auto n = static_cast<double>(y.size());
  out.grad_logits.assign(y.size(), 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = out.probs[i];
    if (p <= eps || p >= 1.0 - eps) continue;
    out.grad_logits[i] = (w.w[i] / n) * (p - static_cast<double>(y[i]));
  }
  return out;
}

TermResult aunce_term(const Vec& anchor, const Vec& positive, std::span<const Vec> negatives,
                      double beta, double tau) {
  if (negatives.empty()) throw DegenerateInput("aunce_term: empty negative set");
  if (!(tau > 0.0)) throw ConfigError("aunce_term: tau must be positive");
  if (!(beta > 0.0)) throw ConfigError("aunce_term: beta must be positive");

  const double power = beta + 1.0;
  std::vector<double> logits;
  logits.reserve(negatives.size() + 1);
  logits.push_back(dot(anchor, positive) / tau);
  for (const Vec& neg : negatives) logits.push_back(power * dot(anchor, neg) / tau);

  const double lse = log_sum_exp(logits);
  TermResult out;
  out.value = lse - logits[0];

  // softmax weights q_k = exp(logit_k - lse)
  const double q_pos = std::exp(logits[0] - lse);
  const double coef_pos = (q_pos - 1.0) / tau;

  out.grad.anchor = scaled(positive, coef_pos);
  out.grad.positive = scaled(anchor, coef_pos);
  out.grad.negatives.reserve(negatives.size());
  for (std::size_t j = 0; j < negatives.size(); ++j) {
    const double coef = std::exp(logits[j + 1] - lse) * power / tau;
    axpy(coef, negatives[j], out.grad.anchor);
    out.grad.negatives.push_back(scaled(anchor, coef));
  }
  return out;
}

LossOutput aunce_loss(const EmbeddingSet& anchor_set, std::span<const std::optional<Vec>> positives,
                      std::span<const std::vector<Vec>> negative_sets,
                      std::span<const double> beta_per_label, const AunceConfig& cfg,
                      const AuWeights& w) {
  const std::size_t n_au = anchor_set.size();
  if (positives.size() != n_au || negative_sets.size() != n_au || beta_per_label.size() != n_au ||
      w.size() != n_au) {
    throw ContractViolation("aunce_loss: per-label inputs are not aligned");
  }
  const double inv_n = 1.0 / static_cast<double>(n_au);

  LossOutput out;
  out.per_label.assign(n_au, 0.0);
  out.skipped.assign(n_au, 0);
  out.grad_anchor.reserve(n_au);
  out.grad_positive.reserve(n_au);
  out.grad_negatives.resize(n_au);

  for (std::size_t i = 0; i < n_au; ++i) {
    const Vec& anchor = anchor_set[i];
    const std::vector<Vec>& negs = negative_sets[i];
    if (!positives[i] || negs.empty()) {
      out.skipped[i] = 1;
      ++out.skipped_count;
      out.grad_anchor.emplace_back(anchor.size());
      out.grad_positive.emplace_back(anchor.size());
      out.grad_negatives[i].assign(negs.size(), Vec(anchor.size()));
      continue;
    }
    TermResult term = aunce_term(anchor, *positives[i], negs, beta_per_label[i], cfg.tau);
    const double scale = w.w[i] * inv_n;
    out.per_label[i] = term.value;
    out.value += scale * term.value;
    out.grad_anchor.push_back(scaled(term.grad.anchor, scale));
    out.grad_positive.push_back(scaled(term.grad.positive, scale));
    out.grad_negatives[i].reserve(negs.size());
    for (const Vec& g : term.grad.negatives) out.grad_negatives[i].push_back(scaled(g, scale));
  }
  if (out.skipped_count == n_au) throw EmptyBatch("aunce_loss: every label was skipped");
  return out;
}

std::vector<double> gradient_ratio_profile(const Vec& anchor, std::span<const Vec> negatives,
                                           double beta, double tau) {
  if (negatives.empty()) throw DegenerateInput("gradient_ratio_profile: empty negative set");
  if (!(tau > 0.0)) throw ConfigError("gradient_ratio_profile: tau must be positive");
  std::vector<double> logits;
  logits.reserve(negatives.size());
  for (const Vec& neg : negatives) logits.push_back(beta * dot(anchor, neg) / tau);
  const double lse = log_sum_exp(logits);
  for (double& x : logits) x = std::exp(x - lse);
  return logits;
}

}  // namespace aunce
