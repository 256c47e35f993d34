#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "aunce/core_math.hpp"

namespace aunce {

/// Per-label class-balancing weights derived from occurrence rates:
/// w_i = (1/r_i) * n / sum_k (1/r_k), so that sum_i w_i = n.
struct AuWeights {
  std::vector<double> w;
  std::vector<double> r;

  std::size_t size() const noexcept { return w.size(); }
};

/// Throws ConfigError unless every rate lies strictly inside (0, 1).
AuWeights au_weights(std::span<const double> rates);

/// All-ones weights over the given rates (the "no w_i" ablation arm).
AuWeights uniform_weights(std::span<const double> rates);

/// Selection probabilities of the four positive kinds. `lowest` is the
/// diagnostic lowest-similarity positive and defaults to 0.
struct PositiveProbs {
  double highest = 0.15;
  double augmented = 0.15;
  double mixture = 0.7;
  double lowest = 0.0;

  bool operator==(const PositiveProbs&) const = default;
};

struct AunceConfig {
  double tau = 0.5;
  /// β used when the anchor holds the majority value of a label, i.e. when
  /// its negatives are minority-class samples.
  double beta_minority = 1.2;
  /// β used when the anchor holds the minority value (negatives are majority).
  double beta_majority = 0.4;
  PositiveProbs probs;
  bool normalize = true;
  /// Probability clamp for the weighted cross-entropy.
  double eps = 1e-7;

  /// Throws ConfigError on out-of-range fields.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Weighted cross-entropy

double wce_loss(std::span<const std::uint8_t> y, std::span<const double> yhat,
                const AuWeights& w, double eps = 1e-7);

/// dL/dyhat of wce_loss. Zero for coordinates that the clamp saturates.
std::vector<double> wce_grad(std::span<const std::uint8_t> y, std::span<const double> yhat,
                             const AuWeights& w, double eps = 1e-7);

struct WceLogitResult {
  double value = 0.0;
  std::vector<double> probs;
  std::vector<double> grad_logits;
};

/// wce_loss evaluated at sigmoid(logits), with the exact gradient with
/// respect to the logits.
WceLogitResult wce_with_logits(std::span<const std::uint8_t> y, std::span<const double> logits,
                               const AuWeights& w, double eps = 1e-7);

double sigmoid(double z) noexcept;

// ---------------------------------------------------------------------------
// Contrastive loss

struct TermGradients {
  Vec anchor;
  Vec positive;
  std::vector<Vec> negatives;
};

struct TermResult {
  double value = 0.0;
  TermGradients grad;
};

/// Single-label contrastive term
///   -log( s+ / (s+ + sum_j (s-_j)^(beta+1)) ),  s = exp(dot / tau),
/// evaluated as log-sum-exp over the logits {u+, (beta+1) u-_j}. Gradients are
/// with respect to the raw input embeddings.
TermResult aunce_term(const Vec& anchor, const Vec& positive, std::span<const Vec> negatives,
                      double beta, double tau);

/// Loss over one anchor's labels.
struct LossOutput {
  double value = 0.0;
  /// Unweighted per-label terms; 0 for skipped labels.
  std::vector<double> per_label;
  std::vector<std::uint8_t> skipped;
  std::size_t skipped_count = 0;
  /// Gradients of `value` (already scaled by w_i / n).
  EmbeddingSet grad_anchor;
  EmbeddingSet grad_positive;
  std::vector<std::vector<Vec>> grad_negatives;
};

/// (1/n) sum_i w_i * aunce_term_i over labels that have a positive and at
/// least one negative. Throws EmptyBatch when every label is skipped.
LossOutput aunce_loss(const EmbeddingSet& anchor_set, std::span<const std::optional<Vec>> positives,
                      std::span<const std::vector<Vec>> negative_sets,
                      std::span<const double> beta_per_label, const AunceConfig& cfg,
                      const AuWeights& w);

/// Per-negative share (s-_j)^beta / sum_k (s-_k)^beta of the gradient
/// magnitude; a softmax of beta * dot / tau.
std::vector<double> gradient_ratio_profile(const Vec& anchor, std::span<const Vec> negatives,
                                           double beta, double tau);

}  // namespace aunce
