#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "aunce/core_math.hpp"
#include "aunce/losses.hpp"
#include "aunce/rng.hpp"
#include "aunce/synthdata.hpp"

namespace aunce {

enum class PositiveKind { HighestSim, Augmented, Mixture, LowestSim };

std::string_view to_string(PositiveKind kind) noexcept;

struct PositiveSelection {
  PositiveKind kind = PositiveKind::Augmented;
  Vec embedding;
  /// Candidate index for HighestSim / LowestSim.
  std::optional<std::size_t> candidate;
  /// True when the drawn kind needed candidates that were not available (or
  /// the mixture collapsed to zero) and the augmented view was used instead.
  bool fell_back = false;
  double draw = 0.0;
};

/// Draws u ~ U(0,1) and picks the positive kind by cumulative thresholds
/// (highest, augmented, mixture, lowest). LowestSim is reachable only when
/// probs.lowest > 0. Ties in arg-max/arg-min go to the lowest index.
PositiveSelection select_positive(RngStream& rng, const PositiveProbs& probs, const Vec& anchor,
                                  std::span<const Vec> candidates, const Vec& augmented,
                                  bool normalize);

/// Index of the candidate with the largest (or smallest) dot product with the
/// anchor; first index wins ties.
std::size_t most_similar(const Vec& anchor, std::span<const Vec> candidates);
std::size_t least_similar(const Vec& anchor, std::span<const Vec> candidates);

/// Value of label i held by its minority class: 1 when rate <= 0.5.
std::uint8_t minority_value(double rate);

/// β for an anchor holding `label_value` of a label with activation rate
/// `rate`: a majority-value anchor gets cfg.beta_minority (its negatives are
/// minority samples), a minority-value anchor gets cfg.beta_majority.
double beta_for_anchor(std::uint8_t label_value, double rate, const AunceConfig& cfg);

struct LabelPlan {
  PositiveKind kind = PositiveKind::Augmented;
  /// Batch indices whose embeddings form the positive: one for
  /// HighestSim/LowestSim, all candidates for Mixture, none for Augmented.
  std::vector<std::size_t> positive_members;
  Vec positive;
  std::vector<std::size_t> negatives;
  double beta = 1.0;
  bool skipped = false;
  bool fell_back = false;
};

struct PairPlan {
  std::size_t anchor = 0;
  std::vector<LabelPlan> labels;

  std::size_t skipped_count() const noexcept;
  std::size_t fallback_count() const noexcept;
};

/// Per-label positive/negative sets for one anchor of a batch. Positive
/// candidates are the other batch members sharing the anchor's observed label
/// value; negatives are every member with the opposite value. A label without
/// negatives is skipped; a label without positive candidates uses the
/// augmented view. Throws ConfigError for batches smaller than 2.
PairPlan build_pair_plan(std::span<const LabeledSample> batch,
                         std::span<const EmbeddingSet> embeddings, std::size_t anchor_index,
                         const EmbeddingSet& augmented, std::span<const double> rates,
                         const AunceConfig& cfg, RngStream& rng);

// ---------------------------------------------------------------------------
// Augmentation

struct AugmentConfig {
  double noise_sigma = 0.05;
  double scale_lo = 0.9;
  double scale_hi = 1.1;
  double mask_fraction = 0.1;

  void validate() const;
};

/// Additive Gaussian noise, then a random global scale, then zeroing of
/// round(mask_fraction * dim) randomly chosen coordinates.
Vec augment(const Vec& x, RngStream& rng, const AugmentConfig& cfg);

/// Stochastic view generator for the augmented positive.
class Augmenter {
 public:
  virtual ~Augmenter() = default;
  virtual Vec apply(const Vec& x, RngStream& rng) const = 0;
};

class VectorAugmenter final : public Augmenter {
 public:
  explicit VectorAugmenter(AugmentConfig cfg);
  Vec apply(const Vec& x, RngStream& rng) const override;
  const AugmentConfig& config() const noexcept { return cfg_; }

 private:
  AugmentConfig cfg_;
};

}  // namespace aunce
