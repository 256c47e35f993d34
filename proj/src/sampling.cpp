#include "aunce/sampling.hpp"

#include <array>
#include <cmath>
#include <numeric>

#include "aunce/errors.hpp"

namespace aunce {

std::string_view to_string(PositiveKind kind) noexcept {
  switch (kind) {
    case PositiveKind::HighestSim: return "highest";
    case PositiveKind::Augmented: return "augmented";
    case PositiveKind::Mixture: return "mixture";
    case PositiveKind::LowestSim: return "lowest";
  }
  return "unknown";
}

std::size_t most_similar(const Vec& anchor, std::span<const Vec> candidates) {
  if (candidates.empty()) throw DegenerateInput("most_similar: no candidates");
  std::size_t best = 0;
  double best_sim = dot(anchor, candidates[0]);
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    const double s = dot(anchor, candidates[k]);
    if (s > best_sim) {
      best_sim = s;
      best = k;
    }
  }
  return best;
}

std::size_t least_similar(const Vec& anchor, std::span<const Vec> candidates) {
  if (candidates.empty()) throw DegenerateInput("least_similar: no candidates");
  std::size_t best = 0;
  double best_sim = dot(anchor, candidates[0]);
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    const double s = dot(anchor, candidates[k]);
    if (s < best_sim) {
      best_sim = s;
      best = k;
    }
  }
  return best;
}

PositiveSelection select_positive(RngStream& rng, const PositiveProbs& probs, const Vec& anchor,
                                  std::span<const Vec> candidates, const Vec& augmented,
                                  bool normalize) {
  constexpr std::array kKinds = {PositiveKind::HighestSim, PositiveKind::Augmented,
                                 PositiveKind::Mixture, PositiveKind::LowestSim};
  const std::array weights = {probs.highest, probs.augmented, probs.mixture, probs.lowest};

  PositiveSelection out;
  out.draw = rng.uniform();

  // u lies in (0, 1); kinds with zero probability are never chosen, including
  // when rounding leaves the cumulative sum a hair below 1.
  std::optional<PositiveKind> chosen;
  std::optional<PositiveKind> last_nonzero;
  double acc = 0.0;
  for (std::size_t k = 0; k < kKinds.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    acc += weights[k];
    last_nonzero = kKinds[k];
    if (!chosen && out.draw <= acc) chosen = kKinds[k];
  }
  if (!last_nonzero) throw ConfigError("select_positive: all probabilities are zero");
  out.kind = chosen.value_or(*last_nonzero);

  const auto use_augmented = [&](bool fallback) {
    out.kind = PositiveKind::Augmented;
    out.embedding = augmented;
    out.candidate.reset();
    out.fell_back = fallback;
  };

  if (out.kind != PositiveKind::Augmented && candidates.empty()) {
    use_augmented(true);
    return out;
  }
  switch (out.kind) {
    case PositiveKind::HighestSim:
      out.candidate = most_similar(anchor, candidates);
      out.embedding = candidates[*out.candidate];
      break;
    case PositiveKind::LowestSim:
      out.candidate = least_similar(anchor, candidates);
      out.embedding = candidates[*out.candidate];
      break;
    case PositiveKind::Mixture: {
      Vec m = mean(candidates);
      if (normalize) {
        if (!(norm(m) > kNormEpsilon)) {
          use_augmented(true);
          break;
        }
        m = l2_normalize(m);
      }
      out.embedding = std::move(m);
      break;
    }
    case PositiveKind::Augmented:
      use_augmented(false);
      break;
  }
  return out;
}

std::uint8_t minority_value(double rate) {
  if (!(rate > 0.0 && rate < 1.0)) throw ConfigError("minority_value: rate outside (0, 1)");
  return rate <= 0.5 ? 1 : 0;
}

double beta_for_anchor(std::uint8_t label_value, double rate, const AunceConfig& cfg) {
  const bool anchor_is_minority = (label_value != 0) == (minority_value(rate) != 0);
  return anchor_is_minority ? cfg.beta_majority : cfg.beta_minority;
}

std::size_t PairPlan::skipped_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : labels) n += l.skipped ? 1 : 0;
  return n;
}

std::size_t PairPlan::fallback_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : labels) n += l.fell_back ? 1 : 0;
  return n;
}

PairPlan build_pair_plan(std::span<const LabeledSample> batch,
                         std::span<const EmbeddingSet> embeddings, std::size_t anchor_index,
                         const EmbeddingSet& augmented, std::span<const double> rates,
                         const AunceConfig& cfg, RngStream& rng) {
  if (batch.size() < 2) throw ConfigError("build_pair_plan: batch must hold at least 2 samples");
  if (embeddings.size() != batch.size()) {
    throw ContractViolation("build_pair_plan: embeddings not aligned with batch");
  }
  if (anchor_index >= batch.size()) throw ContractViolation("build_pair_plan: bad anchor index");
  const LabeledSample& anchor = batch[anchor_index];
  const std::size_t n_au = anchor.labels.size();
  if (rates.size() != n_au || augmented.size() != n_au ||
      embeddings[anchor_index].size() != n_au) {
    throw ContractViolation("build_pair_plan: per-label inputs not aligned");
  }

  PairPlan plan;
  plan.anchor = anchor_index;
  plan.labels.resize(n_au);
  std::vector<std::size_t> candidate_ids;
  std::vector<Vec> candidates;
  for (std::size_t i = 0; i < n_au; ++i) {
    LabelPlan& lp = plan.labels[i];
    const std::uint8_t value = anchor.labels[i];
    candidate_ids.clear();
    candidates.clear();
    for (std::size_t j = 0; j < batch.size(); ++j) {
      if (j == anchor_index) continue;
      if (batch[j].labels[i] == value) {
        candidate_ids.push_back(j);
        candidates.push_back(embeddings[j][i]);
      } else {
        lp.negatives.push_back(j);
      }
    }
    lp.beta = beta_for_anchor(value, rates[i], cfg);

    if (lp.negatives.empty()) {
      rng.uniform();  // keep one draw per label so later labels replay identically
      lp.skipped = true;
      continue;
    }
    PositiveSelection sel = select_positive(rng, cfg.probs, embeddings[anchor_index][i],
                                            candidates, augmented[i], cfg.normalize);
    lp.kind = sel.kind;
    lp.fell_back = sel.fell_back;
    lp.positive = std::move(sel.embedding);
    if (sel.candidate) {
      lp.positive_members = {candidate_ids[*sel.candidate]};
    } else if (sel.kind == PositiveKind::Mixture) {
      lp.positive_members = candidate_ids;
    }
  }
  return plan;
}

void AugmentConfig::validate() const {
  if (!(noise_sigma >= 0.0)) throw ConfigError("augment: noise_sigma must be non-negative");
  if (!(scale_lo > 0.0 && scale_lo <= scale_hi)) {
    throw ConfigError("augment: scale range must satisfy 0 < lo <= hi");
  }
  if (!(mask_fraction >= 0.0 && mask_fraction <= 1.0)) {
    throw ConfigError("augment: mask_fraction must lie in [0, 1]");
  }
}

Vec augment(const Vec& x, RngStream& rng, const AugmentConfig& cfg) {
  cfg.validate();
  Vec out = x;
  if (cfg.noise_sigma > 0.0) {
    for (double& v : out) v += cfg.noise_sigma * rng.normal();
  }
  const double scale = rng.uniform(cfg.scale_lo, cfg.scale_hi);
  for (double& v : out) v *= scale;

  const auto n_mask = static_cast<std::size_t>(
      std::llround(cfg.mask_fraction * static_cast<double>(out.size())));
  if (n_mask > 0) {
    // partial Fisher-Yates over coordinate indices
    std::vector<std::size_t> idx(out.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t k = 0; k < n_mask; ++k) {
      const auto j = k + static_cast<std::size_t>(rng.index(idx.size() - k));
      std::swap(idx[k], idx[j]);
      out[idx[k]] = 0.0;
    }
  }
  return out;
}

VectorAugmenter::VectorAugmenter(AugmentConfig cfg) : cfg_(cfg) { cfg_.validate(); }

Vec VectorAugmenter::apply(const Vec& x, RngStream& rng) const { return augment(x, rng, cfg_); }

}  // namespace aunce
