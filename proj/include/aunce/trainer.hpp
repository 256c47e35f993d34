#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "aunce/encoder.hpp"
#include "aunce/errors.hpp"
#include "aunce/losses.hpp"
#include "aunce/metrics.hpp"
#include "aunce/optimizer.hpp"
#include "aunce/sampling.hpp"
#include "aunce/synthdata.hpp"

namespace aunce {

struct EpochRecord {
  std::string stage;
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  std::size_t batches = 0;
  std::size_t anchors = 0;
  /// Labels skipped for lack of in-batch negatives, summed over anchors.
  std::size_t skipped_labels = 0;
  /// Positives that fell back to the augmented view.
  std::size_t fallbacks = 0;
  /// Anchors whose every label was skipped.
  std::size_t empty_anchors = 0;
  /// Not serialized by default: it is the one field that differs between
  /// otherwise identical runs.
  double wall_seconds = 0.0;

  bool same_outcome(const EpochRecord& other) const noexcept;
};

struct TrainRun {
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::vector<EpochRecord> records;
  /// Set when training stopped on a non-finite value.
  std::string abort_reason;

  bool same_outcome(const TrainRun& other) const noexcept;
};

nlohmann::json to_json(const EpochRecord& r, bool include_timing = false);
/// One JSON document per epoch, newline-terminated.
std::string to_jsonl(const TrainRun& run, bool include_timing = false);
nlohmann::json summary_json(const TrainRun& run);

/// Thrown when a loss or activation turns non-finite; carries the partial run
/// with the failing epoch recorded.
class TrainingAborted : public NumericFailure {
 public:
  TrainingAborted(const std::string& what, TrainRun partial)
      : NumericFailure(what), partial_(std::move(partial)) {}
  const TrainRun& partial_run() const noexcept { return partial_; }

 private:
  TrainRun partial_;
};

// ---------------------------------------------------------------------------
// Stage 1: contrastive pretraining

struct PretrainConfig {
  AunceConfig loss;
  AugmentConfig augment;
  std::size_t epochs = 60;
  std::size_t batch_size = 32;
  AdamWConfig optim;
  /// Use class-balancing w_i (otherwise all weights are 1).
  bool use_label_weights = true;

  void validate() const;
};

nlohmann::json to_json(const PretrainConfig& cfg);

struct PretrainResult {
  EncoderParams encoder;
  TrainRun run;
};

/// Every epoch reshuffles the set with a seeded stream; every batch member
/// serves once as anchor; the batch gradient is the mean over anchors with at
/// least one usable label. A trailing batch of one sample is dropped.
PretrainResult pretrain(const Dataset& train, const EncoderParams& init, const PretrainConfig& cfg,
                        std::uint64_t seed);

// ---------------------------------------------------------------------------
// Stage 2: linear evaluation on the frozen encoder

/// One logistic unit per label over that label's embedding.
class LinearClassifier {
 public:
  LinearClassifier(std::size_t n_au, std::size_t embed_dim);

  std::size_t n_au() const noexcept { return n_au_; }
  std::size_t embed_dim() const noexcept { return embed_dim_; }
  /// Per label: embed_dim weights followed by one bias.
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  std::vector<double> logits(const EmbeddingSet& emb) const;
  std::vector<double> probabilities(const EmbeddingSet& emb) const;

 private:
  std::size_t n_au_;
  std::size_t embed_dim_;
  std::vector<double> values_;
};

struct LinearEvalConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 256;
  AdamWConfig optim{.lr = 1e-2};
  double threshold = 0.5;
  bool normalize = true;
  double eps = 1e-7;

  void validate() const;
};

nlohmann::json to_json(const LinearEvalConfig& cfg);

struct LinearEvalResult {
  LinearClassifier classifier;
  MetricsReport metrics;
  TrainRun run;
};

/// Trains the per-label probes with the weighted cross-entropy on observed
/// labels, then scores the test split against its clean labels. Throws
/// ContractViolation if the encoder changed (it never should).
LinearEvalResult linear_eval(const EncoderParams& frozen, const Dataset& train, const Dataset& test,
                             const AuWeights& w, const LinearEvalConfig& cfg, std::uint64_t seed);

/// Test-set metrics (against clean labels) of an encoder + probe pair.
MetricsReport evaluate(const EncoderParams& encoder, const LinearClassifier& classifier,
                       const Dataset& test, bool normalize, double threshold);

// ---------------------------------------------------------------------------
// End-to-end cross-entropy baseline

struct BaselineConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  AdamWConfig optim;
  double threshold = 0.5;
  bool normalize = true;
  double eps = 1e-7;

  void validate() const;
};

nlohmann::json to_json(const BaselineConfig& cfg);

struct BaselineResult {
  EncoderParams encoder;
  LinearClassifier classifier;
  MetricsReport metrics;
  TrainRun run;
};

/// Trains encoder and probes jointly with the weighted cross-entropy only.
BaselineResult baseline_e2e(const Dataset& train, const Dataset& test, const EncoderParams& init,
                            const AuWeights& w, const BaselineConfig& cfg, std::uint64_t seed);

/// Clamped empirical rates of the observed training labels.
std::vector<double> training_rates(const Dataset& train);

}  // namespace aunce
