#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aunce/encoder.hpp"
#include "aunce/losses.hpp"
#include "aunce/metrics.hpp"
#include "aunce/sampling.hpp"
#include "aunce/synthdata.hpp"
#include "aunce/trainer.hpp"

namespace aunce {

/// Component switches of the ablation grid: class weights w_i, the
/// probabilistic positive sampling (PS) and negative re-weighting (NS).
struct AblationSwitches {
  bool use_wi = true;
  bool use_ps = true;
  bool use_ns = true;

  bool operator==(const AblationSwitches&) const = default;
};

struct ExperimentConfig {
  GeneratorSpec generator;
  AunceConfig aunce;
  AugmentConfig augment;
  std::size_t hidden = 128;
  std::size_t embed_dim = 32;
  std::size_t pretrain_epochs = 60;
  std::size_t batch_size = 32;
  double pretrain_lr = 1e-3;
  double weight_decay = 1e-6;
  std::size_t linear_epochs = 100;
  std::size_t linear_batch_size = 256;
  double linear_lr = 1e-2;
  double train_fraction = 0.8;
  double threshold = 0.5;
  /// β applied to every anchor when NS is switched off.
  double beta_uniform = 1.0;
  AblationSwitches switches;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};

  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);

// Named generator fixtures used by the tests and the CLI's --fixture flag.
GeneratorSpec separable_fixture();  // 2 labels, rates .5/.5, sigma 0.2
GeneratorSpec imbalance_fixture();  // 2 labels, rates .05/.5, sigma 0.3
GeneratorSpec noise_fixture();      // 4 labels, flip rate 0.2
GeneratorSpec standard_fixture();   // 4 imbalanced labels, sigma 0.4, flip rate 0.1
GeneratorSpec fixture_by_name(std::string_view name);
std::vector<std::string> fixture_names();

/// Loss configuration after applying the ablation switches: PS off pins the
/// positives to the highest-similarity kind, NS off sets both β to
/// cfg.beta_uniform.
AunceConfig effective_loss_config(const ExperimentConfig& cfg, const AblationSwitches& sw);

/// Child seeds for the stages of one run, derived from the run seed.
struct RunSeeds {
  std::uint64_t split;
  std::uint64_t init;
  std::uint64_t pretrain;
  std::uint64_t linear;
};
RunSeeds run_seeds(std::uint64_t seed);

EncoderDims encoder_dims(const ExperimentConfig& cfg, const Dataset& data);
PretrainConfig pretrain_config(const ExperimentConfig& cfg, const AblationSwitches& sw);
LinearEvalConfig linear_config(const ExperimentConfig& cfg);
BaselineConfig baseline_config(const ExperimentConfig& cfg);

struct ContrastiveOutcome {
  PretrainResult pretrain;
  LinearEvalResult linear;
};

/// Seeded split, encoder init, contrastive pretraining and linear evaluation.
ContrastiveOutcome run_contrastive(const Dataset& data, const ExperimentConfig& cfg,
                                   const AblationSwitches& sw, std::uint64_t seed);

BaselineResult run_baseline(const Dataset& data, const ExperimentConfig& cfg, std::uint64_t seed);

struct ModelVariant {
  std::string name;
  AblationSwitches switches;
};

/// A: none, B: +w_i, C: +w_i+PS, D: +w_i+NS, E: all.
std::vector<ModelVariant> ablation_models();

struct ResultRow {
  std::string variant;
  std::uint64_t seed = 0;
  MetricsReport metrics;
};

struct VariantSummary {
  std::string variant;
  std::size_t runs = 0;
  double f1_macro_mean = 0.0, f1_macro_sd = 0.0;
  double f1_micro_mean = 0.0, f1_micro_sd = 0.0;
  double accuracy_mean = 0.0, accuracy_sd = 0.0;
  std::vector<double> f1_per_label_mean;
};

/// Sample standard deviation (n - 1); 0 for fewer than two values.
double sample_sd(std::span<const double> xs);

/// Summaries in first-appearance order of the variants.
std::vector<VariantSummary> summarize(const std::vector<ResultRow>& rows);
const VariantSummary& find_summary(const std::vector<VariantSummary>& s, std::string_view name);

std::string rows_csv(const std::vector<ResultRow>& rows);
std::string summary_csv(const std::vector<VariantSummary>& s);
nlohmann::json summary_json(const std::vector<VariantSummary>& s);

/// Models A-E over cfg.seeds; rows ordered by model, then seed.
std::vector<ResultRow> run_ablation(const Dataset& data, const ExperimentConfig& cfg);

struct SweepPoint {
  std::string name;
  AunceConfig loss;
};

/// "probs": the ten positive-probability rows of the reference grid;
/// "beta": β_minority over 0.8..1.8 at β_majority = 0.4, then β_majority over
/// 0.2..1.2 at β_minority = 1.2 (the shared point appears once).
/// Throws ConfigError for any other axis.
std::vector<SweepPoint> sweep_grid(const ExperimentConfig& cfg, std::string_view axis);

/// Full model (all switches on) at every grid point over cfg.seeds.
std::vector<ResultRow> run_sweep(const Dataset& data, const ExperimentConfig& cfg,
                                 std::string_view axis);

struct GradcheckSuiteReport {
  std::size_t trials = 0;
  double aunce_max_rel = 0.0;
  double wce_max_rel = 0.0;
  double encoder_max_rel = 0.0;
  double tolerance = 1e-6;
  bool passed = false;
};

nlohmann::json to_json(const GradcheckSuiteReport& r);

/// Central-difference checks (h = 1e-6) of the contrastive term, the weighted
/// cross-entropy and the encoder backward pass on `trials` seeded random
/// instances each. `inject_fault` negates the analytic gradients. Throws
/// ConfigError when trials == 0.
GradcheckSuiteReport run_gradcheck(std::uint64_t seed, std::size_t trials,
                                   bool inject_fault = false);

}  // namespace aunce
