#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace aunce {

/// Rows are samples, columns are labels.
using BinaryMatrix = std::vector<std::vector<std::uint8_t>>;

struct LabelCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  bool operator==(const LabelCounts&) const = default;
};

struct ConfusionCounts {
  std::vector<LabelCounts> labels;
};

/// Throws ContractViolation when the shapes differ or rows are ragged.
ConfusionCounts confusion(const BinaryMatrix& preds, const BinaryMatrix& labels);

/// 2tp / (2tp + fp + fn); 0 when the denominator is 0.
double f1_score(const LabelCounts& c) noexcept;
double f1_macro(const ConfusionCounts& c) noexcept;
/// F1 of the counts pooled over labels; 0 when the pooled denominator is 0.
double f1_micro(const ConfusionCounts& c) noexcept;
/// Fraction of correct (sample, label) decisions, pooled over labels.
double accuracy(const ConfusionCounts& c) noexcept;

/// Predicts 1 where probability >= threshold.
BinaryMatrix threshold_predictions(const std::vector<std::vector<double>>& probs,
                                   double threshold = 0.5);

struct MetricsReport {
  std::vector<double> f1_per_label;
  std::vector<double> accuracy_per_label;
  double f1_macro = 0.0;
  double f1_micro = 0.0;
  double accuracy = 0.0;
  ConfusionCounts counts;
};

MetricsReport make_report(const ConfusionCounts& counts);

nlohmann::json to_json(const MetricsReport& report);
/// f1_0..f1_{n-1}, acc_0..acc_{n-1}, f1_macro, f1_micro, accuracy
std::string metrics_csv_header(std::size_t n_au);
std::string metrics_csv_row(const MetricsReport& report);

/// Shortest round-trip decimal rendering used in every CSV the tools emit.
std::string format_double(double x);

}  // namespace aunce
