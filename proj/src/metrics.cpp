#include "aunce/metrics.hpp"

#include <charconv>

#include "aunce/errors.hpp"

namespace aunce {

ConfusionCounts confusion(const BinaryMatrix& preds, const BinaryMatrix& labels) {
  if (preds.size() != labels.size()) throw ContractViolation("confusion: row counts differ");
  ConfusionCounts out;
  if (labels.empty()) return out;
  const std::size_t n_au = labels.front().size();
  out.labels.resize(n_au);
  for (std::size_t s = 0; s < labels.size(); ++s) {
    if (preds[s].size() != n_au || labels[s].size() != n_au) {
      throw ContractViolation("confusion: row " + std::to_string(s) + " has the wrong width");
    }
    for (std::size_t i = 0; i < n_au; ++i) {
      LabelCounts& c = out.labels[i];
      const bool p = preds[s][i] != 0;
      const bool y = labels[s][i] != 0;
      if (p && y) ++c.tp;
      else if (p) ++c.fp;
      else if (y) ++c.fn;
      else ++c.tn;
    }
  }
  return out;
}

double f1_score(const LabelCounts& c) noexcept {
  const std::size_t denom = 2 * c.tp + c.fp + c.fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

double f1_macro(const ConfusionCounts& c) noexcept {
  if (c.labels.empty()) return 0.0;
  double s = 0.0;
  for (const auto& l : c.labels) s += f1_score(l);
  return s / static_cast<double>(c.labels.size());
}

double f1_micro(const ConfusionCounts& c) noexcept {
  LabelCounts pooled;
  for (const auto& l : c.labels) {
    pooled.tp += l.tp;
    pooled.fp += l.fp;
    pooled.fn += l.fn;
  }
  return f1_score(pooled);
}

double accuracy(const ConfusionCounts& c) noexcept {
  std::size_t correct = 0, total = 0;
  for (const auto& l : c.labels) {
    correct += l.tp + l.tn;
    total += l.total();
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

BinaryMatrix threshold_predictions(const std::vector<std::vector<double>>& probs,
                                   double threshold) {
  BinaryMatrix out;
  out.reserve(probs.size());
  for (const auto& row : probs) {
    std::vector<std::uint8_t> bits;
    bits.reserve(row.size());
    for (double p : row) bits.push_back(p >= threshold ? 1 : 0);
    out.push_back(std::move(bits));
  }
  return out;
}

MetricsReport make_report(const ConfusionCounts& counts) {
  MetricsReport r;
  r.counts = counts;
  for (const auto& l : counts.labels) {
    r.f1_per_label.push_back(f1_score(l));
    const std::size_t t = l.total();
    r.accuracy_per_label.push_back(
        t == 0 ? 0.0 : static_cast<double>(l.tp + l.tn) / static_cast<double>(t));
  }
  r.f1_macro = f1_macro(counts);
  r.f1_micro = f1_micro(counts);
  r.accuracy = accuracy(counts);
  return r;
}

nlohmann::json to_json(const MetricsReport& report) {
  nlohmann::json counts = nlohmann::json::array();
  for (const auto& c : report.counts.labels) {
    counts.push_back({{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}});
  }
  return {{"f1_per_label", report.f1_per_label},
          {"accuracy_per_label", report.accuracy_per_label},
          {"f1_macro", report.f1_macro},
          {"f1_micro", report.f1_micro},
          {"accuracy", report.accuracy},
          {"counts", counts}};
}

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string metrics_csv_header(std::size_t n_au) {
  std::string h;
  for (std::size_t i = 0; i < n_au; ++i) h += "f1_" + std::to_string(i) + ",";
  for (std::size_t i = 0; i < n_au; ++i) h += "acc_" + std::to_string(i) + ",";
  return h + "f1_macro,f1_micro,accuracy";
}

std::string metrics_csv_row(const MetricsReport& report) {
  std::string row;
  for (double v : report.f1_per_label) row += format_double(v) + ",";
  for (double v : report.accuracy_per_label) row += format_double(v) + ",";
  return row + format_double(report.f1_macro) + "," + format_double(report.f1_micro) + "," +
         format_double(report.accuracy);
}

}  // namespace aunce
