#include "aunce/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace aunce {

namespace {

using Clock = std::chrono::steady_clock;

enum StreamId : std::uint64_t { kShuffle = 1, kAnchors = 2 };

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

EmbeddingSet zeros_like(std::size_t n_au, std::size_t dim) {
  return EmbeddingSet(n_au, Vec(dim));
}

void check_dataset(const Dataset& data, const EncoderDims& dims, const char* who) {
  if (data.empty()) throw ConfigError(std::string(who) + ": empty dataset");
  for (const auto& s : data) {
    if (s.features.size() != dims.feature_dim || s.labels.size() != dims.n_au ||
        s.clean_labels.size() != dims.n_au) {
      throw ContractViolation(std::string(who) + ": dataset does not match encoder dimensions");
    }
  }
}

std::vector<std::size_t> shuffled_order(std::size_t n, RngStream rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  return order;
}

void scale_in_place(std::span<double> xs, double alpha) {
  for (double& x : xs) x *= alpha;
}

struct ContrastiveBatch {
  double loss = 0.0;
  std::size_t anchors_used = 0;
  std::size_t skipped = 0;
  std::size_t fallbacks = 0;
  std::size_t empty = 0;
};

// Loss and mean-over-anchors parameter gradient for one batch. `grad` is
// overwritten.
ContrastiveBatch contrastive_batch(const EncoderParams& params, std::span<const LabeledSample> batch,
                                   std::span<const double> rates, const AuWeights& w,
                                   const PretrainConfig& cfg, const RngStream& batch_rng,
                                   std::span<double> grad) {
  const auto& dims = params.dims();
  const bool normalize = cfg.loss.normalize;
  const std::size_t n = batch.size();

  std::vector<EmbeddingSet> emb;
  emb.reserve(n);
  for (const auto& s : batch) emb.push_back(forward(params, s.features, normalize));
  std::vector<EmbeddingSet> upstream(n, zeros_like(dims.n_au, dims.embed_dim));
  std::vector<std::pair<Vec, EmbeddingSet>> augmented_terms;

  ContrastiveBatch out;
  double loss_sum = 0.0;
  std::vector<std::optional<Vec>> positives(dims.n_au);
  std::vector<std::vector<Vec>> negatives(dims.n_au);
  std::vector<double> betas(dims.n_au);

  for (std::size_t a = 0; a < n; ++a) {
    const RngStream anchor_rng = batch_rng.fork(a);
    RngStream aug_rng = anchor_rng.fork(0);
    RngStream plan_rng = anchor_rng.fork(1);

    Vec x_aug = augment(batch[a].features, aug_rng, cfg.augment);
    const EmbeddingSet aug_emb = forward(params, x_aug, normalize);
    const PairPlan plan = build_pair_plan(batch, emb, a, aug_emb, rates, cfg.loss, plan_rng);
    out.skipped += plan.skipped_count();
    out.fallbacks += plan.fallback_count();

    for (std::size_t i = 0; i < dims.n_au; ++i) {
      const LabelPlan& lp = plan.labels[i];
      betas[i] = lp.beta;
      negatives[i].clear();
      if (lp.skipped) {
        positives[i].reset();
        continue;
      }
      positives[i] = lp.positive;
      for (std::size_t j : lp.negatives) negatives[i].push_back(emb[j][i]);
    }

    LossOutput loss;
    try {
      loss = aunce_loss(emb[a], positives, negatives, betas, cfg.loss, w);
    } catch (const EmptyBatch&) {
      ++out.empty;
      continue;
    }
    if (!std::isfinite(loss.value)) throw NumericFailure("non-finite contrastive loss");
    loss_sum += loss.value;
    ++out.anchors_used;

    std::optional<EmbeddingSet> aug_up;
    for (std::size_t i = 0; i < dims.n_au; ++i) {
      const LabelPlan& lp = plan.labels[i];
      if (lp.skipped) continue;
      axpy(1.0, loss.grad_anchor[i], upstream[a][i]);
      const Vec& gp = loss.grad_positive[i];
      switch (lp.kind) {
        case PositiveKind::HighestSim:
        case PositiveKind::LowestSim:
          axpy(1.0, gp, upstream[lp.positive_members.front()][i]);
          break;
        case PositiveKind::Mixture: {
          std::vector<Vec> members;
          members.reserve(lp.positive_members.size());
          for (std::size_t j : lp.positive_members) members.push_back(emb[j][i]);
          const Vec g = normalize ? l2_normalize_backward(mean(members), gp) : gp;
          const double share = 1.0 / static_cast<double>(members.size());
          for (std::size_t j : lp.positive_members) axpy(share, g, upstream[j][i]);
          break;
        }
        case PositiveKind::Augmented:
          if (!aug_up) aug_up = zeros_like(dims.n_au, dims.embed_dim);
          axpy(1.0, gp, (*aug_up)[i]);
          break;
      }
      for (std::size_t j = 0; j < lp.negatives.size(); ++j) {
        axpy(1.0, loss.grad_negatives[i][j], upstream[lp.negatives[j]][i]);
      }
    }
    if (aug_up) augmented_terms.emplace_back(std::move(x_aug), std::move(*aug_up));
  }

  std::fill(grad.begin(), grad.end(), 0.0);
  if (out.anchors_used == 0) return out;
  for (std::size_t k = 0; k < n; ++k) {
    backward_accumulate(params, batch[k].features, upstream[k], normalize, grad);
  }
  for (const auto& [x, up] : augmented_terms) backward_accumulate(params, x, up, normalize, grad);
  const double inv = 1.0 / static_cast<double>(out.anchors_used);
  scale_in_place(grad, inv);
  out.loss = loss_sum * inv;
  if (!all_finite(grad)) throw NumericFailure("non-finite encoder gradient");
  return out;
}

nlohmann::json to_json(const AdamWConfig& c) {
  return {{"lr", c.lr},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"weight_decay", c.weight_decay},
          {"eps", c.eps}};
}

}  // namespace

bool EpochRecord::same_outcome(const EpochRecord& o) const noexcept {
  return stage == o.stage && epoch == o.epoch && mean_loss == o.mean_loss &&
         batches == o.batches && anchors == o.anchors && skipped_labels == o.skipped_labels &&
         fallbacks == o.fallbacks && empty_anchors == o.empty_anchors;
}

bool TrainRun::same_outcome(const TrainRun& o) const noexcept {
  if (config != o.config || seed != o.seed || abort_reason != o.abort_reason ||
      records.size() != o.records.size()) {
    return false;
  }
  for (std::size_t k = 0; k < records.size(); ++k) {
    if (!records[k].same_outcome(o.records[k])) return false;
  }
  return true;
}

nlohmann::json to_json(const EpochRecord& r, bool include_timing) {
  nlohmann::json j = {{"stage", r.stage},
                      {"epoch", r.epoch},
                      {"mean_loss", r.mean_loss},
                      {"batches", r.batches},
                      {"anchors", r.anchors},
                      {"skipped_labels", r.skipped_labels},
                      {"fallbacks", r.fallbacks},
                      {"empty_anchors", r.empty_anchors}};
  if (include_timing) j["wall_seconds"] = r.wall_seconds;
  return j;
}

std::string to_jsonl(const TrainRun& run, bool include_timing) {
  std::string out;
  for (const auto& r : run.records) out += to_json(r, include_timing).dump() + "\n";
  return out;
}

nlohmann::json summary_json(const TrainRun& run) {
  nlohmann::json j = {{"seed", run.seed}, {"config", run.config}, {"epochs", run.records.size()}};
  if (!run.records.empty()) j["final_mean_loss"] = run.records.back().mean_loss;
  if (!run.abort_reason.empty()) j["abort_reason"] = run.abort_reason;
  return j;
}

// ---------------------------------------------------------------------------

void PretrainConfig::validate() const {
  loss.validate();
  augment.validate();
  optim.validate();
  if (batch_size < 2) throw ConfigError("pretrain: batch_size must be at least 2");
}

nlohmann::json to_json(const PretrainConfig& c) {
  return {{"tau", c.loss.tau},
          {"beta_minority", c.loss.beta_minority},
          {"beta_majority", c.loss.beta_majority},
          {"probs",
           {c.loss.probs.highest, c.loss.probs.augmented, c.loss.probs.mixture,
            c.loss.probs.lowest}},
          {"normalize", c.loss.normalize},
          {"augment",
           {{"noise_sigma", c.augment.noise_sigma},
            {"scale_lo", c.augment.scale_lo},
            {"scale_hi", c.augment.scale_hi},
            {"mask_fraction", c.augment.mask_fraction}}},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"optimizer", to_json(c.optim)},
          {"use_label_weights", c.use_label_weights}};
}

std::vector<double> training_rates(const Dataset& train) {
  return clamp_rates(label_rates(train), train.size());
}

PretrainResult pretrain(const Dataset& train, const EncoderParams& init, const PretrainConfig& cfg,
                        std::uint64_t seed) {
  cfg.validate();
  check_dataset(train, init.dims(), "pretrain");

  const std::vector<double> rates = training_rates(train);
  const AuWeights w = cfg.use_label_weights ? au_weights(rates) : uniform_weights(rates);

  PretrainResult result{init, TrainRun{to_json(cfg), seed, {}, {}}};
  result.run.config["rates"] = rates;
  EncoderParams& params = result.encoder;
  AdamW opt(params.size(), cfg.optim);
  std::vector<double> grad(params.size(), 0.0);
  const RngStream root(seed);
  std::vector<LabeledSample> batch;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = Clock::now();
    const auto order = shuffled_order(train.size(), root.fork(kShuffle).fork(epoch));
    const RngStream epoch_rng = root.fork(kAnchors).fork(epoch);
    EpochRecord rec{.stage = "pretrain", .epoch = epoch};
    double loss_sum = 0.0;

    for (std::size_t start = 0, b = 0; start < order.size(); start += cfg.batch_size, ++b) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      if (end - start < 2) continue;
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(train[order[k]]);

      ContrastiveBatch stats;
      try {
        stats = contrastive_batch(params, batch, rates, w, cfg, epoch_rng.fork(b), grad);
      } catch (const NumericFailure& e) {
        rec.wall_seconds = seconds_since(t0);
        rec.mean_loss = std::nan("");
        result.run.records.push_back(rec);
        result.run.abort_reason = "epoch " + std::to_string(epoch) + ", batch " +
                                  std::to_string(b) + ": " + e.what();
        throw TrainingAborted("pretrain aborted: " + result.run.abort_reason, result.run);
      }
      rec.anchors += stats.anchors_used;
      rec.skipped_labels += stats.skipped;
      rec.fallbacks += stats.fallbacks;
      rec.empty_anchors += stats.empty;
      if (stats.anchors_used == 0) continue;
      opt.step(params.values(), grad);
      loss_sum += stats.loss;
      ++rec.batches;
    }
    rec.mean_loss = rec.batches ? loss_sum / static_cast<double>(rec.batches) : 0.0;
    rec.wall_seconds = seconds_since(t0);
    result.run.records.push_back(rec);
  }
  return result;
}

// ---------------------------------------------------------------------------

LinearClassifier::LinearClassifier(std::size_t n_au, std::size_t embed_dim)
    : n_au_(n_au), embed_dim_(embed_dim), values_(n_au * (embed_dim + 1), 0.0) {}

std::vector<double> LinearClassifier::logits(const EmbeddingSet& emb) const {
  if (emb.size() != n_au_) throw ContractViolation("classifier: label count mismatch");
  std::vector<double> out(n_au_);
  for (std::size_t i = 0; i < n_au_; ++i) {
    if (emb[i].size() != embed_dim_) throw ContractViolation("classifier: embedding size");
    const double* w = values_.data() + i * (embed_dim_ + 1);
    double z = w[embed_dim_];
    for (std::size_t e = 0; e < embed_dim_; ++e) z += w[e] * emb[i][e];
    out[i] = z;
  }
  return out;
}

std::vector<double> LinearClassifier::probabilities(const EmbeddingSet& emb) const {
  auto z = logits(emb);
  for (double& v : z) v = sigmoid(v);
  return z;
}

namespace {

// Adds dL/dclassifier for one sample given dL/dlogits.
void accumulate_probe_grad(const LinearClassifier& clf, const EmbeddingSet& emb,
                           std::span<const double> grad_logits, std::span<double> grad) {
  const std::size_t d = clf.embed_dim();
  for (std::size_t i = 0; i < clf.n_au(); ++i) {
    const double g = grad_logits[i];
    if (g == 0.0) continue;
    double* gw = grad.data() + i * (d + 1);
    for (std::size_t e = 0; e < d; ++e) gw[e] += g * emb[i][e];
    gw[d] += g;
  }
}

}  // namespace

void LinearEvalConfig::validate() const {
  optim.validate();
  if (batch_size == 0) throw ConfigError("linear eval: batch_size must be positive");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
}

nlohmann::json to_json(const LinearEvalConfig& c) {
  return {{"epochs", c.epochs},       {"batch_size", c.batch_size},
          {"optimizer", to_json(c.optim)}, {"threshold", c.threshold},
          {"normalize", c.normalize}, {"eps", c.eps}};
}

MetricsReport evaluate(const EncoderParams& encoder, const LinearClassifier& classifier,
                       const Dataset& test, bool normalize, double threshold) {
  std::vector<std::vector<double>> probs;
  BinaryMatrix truth;
  probs.reserve(test.size());
  truth.reserve(test.size());
  for (const auto& s : test) {
    probs.push_back(classifier.probabilities(forward(encoder, s.features, normalize)));
    truth.push_back(s.clean_labels);
  }
  return make_report(confusion(threshold_predictions(probs, threshold), truth));
}

LinearEvalResult linear_eval(const EncoderParams& frozen, const Dataset& train, const Dataset& test,
                             const AuWeights& w, const LinearEvalConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto& dims = frozen.dims();
  check_dataset(train, dims, "linear_eval");
  check_dataset(test, dims, "linear_eval");
  if (w.size() != dims.n_au) throw ContractViolation("linear_eval: weight count mismatch");
  const EncoderParams snapshot = frozen;

  std::vector<EmbeddingSet> emb;
  emb.reserve(train.size());
  for (const auto& s : train) emb.push_back(forward(frozen, s.features, cfg.normalize));

  LinearEvalResult result{LinearClassifier(dims.n_au, dims.embed_dim), {},
                          TrainRun{to_json(cfg), seed, {}, {}}};
  LinearClassifier& clf = result.classifier;
  AdamW opt(clf.values().size(), cfg.optim);
  std::vector<double> grad(clf.values().size());
  const RngStream root(seed);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = Clock::now();
    const auto order = shuffled_order(train.size(), root.fork(kShuffle).fork(epoch));
    EpochRecord rec{.stage = "linear", .epoch = epoch};
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t s = order[k];
        const auto z = clf.logits(emb[s]);
        const WceLogitResult wce = wce_with_logits(train[s].labels, z, w, cfg.eps);
        batch_loss += wce.value;
        accumulate_probe_grad(clf, emb[s], wce.grad_logits, grad);
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      scale_in_place(grad, inv);
      opt.step(clf.values(), grad);
      loss_sum += batch_loss * inv;
      ++rec.batches;
      rec.anchors += end - start;
    }
    rec.mean_loss = rec.batches ? loss_sum / static_cast<double>(rec.batches) : 0.0;
    if (!std::isfinite(rec.mean_loss)) {
      result.run.abort_reason = "non-finite linear-probe loss at epoch " + std::to_string(epoch);
      result.run.records.push_back(rec);
      throw TrainingAborted(result.run.abort_reason, result.run);
    }
    rec.wall_seconds = seconds_since(t0);
    result.run.records.push_back(rec);
  }

  if (!(frozen == snapshot)) throw ContractViolation("linear_eval: encoder parameters changed");
  result.metrics = evaluate(frozen, clf, test, cfg.normalize, cfg.threshold);
  return result;
}

// ---------------------------------------------------------------------------

void BaselineConfig::validate() const {
  optim.validate();
  if (batch_size == 0) throw ConfigError("baseline: batch_size must be positive");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
}

nlohmann::json to_json(const BaselineConfig& c) {
  return {{"epochs", c.epochs},       {"batch_size", c.batch_size},
          {"optimizer", to_json(c.optim)}, {"threshold", c.threshold},
          {"normalize", c.normalize}, {"eps", c.eps}};
}

BaselineResult baseline_e2e(const Dataset& train, const Dataset& test, const EncoderParams& init,
                            const AuWeights& w, const BaselineConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto& dims = init.dims();
  check_dataset(train, dims, "baseline");
  check_dataset(test, dims, "baseline");
  if (w.size() != dims.n_au) throw ContractViolation("baseline: weight count mismatch");

  BaselineResult result{init, LinearClassifier(dims.n_au, dims.embed_dim), {},
                        TrainRun{to_json(cfg), seed, {}, {}}};
  EncoderParams& enc = result.encoder;
  LinearClassifier& clf = result.classifier;
  AdamW enc_opt(enc.size(), cfg.optim);
  AdamW clf_opt(clf.values().size(), cfg.optim);
  std::vector<double> enc_grad(enc.size());
  std::vector<double> clf_grad(clf.values().size());
  const RngStream root(seed);
  const std::size_t d = dims.embed_dim;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = Clock::now();
    const auto order = shuffled_order(train.size(), root.fork(kShuffle).fork(epoch));
    EpochRecord rec{.stage = "baseline", .epoch = epoch};
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::fill(enc_grad.begin(), enc_grad.end(), 0.0);
      std::fill(clf_grad.begin(), clf_grad.end(), 0.0);
      double batch_loss = 0.0;
      try {
        for (std::size_t k = start; k < end; ++k) {
          const LabeledSample& s = train[order[k]];
          const EmbeddingSet emb = forward(enc, s.features, cfg.normalize);
          const WceLogitResult wce = wce_with_logits(s.labels, clf.logits(emb), w, cfg.eps);
          batch_loss += wce.value;
          accumulate_probe_grad(clf, emb, wce.grad_logits, clf_grad);
          EmbeddingSet up = zeros_like(dims.n_au, d);
          for (std::size_t i = 0; i < dims.n_au; ++i) {
            const double* wi = clf.values().data() + i * (d + 1);
            for (std::size_t e = 0; e < d; ++e) up[i][e] = wce.grad_logits[i] * wi[e];
          }
          backward_accumulate(enc, s.features, up, cfg.normalize, enc_grad);
        }
      } catch (const NumericFailure& e) {
        result.run.abort_reason = std::string("baseline: ") + e.what();
        result.run.records.push_back(rec);
        throw TrainingAborted(result.run.abort_reason, result.run);
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      scale_in_place(enc_grad, inv);
      scale_in_place(clf_grad, inv);
      if (!std::isfinite(batch_loss) || !all_finite(enc_grad)) {
        result.run.abort_reason = "non-finite baseline loss at epoch " + std::to_string(epoch);
        result.run.records.push_back(rec);
        throw TrainingAborted(result.run.abort_reason, result.run);
      }
      enc_opt.step(enc.values(), enc_grad);
      clf_opt.step(clf.values(), clf_grad);
      loss_sum += batch_loss * inv;
      ++rec.batches;
      rec.anchors += end - start;
    }
    rec.mean_loss = rec.batches ? loss_sum / static_cast<double>(rec.batches) : 0.0;
    rec.wall_seconds = seconds_since(t0);
    result.run.records.push_back(rec);
  }
  result.metrics = evaluate(enc, clf, test, cfg.normalize, cfg.threshold);
  return result;
}

}  // namespace aunce
