// Acceptance checks. `acceptance` runs every criterion; `acceptance N` runs
// criterion N only. Each criterion prints one PASS/FAIL line; the exit status
// is non-zero when any selected blocking criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "aunce/errors.hpp"
#include "aunce/experiment.hpp"
#include "oracles.hpp"

using namespace aunce;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  bool blocking;
  std::function<Outcome()> run;
};

std::string fmt(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

Vec random_unit(RngStream& rng, std::size_t d) {
  Vec v(d);
  for (double& x : v) x = rng.normal();
  return l2_normalize(v);
}

/// Settings of the experiment criteria: stage budgets scaled to 20/50 epochs.
ExperimentConfig experiment_config(const GeneratorSpec& g) {
  ExperimentConfig cfg;
  cfg.generator = g;
  cfg.pretrain_epochs = 20;
  cfg.linear_epochs = 50;
  cfg.seeds = {0, 1, 2, 3, 4};
  return cfg;
}

// ---------------------------------------------------------------------------

Outcome gradient_exactness() {
  const auto r = run_gradcheck(2024, 100);
  const bool pass = r.aunce_max_rel < 1e-6 && r.wce_max_rel < 1e-6;
  return {pass, "100 instances, max rel error term " + fmt(r.aunce_max_rel) + ", wce " +
                    fmt(r.wce_max_rel) + " (encoder " + fmt(r.encoder_max_rel) + ")"};
}

Outcome loss_limit() {
  // u = dot / tau; u+ - u-_j = 20 for every negative
  const double tau = 0.5;
  double worst = 0.0;
  const Vec a{1, 0, 0};
  for (std::size_t n_neg : {1, 2, 4}) {
    for (double beta : {0.4, 1.0, 1.2}) {
      const Vec pos = scaled(a, 20 * tau);
      const std::vector<Vec> negs(n_neg, Vec{0, 1, 0});
      worst = std::max(worst, aunce_term(a, pos, negs, beta, tau).value);
      // symmetric split: u+ = 10, u- = -10
      const std::vector<Vec> opposed(n_neg, scaled(a, -10 * tau));
      worst = std::max(worst, aunce_term(a, scaled(a, 10 * tau), opposed, beta, tau).value);
    }
  }
  return {worst < 1e-8 && worst >= 0.0, "max term value " + fmt(worst)};
}

Outcome boltzmann_properties() {
  RngStream rng(31);
  double worst_sum = 0.0;
  std::size_t violations = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + rng.index(15);
    const Vec a = random_unit(rng, 8);
    std::vector<Vec> negs;
    std::set<double> sims;
    while (negs.size() < n) {
      Vec v = random_unit(rng, 8);
      if (sims.insert(dot(a, v)).second) negs.push_back(v);
    }
    double prev = INFINITY;
    for (double beta : {0.4, 0.8, 1.2, 1.6, 2.0}) {
      const auto p = gradient_ratio_profile(a, negs, beta, 0.5);
      worst_sum = std::max(worst_sum, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
      double h = 0.0;
      for (double x : p) h -= x > 0 ? x * std::log(x) : 0.0;
      if (h > prev + 1e-12) ++violations;
      prev = h;
    }
  }
  return {worst_sum <= 1e-12 && violations == 0,
          "max |sum - 1| " + fmt(worst_sum) + ", entropy increases " + std::to_string(violations)};
}

Outcome oracle_equivalence() {
  RngStream rng(41);
  std::size_t loss_bad = 0, metric_bad = 0, plan_bad = 0, instances = 0;
  double loss_err = 0.0;
  for (int t = 0; t < 500; ++t, ++instances) {
    const std::size_t n_au = 1 + rng.index(4), d = 2 + rng.index(6);

    // loss
    EmbeddingSet anchor;
    std::vector<std::optional<Vec>> pos;
    std::vector<std::vector<Vec>> negs(n_au);
    std::vector<double> betas, rates;
    for (std::size_t i = 0; i < n_au; ++i) {
      anchor.push_back(random_unit(rng, d));
      pos.emplace_back(random_unit(rng, d));
      for (std::size_t j = 0, k = 1 + rng.index(7); j < k; ++j) negs[i].push_back(random_unit(rng, d));
      betas.push_back(rng.bernoulli(0.5) ? 1.2 : 0.4);
      rates.push_back(rng.uniform(0.02, 0.98));
    }
    const double v = aunce_loss(anchor, pos, negs, betas, AunceConfig{}, au_weights(rates)).value;
    const double ref = oracle::loss(anchor, pos, negs, betas, 0.5, oracle::weights(rates));
    loss_err = std::max(loss_err, std::abs(v - ref));
    loss_bad += std::abs(v - ref) > 1e-10;

    // metrics
    const std::size_t n = 1 + rng.index(20);
    BinaryMatrix p(n, std::vector<std::uint8_t>(n_au)), y = p;
    for (auto& row : p) for (auto& x : row) x = rng.bernoulli(0.5);
    for (auto& row : y) for (auto& x : row) x = rng.bernoulli(0.35);
    const auto c = confusion(p, y);
    const auto rc = oracle::confusion(p, y);
    for (std::size_t i = 0; i < n_au; ++i) {
      metric_bad += c.labels[i].tp != rc[i].tp || c.labels[i].fp != rc[i].fp ||
                    c.labels[i].fn != rc[i].fn || c.labels[i].tn != rc[i].tn;
    }
    metric_bad += std::abs(f1_macro(c) - oracle::macro(rc)) > 1e-10;
    metric_bad += std::abs(f1_micro(c) - oracle::micro(rc)) > 1e-10;
    metric_bad += std::abs(accuracy(c) - oracle::accuracy(rc)) > 1e-10;

    // pair plans
    const std::size_t bs = 2 + rng.index(7);
    std::vector<LabeledSample> batch;
    std::vector<EmbeddingSet> emb;
    EmbeddingSet aug;
    for (std::size_t s = 0; s < bs; ++s) {
      LabeledSample ls{Vec(1), {}, {}};
      EmbeddingSet e;
      for (std::size_t i = 0; i < n_au; ++i) {
        ls.labels.push_back(rng.bernoulli(0.4));
        e.push_back(random_unit(rng, d));
      }
      ls.clean_labels = ls.labels;
      batch.push_back(ls);
      emb.push_back(e);
    }
    for (std::size_t i = 0; i < n_au; ++i) aug.push_back(random_unit(rng, d));
    AunceConfig cfg;
    if (t % 2) cfg.probs = {0.25, 0.25, 0.25, 0.25};
    const std::uint64_t seed = rng.next_u64();
    for (std::size_t a = 0; a < bs; ++a) {
      RngStream r1(seed + a), r2(seed + a);
      const auto plan = build_pair_plan(batch, emb, a, aug, rates, cfg, r1);
      const auto refp = oracle::plan(batch, emb, a, aug, rates, cfg, r2);
      for (std::size_t i = 0; i < n_au; ++i) {
        const auto& l = plan.labels[i];
        bool same = l.skipped == refp[i].skipped && l.negatives == refp[i].negatives &&
                    l.beta == refp[i].beta;
        if (!l.skipped) {
          same = same && static_cast<int>(l.kind) == refp[i].kind &&
                 l.positive_members == refp[i].members;
          for (std::size_t k = 0; k < l.positive.size(); ++k) {
            same = same && std::abs(l.positive[k] - refp[i].positive[k]) <= 1e-10;
          }
        }
        plan_bad += !same;
      }
    }
  }
  return {loss_bad == 0 && metric_bad == 0 && plan_bad == 0,
          std::to_string(instances) + " instances; mismatches loss " + std::to_string(loss_bad) +
              " (max err " + fmt(loss_err) + "), metrics " + std::to_string(metric_bad) +
              ", plans " + std::to_string(plan_bad)};
}

Outcome weight_identity() {
  RngStream rng(51);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> r(1 + rng.index(12));
    for (double& x : r) x = rng.uniform(0.001, 0.999);
    const auto w = au_weights(r);
    worst = std::max(worst,
                     std::abs(std::accumulate(w.w.begin(), w.w.end(), 0.0) - double(r.size())));
  }
  const std::vector<double> hand = {0.5, 0.25, 0.25};
  const auto w = au_weights(hand);
  const bool hand_ok = std::abs(w.w[0] - 0.6) < 1e-12 && std::abs(w.w[1] - 1.2) < 1e-12 &&
                       std::abs(w.w[2] - 1.2) < 1e-12;
  return {worst <= 1e-9 && hand_ok,
          "max |sum w - n| " + fmt(worst) + ", hand example " + (hand_ok ? "ok" : "wrong")};
}

Outcome imbalance_experiment() {
  const ExperimentConfig cfg = experiment_config(imbalance_fixture());
  const Dataset data = generate(cfg.generator);
  const AblationSwitches model_b{true, false, false}, model_d{true, false, true};
  double minority_gain = 0.0, macro_b = 0.0, macro_d = 0.0;
  for (std::uint64_t seed : cfg.seeds) {
    const auto b = run_contrastive(data, cfg, model_b, seed).linear.metrics;
    const auto d = run_contrastive(data, cfg, model_d, seed).linear.metrics;
    minority_gain += d.f1_per_label[0] - b.f1_per_label[0];
    macro_b += b.f1_macro;
    macro_d += d.f1_macro;
  }
  const double k = static_cast<double>(cfg.seeds.size());
  minority_gain /= k;
  macro_b /= k;
  macro_d /= k;
  return {minority_gain > 0.0 && macro_d > macro_b,
          "minority F1 gain " + fmt(minority_gain) + ", F1-macro D " + fmt(macro_d) + " vs B " +
              fmt(macro_b)};
}

Outcome noise_experiment() {
  ExperimentConfig cfg = experiment_config(noise_fixture());
  const Dataset data = generate(cfg.generator);
  const auto summary = summarize(run_sweep(data, cfg, "probs"));
  const auto& optimal = find_summary(summary, "p=0.15/0.15/0.7/0");
  const auto& highest = find_summary(summary, "p=1/0/0/0");
  const auto& lowest = find_summary(summary, "p=0/0/0/1");
  bool lowest_worst = true;
  std::string best_other;
  for (const auto& s : summary) {
    if (s.variant == lowest.variant) continue;
    lowest_worst = lowest_worst && lowest.f1_macro_mean < s.f1_macro_mean;
  }
  std::ostringstream grid;
  for (const auto& s : summary) grid << ' ' << s.variant << '=' << fmt(s.f1_macro_mean);
  return {optimal.f1_macro_mean >= highest.f1_macro_mean && lowest_worst,
          "F1-macro (.15,.15,.7,0) " + fmt(optimal.f1_macro_mean) + " vs (1,0,0,0) " +
              fmt(highest.f1_macro_mean) + "; (0,0,0,1) strictly worst: " +
              (lowest_worst ? "yes" : "no") + ";" + grid.str()};
}

Outcome ablation_ordering() {
  const ExperimentConfig cfg = experiment_config(standard_fixture());
  const Dataset data = generate(cfg.generator);
  const auto summary = summarize(run_ablation(data, cfg));
  const auto m = [&](const char* v) { return find_summary(summary, v).f1_macro_mean; };
  const double a = m("A"), b = m("B"), c = m("C"), d = m("D"), e = m("E");
  const bool pass = e >= std::max(c, d) && std::min(c, d) >= b && b >= a - 0.01;
  return {pass, "F1-macro A " + fmt(a) + ", B " + fmt(b) + ", C " + fmt(c) + ", D " + fmt(d) +
                    ", E " + fmt(e)};
}

struct PipelineArtifacts {
  std::string encoder, pretrain_log, linear_log, metrics;
  double f1_macro = 0.0;
  bool frozen = false;
};

PipelineArtifacts separable_pipeline() {
  const ExperimentConfig cfg = experiment_config(separable_fixture());
  const Dataset data = generate(cfg.generator);
  const auto seeds = run_seeds(0);
  const auto [train, test] = split(data, cfg.train_fraction, seeds.split);
  const auto init = init_encoder(encoder_dims(cfg, data), seeds.init);
  const auto pre = pretrain(train, init, pretrain_config(cfg, AblationSwitches{}), seeds.pretrain);
  const EncoderParams before = pre.encoder;
  const auto w = au_weights(training_rates(train));
  const auto lin = linear_eval(pre.encoder, train, test, w, linear_config(cfg), seeds.linear);
  return {checkpoint_json(pre.encoder).dump(), to_jsonl(pre.run), to_jsonl(lin.run),
          to_json(lin.metrics).dump(), lin.metrics.f1_macro, before == pre.encoder};
}

Outcome pipeline_sanity() {
  const auto r = separable_pipeline();
  return {r.f1_macro > 0.9 && r.frozen,
          "F1-macro " + fmt(r.f1_macro) + ", encoder bitwise unchanged by stage 2: " +
              (r.frozen ? "yes" : "no")};
}

Outcome determinism() {
  const auto a = separable_pipeline();
  const auto b = separable_pipeline();
  const bool same = a.encoder == b.encoder && a.pretrain_log == b.pretrain_log &&
                    a.linear_log == b.linear_log && a.metrics == b.metrics;
  return {same, std::string("checkpoint, epoch logs and metrics ") +
                    (same ? "byte-identical" : "DIFFER") + " across reruns"};
}

Outcome loss_benchmark() {
  using Clock = std::chrono::steady_clock;
  RngStream rng(61);
  const std::size_t batch = 32, n_au = 12, d = 32;
  std::vector<EmbeddingSet> emb(batch);
  std::vector<LabeledSample> samples(batch);
  EmbeddingSet aug;
  std::vector<double> rates(n_au, 0.3);
  for (std::size_t s = 0; s < batch; ++s) {
    samples[s].features = Vec(1);
    for (std::size_t i = 0; i < n_au; ++i) {
      emb[s].push_back(random_unit(rng, d));
      samples[s].labels.push_back(rng.bernoulli(0.3));
    }
    samples[s].clean_labels = samples[s].labels;
  }
  for (std::size_t i = 0; i < n_au; ++i) aug.push_back(random_unit(rng, d));
  const AunceConfig cfg;
  const AuWeights w = au_weights(rates);

  const int reps = 200;
  double sink = 0.0;
  const auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) {
    RngStream plan_rng(r);
    for (std::size_t a = 0; a < batch; ++a) {
      const auto plan = build_pair_plan(samples, emb, a, aug, rates, cfg, plan_rng);
      std::vector<std::optional<Vec>> pos(n_au);
      std::vector<std::vector<Vec>> negs(n_au);
      std::vector<double> betas(n_au);
      for (std::size_t i = 0; i < n_au; ++i) {
        if (!plan.labels[i].skipped) pos[i] = plan.labels[i].positive;
        for (std::size_t j : plan.labels[i].negatives) negs[i].push_back(emb[j][i]);
        betas[i] = plan.labels[i].beta;
      }
      sink += aunce_loss(emb[a], pos, negs, betas, cfg, w).value;
    }
  }
  const auto t1 = Clock::now();
  std::vector<double> logits(n_au);
  for (int r = 0; r < reps; ++r) {
    for (std::size_t s = 0; s < batch; ++s) {
      for (std::size_t i = 0; i < n_au; ++i) logits[i] = dot(emb[s][i], aug[i]);
      sink += wce_with_logits(samples[s].labels, logits, w).value;
    }
  }
  const auto t2 = Clock::now();
  const auto us = [](auto dt) { return std::chrono::duration<double, std::micro>(dt).count(); };
  return {std::isfinite(sink), "per batch of 32 x 12 labels: contrastive path " +
                                   fmt(us(t1 - t0) / reps) + " us, cross-entropy path " +
                                   fmt(us(t2 - t1) / reps) + " us (informational)"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "gradient exactness", true, gradient_exactness},
      {2, "loss limit", true, loss_limit},
      {3, "gradient-ratio properties", true, boltzmann_properties},
      {4, "oracle equivalence", true, oracle_equivalence},
      {5, "weight identity", true, weight_identity},
      {6, "imbalance experiment", true, imbalance_experiment},
      {7, "noise experiment", true, noise_experiment},
      {8, "ablation ordering", true, ablation_ordering},
      {9, "pipeline sanity", true, pipeline_sanity},
      {10, "determinism", true, determinism},
      {11, "loss micro-benchmark", false, loss_benchmark},
  };
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  bool ok = true;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %s  %s: %s [%.1f s]\n", c.id, o.pass ? "PASS" : "FAIL", c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (c.blocking && !o.pass) ok = false;
  }
  return ok ? 0 : 1;
}
