#include <gtest/gtest.h>

#include <cmath>

#include "aunce/errors.hpp"
#include "aunce/experiment.hpp"
#include "aunce/optimizer.hpp"
#include "aunce/trainer.hpp"
#include "oracles.hpp"

using namespace aunce;

namespace {

struct Fixture {
  Dataset train, test;
  EncoderParams init;
};

Fixture separable(std::size_t n = 400, std::size_t hidden = 32, std::size_t embed = 8) {
  GeneratorSpec g = separable_fixture();
  g.n_samples = n;
  const auto data = generate(g);
  auto [tr, te] = split(data, 0.8, 1);
  return {tr, te, init_encoder({g.feature_dim, hidden, g.n_au, embed}, 2)};
}

PretrainConfig quick_pretrain(std::size_t epochs) {
  PretrainConfig c;
  c.epochs = epochs;
  return c;
}

}  // namespace

TEST(AdamW, MatchesScalarReimplementation) {
  for (double wd : {0.0, 1e-6, 0.1}) {
    AdamWConfig cfg{.lr = 0.05, .weight_decay = wd};
    AdamW opt(1, cfg);
    oracle::ScalarAdamW ref{cfg.lr, cfg.beta1, cfg.beta2, cfg.weight_decay, cfg.eps};
    std::vector<double> p = {3.0};
    double q = 3.0;
    for (int t = 0; t < 100; ++t) {
      // f(p) = (p - 1)^2
      const std::vector<double> g = {2.0 * (p[0] - 1.0)};
      opt.step(p, g);
      q = ref.step(q, 2.0 * (q - 1.0));
      ASSERT_NEAR(p[0], q, 1e-12) << "step " << t;
    }
    EXPECT_EQ(opt.steps(), 100u);
  }
}

TEST(AdamW, ZeroLearningRateLeavesParametersBitwiseUnchanged) {
  AdamW opt(3, {.lr = 0.0});
  std::vector<double> p = {0.1, -2.0, 7.0};
  const auto before = p;
  const std::vector<double> g = {1.0, -1.0, 0.5};
  for (int t = 0; t < 10; ++t) opt.step(p, g);
  EXPECT_EQ(p, before);
  EXPECT_THROW(AdamW(1, {.beta1 = 1.0}), ConfigError);
}

TEST(Pretrain, ZeroEpochsReturnsInit) {
  const auto f = separable(100);
  const auto r = pretrain(f.train, f.init, quick_pretrain(0), 1);
  EXPECT_EQ(r.encoder, f.init);
  EXPECT_TRUE(r.run.records.empty());
}

TEST(Pretrain, ZeroLearningRateLeavesEncoderUnchanged) {
  const auto f = separable(100);
  auto cfg = quick_pretrain(2);
  cfg.optim.lr = 0.0;
  const auto r = pretrain(f.train, f.init, cfg, 1);
  EXPECT_EQ(r.encoder, f.init);
  EXPECT_EQ(r.run.records.size(), 2u);
}

TEST(Pretrain, BatchOfOneIsConfigError) {
  const auto f = separable(100);
  auto cfg = quick_pretrain(1);
  cfg.batch_size = 1;
  EXPECT_THROW(pretrain(f.train, f.init, cfg, 1), ConfigError);
}

TEST(Pretrain, LossDecreasesOnSeparableData) {
  GeneratorSpec g = separable_fixture();
  const auto data = generate(g);
  const auto seeds = run_seeds(0);
  const auto [tr, te] = split(data, 0.8, seeds.split);
  const auto init = init_encoder({g.feature_dim, 128, g.n_au, 32}, seeds.init);
  const auto r = pretrain(tr, init, quick_pretrain(5), seeds.pretrain);
  ASSERT_EQ(r.run.records.size(), 5u);
  for (std::size_t e = 1; e < 5; ++e) {
    EXPECT_LT(r.run.records[e].mean_loss, r.run.records[e - 1].mean_loss) << "epoch " << e;
  }
  for (const auto& rec : r.run.records) EXPECT_TRUE(std::isfinite(rec.mean_loss));
}

TEST(Pretrain, DeterministicReplay) {
  const auto f = separable(160);
  const auto a = pretrain(f.train, f.init, quick_pretrain(2), 9);
  const auto b = pretrain(f.train, f.init, quick_pretrain(2), 9);
  EXPECT_EQ(a.encoder, b.encoder);
  EXPECT_TRUE(a.run.same_outcome(b.run));
  EXPECT_EQ(to_jsonl(a.run), to_jsonl(b.run));
  const auto c = pretrain(f.train, f.init, quick_pretrain(2), 10);
  EXPECT_NE(a.encoder, c.encoder);
}

TEST(Pretrain, NonFiniteParametersAbortWithRecord) {
  auto f = separable(100);
  f.init.values()[0] = std::nan("");
  try {
    pretrain(f.train, f.init, quick_pretrain(3), 1);
    FAIL() << "expected TrainingAborted";
  } catch (const TrainingAborted& e) {
    EXPECT_FALSE(e.partial_run().abort_reason.empty());
    ASSERT_EQ(e.partial_run().records.size(), 1u);
    EXPECT_TRUE(std::isnan(e.partial_run().records[0].mean_loss));
  }
}

TEST(LinearEval, ZeroEpochsPredictsEverythingPositive) {
  const auto f = separable(200);
  const auto rates = training_rates(f.train);
  LinearEvalConfig cfg;
  cfg.epochs = 0;
  const auto r = linear_eval(f.init, f.train, f.test, au_weights(rates), cfg, 1);
  for (double v : r.classifier.values()) EXPECT_EQ(v, 0.0);
  for (const auto& c : r.metrics.counts.labels) {
    EXPECT_EQ(c.fn, 0u);
    EXPECT_EQ(c.tn, 0u);
  }
}

TEST(LinearEval, SeparableDataAfterPretraining) {
  GeneratorSpec g = separable_fixture();
  const auto data = generate(g);
  ExperimentConfig cfg;
  cfg.generator = g;
  cfg.pretrain_epochs = 20;
  cfg.linear_epochs = 50;
  const auto out = run_contrastive(data, cfg, AblationSwitches{}, 0);
  for (double acc : out.linear.metrics.accuracy_per_label) EXPECT_GT(acc, 0.9);
  EXPECT_GT(out.linear.metrics.f1_macro, 0.9);
}

TEST(Baseline, ZeroEpochsMatchesAllPositiveOracle) {
  const auto f = separable(300);
  BaselineConfig cfg;
  cfg.epochs = 0;
  const auto rates = training_rates(f.train);
  const auto r = baseline_e2e(f.train, f.test, f.init, au_weights(rates), cfg, 1);
  // zero probe => p = 0.5 >= threshold everywhere
  for (std::size_t i = 0; i < rates.size(); ++i) {
    std::size_t pos = 0;
    for (const auto& s : f.test) pos += s.clean_labels[i];
    const double neg = static_cast<double>(f.test.size() - pos);
    EXPECT_NEAR(r.metrics.f1_per_label[i], 2.0 * pos / (2.0 * pos + neg), 1e-15);
  }
}

TEST(Baseline, DeterministicAndLearnsSeparableData) {
  const auto f = separable(600);
  BaselineConfig cfg;
  cfg.epochs = 15;
  const auto rates = training_rates(f.train);
  const auto a = baseline_e2e(f.train, f.test, f.init, au_weights(rates), cfg, 3);
  const auto b = baseline_e2e(f.train, f.test, f.init, au_weights(rates), cfg, 3);
  EXPECT_EQ(a.encoder, b.encoder);
  EXPECT_EQ(to_json(a.metrics), to_json(b.metrics));
  EXPECT_GT(a.metrics.f1_macro, 0.9);
}

TEST(TrainRun, JsonLinesOmitTimingByDefault) {
  TrainRun run;
  run.records.push_back({.stage = "pretrain", .epoch = 0, .mean_loss = 1.5, .wall_seconds = 2.0});
  const std::string line = to_jsonl(run);
  EXPECT_EQ(line.find("wall"), std::string::npos);
  EXPECT_NE(to_jsonl(run, true).find("wall_seconds"), std::string::npos);
  EXPECT_EQ(std::count(line.begin(), line.end(), '\n'), 1);
}
