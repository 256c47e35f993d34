#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "aunce/errors.hpp"
#include "aunce/metrics.hpp"
#include "aunce/rng.hpp"
#include "oracles.hpp"

using namespace aunce;

namespace {

BinaryMatrix column(std::vector<std::uint8_t> v) {
  BinaryMatrix m;
  for (auto x : v) m.push_back({x});
  return m;
}

BinaryMatrix negate(BinaryMatrix m) {
  for (auto& row : m) {
    for (auto& x : row) x = 1 - x;
  }
  return m;
}

ConfusionCounts counts(std::vector<LabelCounts> labels) { return ConfusionCounts{std::move(labels)}; }

}  // namespace

TEST(Confusion, HandExample) {
  const auto c = confusion(column({1, 1, 1, 0}), column({1, 0, 1, 1}));
  EXPECT_EQ(c.labels[0], (LabelCounts{2, 1, 1, 0}));
  EXPECT_NEAR(f1_macro(c), 2.0 / 3, 1e-15);
  EXPECT_EQ(accuracy(c), 0.5);
}

TEST(Confusion, PerfectAndInverted) {
  const BinaryMatrix y = {{1, 0}, {0, 0}, {1, 1}};
  const auto same = confusion(y, y);
  for (const auto& l : same.labels) {
    EXPECT_EQ(l.fp, 0u);
    EXPECT_EQ(l.fn, 0u);
  }
  EXPECT_EQ(accuracy(same), 1.0);
  EXPECT_EQ(f1_macro(same), 1.0);
  const auto inv = confusion(negate(y), y);
  for (const auto& l : inv.labels) {
    EXPECT_EQ(l.tp, 0u);
    EXPECT_EQ(l.tn, 0u);
  }
  EXPECT_EQ(accuracy(inv), 0.0);
}

TEST(Confusion, ShapeMismatchIsContractViolation) {
  EXPECT_THROW(confusion(column({1, 0}), column({1})), ContractViolation);
  EXPECT_THROW(confusion({{1, 0}, {1}}, {{1, 0}, {1, 0}}), ContractViolation);
}

TEST(F1, MacroMicroHandValues) {
  // labels with F1 1.0 and 0.5
  EXPECT_NEAR(f1_macro(counts({{2, 0, 0, 1}, {1, 1, 1, 0}})), 0.75, 1e-15);
  const auto c = counts({{9, 1, 0, 0}, {0, 0, 10, 0}});
  EXPECT_NEAR(f1_micro(c), 0.6206896551724138, 1e-15);
  EXPECT_NEAR(f1_macro(c), 0.47368421052631576, 1e-15);
  const auto one = counts({{3, 2, 1, 4}});
  EXPECT_EQ(f1_micro(one), f1_macro(one));
  EXPECT_EQ(f1_micro(counts({{0, 0, 0, 5}})), 0.0);
  EXPECT_EQ(f1_score({0, 0, 0, 0}), 0.0);
}

TEST(Metrics, MatchBruteForceOnRandomInstances) {
  RngStream rng(1);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + rng.index(20), n_au = 1 + rng.index(4);
    BinaryMatrix p(n, std::vector<std::uint8_t>(n_au)), y = p;
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t i = 0; i < n_au; ++i) {
        p[s][i] = rng.bernoulli(0.4);
        y[s][i] = rng.bernoulli(0.3);
      }
    }
    const auto c = confusion(p, y);
    const auto ref = oracle::confusion(p, y);
    for (std::size_t i = 0; i < n_au; ++i) {
      EXPECT_EQ(c.labels[i].tp, ref[i].tp);
      EXPECT_EQ(c.labels[i].fp, ref[i].fp);
      EXPECT_EQ(c.labels[i].fn, ref[i].fn);
      EXPECT_EQ(c.labels[i].tn, ref[i].tn);
      EXPECT_EQ(c.labels[i].total(), n);
    }
    EXPECT_NEAR(f1_macro(c), oracle::macro(ref), 1e-10);
    EXPECT_NEAR(f1_micro(c), oracle::micro(ref), 1e-10);
    EXPECT_NEAR(accuracy(c), oracle::accuracy(ref), 1e-10);
    for (double m : {f1_macro(c), f1_micro(c), accuracy(c)}) {
      EXPECT_GE(m, 0.0);
      EXPECT_LE(m, 1.0);
    }
  }
}

TEST(Metrics, LabelPermutationInvariance) {
  RngStream rng(2);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 5 + rng.index(15), n_au = 2 + rng.index(3);
    BinaryMatrix p(n, std::vector<std::uint8_t>(n_au)), y = p;
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t i = 0; i < n_au; ++i) {
        p[s][i] = rng.bernoulli(0.5);
        y[s][i] = rng.bernoulli(0.5);
      }
    }
    std::vector<std::size_t> perm(n_au);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span(perm));
    BinaryMatrix pp = p, yy = y;
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t i = 0; i < n_au; ++i) {
        pp[s][i] = p[s][perm[i]];
        yy[s][i] = y[s][perm[i]];
      }
    }
    const auto a = confusion(p, y), b = confusion(pp, yy);
    EXPECT_NEAR(f1_macro(a), f1_macro(b), 1e-15);
    EXPECT_EQ(f1_micro(a), f1_micro(b));
    EXPECT_EQ(accuracy(a), accuracy(b));
  }
}

TEST(Metrics, ThresholdAndReport) {
  const auto pred = threshold_predictions({{0.5, 0.49}, {0.9, 0.1}});
  EXPECT_EQ(pred, (BinaryMatrix{{1, 0}, {1, 0}}));
  const auto r = make_report(confusion(pred, {{1, 0}, {0, 1}}));
  EXPECT_EQ(r.f1_per_label.size(), 2u);
  EXPECT_NEAR(r.f1_per_label[0], 2.0 / 3, 1e-15);
  EXPECT_EQ(r.accuracy_per_label[1], 0.5);
  EXPECT_EQ(metrics_csv_header(2), "f1_0,f1_1,acc_0,acc_1,f1_macro,f1_micro,accuracy");
  const auto j = to_json(r);
  EXPECT_EQ(j["f1_macro"].get<double>(), r.f1_macro);
}

TEST(Metrics, FormatDoubleRoundTrips) {
  for (double x : {0.1, 1.0 / 3, 1e-300, 123456.789, 0.0}) {
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
}
