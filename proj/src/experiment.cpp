#include "aunce/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aunce/errors.hpp"
#include "aunce/gradcheck.hpp"
#include "aunce/rng.hpp"

namespace aunce {

void ExperimentConfig::validate() const {
  generator.validate();
  aunce.validate();
  augment.validate();
  if (hidden == 0 || embed_dim == 0) throw ConfigError("hidden and embed_dim must be positive");
  if (batch_size < 2) throw ConfigError("batch_size must be at least 2");
  if (linear_batch_size == 0) throw ConfigError("linear_batch_size must be positive");
  if (!(pretrain_lr >= 0.0) || !(linear_lr >= 0.0)) throw ConfigError("lr must be non-negative");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must lie in (0, 1)");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
  if (!(beta_uniform > 0.0)) throw ConfigError("beta_uniform must be positive");
  if (seeds.empty()) throw ConfigError("seed list is empty");
}

nlohmann::json to_json(const ExperimentConfig& c) {
  const auto& p = c.aunce.probs;
  return {{"generator", c.generator},
          {"tau", c.aunce.tau},
          {"beta_minority", c.aunce.beta_minority},
          {"beta_majority", c.aunce.beta_majority},
          {"beta_uniform", c.beta_uniform},
          {"probs", {p.highest, p.augmented, p.mixture, p.lowest}},
          {"normalize", c.aunce.normalize},
          {"eps", c.aunce.eps},
          {"augment",
           {{"noise_sigma", c.augment.noise_sigma},
            {"scale_lo", c.augment.scale_lo},
            {"scale_hi", c.augment.scale_hi},
            {"mask_fraction", c.augment.mask_fraction}}},
          {"hidden", c.hidden},
          {"embed_dim", c.embed_dim},
          {"pretrain_epochs", c.pretrain_epochs},
          {"batch_size", c.batch_size},
          {"pretrain_lr", c.pretrain_lr},
          {"weight_decay", c.weight_decay},
          {"linear_epochs", c.linear_epochs},
          {"linear_batch_size", c.linear_batch_size},
          {"linear_lr", c.linear_lr},
          {"train_fraction", c.train_fraction},
          {"threshold", c.threshold},
          {"switches",
           {{"use_wi", c.switches.use_wi},
            {"use_ps", c.switches.use_ps},
            {"use_ns", c.switches.use_ns}}},
          {"out_dir", c.out_dir},
          {"seed", c.seed},
          {"seeds", c.seeds}};
}

// ---------------------------------------------------------------------------

GeneratorSpec separable_fixture() {
  GeneratorSpec g;
  g.n_au = 2;
  g.rates = {0.5, 0.5};
  g.noise_sigma = 0.2;
  g.n_samples = 1000;
  g.seed = 11;
  return g;
}

GeneratorSpec imbalance_fixture() {
  GeneratorSpec g;
  g.n_au = 2;
  g.rates = {0.05, 0.5};
  g.noise_sigma = 0.3;
  g.n_samples = 3000;
  g.seed = 12;
  return g;
}

GeneratorSpec noise_fixture() {
  GeneratorSpec g;
  g.n_au = 4;
  g.rates = {0.2, 0.3, 0.4, 0.5};
  g.noise_sigma = 0.4;
  g.flip_rate = 0.2;
  g.n_samples = 2000;
  g.seed = 13;
  return g;
}

GeneratorSpec standard_fixture() {
  GeneratorSpec g;
  g.n_au = 4;
  g.rates = {0.05, 0.15, 0.3, 0.5};
  g.noise_sigma = 0.4;
  g.flip_rate = 0.1;
  g.n_samples = 3000;
  g.seed = 14;
  return g;
}

GeneratorSpec fixture_by_name(std::string_view name) {
  if (name == "separable") return separable_fixture();
  if (name == "imbalance") return imbalance_fixture();
  if (name == "noise") return noise_fixture();
  if (name == "standard") return standard_fixture();
  throw ConfigError("unknown fixture '" + std::string(name) + "'");
}

std::vector<std::string> fixture_names() { return {"separable", "imbalance", "noise", "standard"}; }

AunceConfig effective_loss_config(const ExperimentConfig& cfg, const AblationSwitches& sw) {
  AunceConfig loss = cfg.aunce;
  if (!sw.use_ps) loss.probs = PositiveProbs{1.0, 0.0, 0.0, 0.0};
  if (!sw.use_ns) loss.beta_minority = loss.beta_majority = cfg.beta_uniform;
  return loss;
}

RunSeeds run_seeds(std::uint64_t seed) {
  const RngStream root(seed);
  return {root.fork(10).seed(), root.fork(11).seed(), root.fork(12).seed(), root.fork(13).seed()};
}

EncoderDims encoder_dims(const ExperimentConfig& cfg, const Dataset& data) {
  if (data.empty()) throw ConfigError("empty dataset");
  return EncoderDims{data.front().features.size(), cfg.hidden, data.front().labels.size(),
                     cfg.embed_dim};
}

PretrainConfig pretrain_config(const ExperimentConfig& cfg, const AblationSwitches& sw) {
  PretrainConfig pc;
  pc.loss = effective_loss_config(cfg, sw);
  pc.augment = cfg.augment;
  pc.epochs = cfg.pretrain_epochs;
  pc.batch_size = cfg.batch_size;
  pc.optim.lr = cfg.pretrain_lr;
  pc.optim.weight_decay = cfg.weight_decay;
  pc.use_label_weights = sw.use_wi;
  return pc;
}

LinearEvalConfig linear_config(const ExperimentConfig& cfg) {
  LinearEvalConfig lc;
  lc.epochs = cfg.linear_epochs;
  lc.batch_size = cfg.linear_batch_size;
  lc.optim.lr = cfg.linear_lr;
  lc.optim.weight_decay = cfg.weight_decay;
  lc.threshold = cfg.threshold;
  lc.normalize = cfg.aunce.normalize;
  lc.eps = cfg.aunce.eps;
  return lc;
}

BaselineConfig baseline_config(const ExperimentConfig& cfg) {
  BaselineConfig bc;
  bc.epochs = cfg.pretrain_epochs;
  bc.batch_size = cfg.batch_size;
  bc.optim.lr = cfg.pretrain_lr;
  bc.optim.weight_decay = cfg.weight_decay;
  bc.threshold = cfg.threshold;
  bc.normalize = cfg.aunce.normalize;
  bc.eps = cfg.aunce.eps;
  return bc;
}

ContrastiveOutcome run_contrastive(const Dataset& data, const ExperimentConfig& cfg,
                                   const AblationSwitches& sw, std::uint64_t seed) {
  const RunSeeds seeds = run_seeds(seed);
  const auto [train, test] = split(data, cfg.train_fraction, seeds.split);
  const EncoderParams init = init_encoder(encoder_dims(cfg, data), seeds.init);
  PretrainResult pre = pretrain(train, init, pretrain_config(cfg, sw), seeds.pretrain);
  const auto rates = training_rates(train);
  const AuWeights w = sw.use_wi ? au_weights(rates) : uniform_weights(rates);
  LinearEvalResult lin = linear_eval(pre.encoder, train, test, w, linear_config(cfg), seeds.linear);
  return {std::move(pre), std::move(lin)};
}

BaselineResult run_baseline(const Dataset& data, const ExperimentConfig& cfg, std::uint64_t seed) {
  const RunSeeds seeds = run_seeds(seed);
  const auto [train, test] = split(data, cfg.train_fraction, seeds.split);
  const EncoderParams init = init_encoder(encoder_dims(cfg, data), seeds.init);
  const auto rates = training_rates(train);
  const AuWeights w = cfg.switches.use_wi ? au_weights(rates) : uniform_weights(rates);
  return baseline_e2e(train, test, init, w, baseline_config(cfg), seeds.pretrain);
}

std::vector<ModelVariant> ablation_models() {
  return {{"A", {false, false, false}},
          {"B", {true, false, false}},
          {"C", {true, true, false}},
          {"D", {true, false, true}},
          {"E", {true, true, true}}};
}

// ---------------------------------------------------------------------------

double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::vector<VariantSummary> summarize(const std::vector<ResultRow>& rows) {
  std::vector<std::string> order;
  for (const auto& r : rows) {
    if (std::find(order.begin(), order.end(), r.variant) == order.end()) order.push_back(r.variant);
  }
  std::vector<VariantSummary> out;
  for (const auto& name : order) {
    std::vector<double> macro, micro, acc;
    std::vector<double> per_label;
    for (const auto& r : rows) {
      if (r.variant != name) continue;
      macro.push_back(r.metrics.f1_macro);
      micro.push_back(r.metrics.f1_micro);
      acc.push_back(r.metrics.accuracy);
      if (per_label.empty()) per_label.assign(r.metrics.f1_per_label.size(), 0.0);
      for (std::size_t i = 0; i < per_label.size(); ++i) per_label[i] += r.metrics.f1_per_label[i];
    }
    const auto n = static_cast<double>(macro.size());
    const auto avg = [n](const std::vector<double>& xs) {
      return std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    };
    for (double& v : per_label) v /= n;
    out.push_back({name, macro.size(), avg(macro), sample_sd(macro), avg(micro), sample_sd(micro),
                   avg(acc), sample_sd(acc), per_label});
  }
  return out;
}

const VariantSummary& find_summary(const std::vector<VariantSummary>& s, std::string_view name) {
  for (const auto& v : s) {
    if (v.variant == name) return v;
  }
  throw ContractViolation("no summary for variant '" + std::string(name) + "'");
}

std::string rows_csv(const std::vector<ResultRow>& rows) {
  if (rows.empty()) return "variant,seed\n";
  std::string out = "variant,seed," + metrics_csv_header(rows.front().metrics.f1_per_label.size()) +
                    "\n";
  for (const auto& r : rows) {
    out += r.variant + "," + std::to_string(r.seed) + "," + metrics_csv_row(r.metrics) + "\n";
  }
  return out;
}

std::string summary_csv(const std::vector<VariantSummary>& s) {
  std::string out =
      "variant,runs,f1_macro_mean,f1_macro_sd,f1_micro_mean,f1_micro_sd,accuracy_mean,"
      "accuracy_sd\n";
  for (const auto& v : s) {
    out += v.variant + "," + std::to_string(v.runs) + "," + format_double(v.f1_macro_mean) + "," +
           format_double(v.f1_macro_sd) + "," + format_double(v.f1_micro_mean) + "," +
           format_double(v.f1_micro_sd) + "," + format_double(v.accuracy_mean) + "," +
           format_double(v.accuracy_sd) + "\n";
  }
  return out;
}

nlohmann::json summary_json(const std::vector<VariantSummary>& s) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& v : s) {
    out.push_back({{"variant", v.variant},
                   {"runs", v.runs},
                   {"f1_macro", {{"mean", v.f1_macro_mean}, {"sd", v.f1_macro_sd}}},
                   {"f1_micro", {{"mean", v.f1_micro_mean}, {"sd", v.f1_micro_sd}}},
                   {"accuracy", {{"mean", v.accuracy_mean}, {"sd", v.accuracy_sd}}},
                   {"f1_per_label_mean", v.f1_per_label_mean}});
  }
  return out;
}

std::vector<ResultRow> run_ablation(const Dataset& data, const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ResultRow> rows;
  for (const auto& model : ablation_models()) {
    for (std::uint64_t seed : cfg.seeds) {
      rows.push_back({model.name, seed, run_contrastive(data, cfg, model.switches, seed).linear.metrics});
    }
  }
  return rows;
}

std::vector<SweepPoint> sweep_grid(const ExperimentConfig& cfg, std::string_view axis) {
  std::vector<SweepPoint> grid;
  if (axis == "probs") {
    const std::vector<PositiveProbs> rows = {
        {1, 0, 0, 0},         {0, 1, 0, 0},         {0, 0, 1, 0},         {0, 0, 0, 1},
        {0.1, 0.1, 0.8, 0},   {0.15, 0.15, 0.7, 0}, {0.2, 0.2, 0.6, 0},   {0.25, 0.25, 0.5, 0},
        {0.3, 0.3, 0.4, 0},   {0.4, 0.4, 0.2, 0}};
    for (const auto& p : rows) {
      AunceConfig loss = cfg.aunce;
      loss.probs = p;
      grid.push_back({"p=" + format_double(p.highest) + "/" + format_double(p.augmented) + "/" +
                          format_double(p.mixture) + "/" + format_double(p.lowest),
                      loss});
    }
    return grid;
  }
  if (axis == "beta") {
    const auto add = [&](double minority, double majority) {
      AunceConfig loss = cfg.aunce;
      loss.beta_minority = minority;
      loss.beta_majority = majority;
      grid.push_back(
          {"beta=" + format_double(minority) + "/" + format_double(majority), loss});
    };
    for (double b : {0.8, 1.0, 1.2, 1.4, 1.6, 1.8}) add(b, 0.4);
    for (double b : {0.2, 0.6, 0.8, 1.0, 1.2}) add(1.2, b);
    return grid;
  }
  throw ConfigError("unknown sweep axis '" + std::string(axis) + "' (expected probs or beta)");
}

std::vector<ResultRow> run_sweep(const Dataset& data, const ExperimentConfig& cfg,
                                 std::string_view axis) {
  cfg.validate();
  std::vector<ResultRow> rows;
  for (const auto& point : sweep_grid(cfg, axis)) {
    ExperimentConfig c = cfg;
    c.aunce = point.loss;
    for (std::uint64_t seed : cfg.seeds) {
      rows.push_back({point.name, seed,
                      run_contrastive(data, c, AblationSwitches{}, seed).linear.metrics});
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------

namespace {

Vec random_unit(RngStream& rng, std::size_t d) {
  Vec v(d);
  for (double& x : v) x = rng.normal();
  return l2_normalize(v);
}

double term_max_rel(RngStream& rng, bool fault) {
  const std::size_t d = 2 + rng.index(31);
  const std::size_t n_neg = 1 + rng.index(16);
  const double beta = rng.uniform(0.2, 2.0);
  const double tau = rng.uniform(0.3, 1.0);
  std::vector<double> x;
  for (std::size_t k = 0; k < n_neg + 2; ++k) {
    const Vec v = random_unit(rng, d);
    x.insert(x.end(), v.begin(), v.end());
  }
  const auto unpack = [d, n_neg](std::span<const double> flat) {
    std::vector<Vec> vs;
    for (std::size_t k = 0; k < n_neg + 2; ++k) {
      vs.emplace_back(std::vector<double>(flat.begin() + k * d, flat.begin() + (k + 1) * d));
    }
    return vs;
  };
  const ScalarFn f = [&](std::span<const double> flat) {
    const auto vs = unpack(flat);
    return aunce_term(vs[0], vs[1], std::span(vs).subspan(2), beta, tau).value;
  };
  const auto vs = unpack(x);
  const TermResult r = aunce_term(vs[0], vs[1], std::span(vs).subspan(2), beta, tau);
  std::vector<double> g;
  g.insert(g.end(), r.grad.anchor.begin(), r.grad.anchor.end());
  g.insert(g.end(), r.grad.positive.begin(), r.grad.positive.end());
  for (const Vec& gn : r.grad.negatives) g.insert(g.end(), gn.begin(), gn.end());
  if (fault) for (double& v : g) v = -v;
  return grad_check(f, x, g, 1e-6, 1e-6).max_rel_error;
}

double wce_max_rel(RngStream& rng, bool fault) {
  const std::size_t n = 1 + rng.index(12);
  LabelVector y(n);
  std::vector<double> yhat(n), rates(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = rng.bernoulli(0.5) ? 1 : 0;
    yhat[i] = rng.uniform(0.05, 0.95);
    rates[i] = rng.uniform(0.05, 0.95);
  }
  const AuWeights w = au_weights(rates);
  const ScalarFn f = [&](std::span<const double> p) { return wce_loss(y, p, w); };
  auto g = wce_grad(y, yhat, w);
  if (fault) for (double& v : g) v = -v;
  return grad_check(f, yhat, g, 1e-6, 1e-6).max_rel_error;
}

double encoder_max_rel(RngStream& rng, bool fault) {
  const EncoderDims dims{3 + rng.index(4), 3 + rng.index(4), 1 + rng.index(3), 2 + rng.index(3)};
  EncoderParams params = init_encoder(dims, rng.next_u64());
  // non-zero biases so every parameter block is exercised
  for (double& v : params.values()) v += 0.1 * rng.normal();
  Vec x(dims.feature_dim);
  for (double& v : x) v = rng.normal();
  EmbeddingSet coef(dims.n_au, Vec(dims.embed_dim));
  for (Vec& c : coef) for (double& v : c) v = rng.normal();

  const ScalarFn f = [&](std::span<const double> flat) {
    EncoderParams p = params;
    std::copy(flat.begin(), flat.end(), p.values().begin());
    const EmbeddingSet e = forward(p, x, true);
    double s = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) s += dot(coef[i], e[i]);
    return s;
  };
  auto g = backward(params, x, coef, true);
  if (fault) for (double& v : g) v = -v;
  const std::vector<double> flat(params.values().begin(), params.values().end());
  return grad_check(f, flat, g, 1e-6, 1e-6).max_rel_error;
}

}  // namespace

nlohmann::json to_json(const GradcheckSuiteReport& r) {
  return {{"trials", r.trials},
          {"aunce_term_max_rel_error", r.aunce_max_rel},
          {"wce_max_rel_error", r.wce_max_rel},
          {"encoder_max_rel_error", r.encoder_max_rel},
          {"tolerance", r.tolerance},
          {"passed", r.passed}};
}

GradcheckSuiteReport run_gradcheck(std::uint64_t seed, std::size_t trials, bool inject_fault) {
  if (trials == 0) throw ConfigError("gradcheck: trials must be positive");
  GradcheckSuiteReport report;
  report.trials = trials;
  const RngStream root(seed);
  RngStream term_rng = root.fork(1), wce_rng = root.fork(2), enc_rng = root.fork(3);
  for (std::size_t t = 0; t < trials; ++t) {
    report.aunce_max_rel = std::max(report.aunce_max_rel, term_max_rel(term_rng, inject_fault));
    report.wce_max_rel = std::max(report.wce_max_rel, wce_max_rel(wce_rng, inject_fault));
    report.encoder_max_rel = std::max(report.encoder_max_rel, encoder_max_rel(enc_rng, inject_fault));
  }
  report.passed = report.aunce_max_rel < report.tolerance && report.wce_max_rel < report.tolerance &&
                  report.encoder_max_rel < report.tolerance;
  return report;
}

}  // namespace aunce
