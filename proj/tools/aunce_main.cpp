// aunce: command-line front-end for dataset generation, training runs,
// ablations, sweeps and the gradient-check suite.
//
// Exit codes: 0 success, 1 unexpected error, 2 invalid configuration or
// arguments, 3 I/O error, 4 numeric failure (including a failed gradient
// check), 5 any other library error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "aunce/errors.hpp"
#include "aunce/experiment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode : int {
  kOk = 0,
  kUnexpected = 1,
  kConfig = 2,
  kIo = 3,
  kNumeric = 4,
  kOther = 5,
};

struct Options {
  aunce::ExperimentConfig cfg;
  std::string fixture;
  std::string preset;
  std::string data;
  std::string checkpoint;
  std::string axis = "probs";
  std::size_t trials = 100;
  bool inject_fault = false;

  // generator overrides, applied after --fixture / --preset
  std::optional<std::size_t> n_au, feature_dim, n_samples;
  std::optional<std::uint64_t> data_seed;
  std::optional<double> noise_sigma, flip_rate, prototype_scale;
  std::vector<double> rates;
  std::vector<double> probs;
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw aunce::IoError("cannot create output directory '" + dir.string() + "'");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw aunce::IoError("cannot open '" + path.string() + "' for writing");
  os << text;
  if (!os) throw aunce::IoError("write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void resolve(Options& o) {
  aunce::GeneratorSpec& g = o.cfg.generator;
  if (!o.fixture.empty()) g = aunce::fixture_by_name(o.fixture);
  if (!o.preset.empty()) {
    g.rates = aunce::preset_rates(o.preset);
    g.n_au = g.rates.size();
  }
  if (o.n_au) g.n_au = *o.n_au;
  if (o.feature_dim) g.feature_dim = *o.feature_dim;
  if (o.n_samples) g.n_samples = *o.n_samples;
  if (o.data_seed) g.seed = *o.data_seed;
  if (o.noise_sigma) g.noise_sigma = *o.noise_sigma;
  if (o.flip_rate) g.flip_rate = *o.flip_rate;
  if (o.prototype_scale) g.prototype_scale = *o.prototype_scale;
  if (!o.rates.empty()) {
    g.rates = o.rates;
    if (!o.n_au) g.n_au = g.rates.size();
  }
  if (!o.probs.empty()) {
    if (o.probs.size() != 4) throw aunce::ConfigError("--probs takes exactly four values");
    o.cfg.aunce.probs = {o.probs[0], o.probs[1], o.probs[2], o.probs[3]};
  }
  o.cfg.validate();
}

json echo(const Options& o, const std::string& command) {
  json j = aunce::to_json(o.cfg);
  j["command"] = command;
  j["data"] = o.data;
  if (command == "linear-eval") j["checkpoint"] = o.checkpoint;
  if (command == "sweep") j["axis"] = o.axis;
  if (command == "gradcheck") {
    j["trials"] = o.trials;
    j["inject_fault"] = o.inject_fault;
  }
  return j;
}

/// --data if given (missing file is an I/O error), otherwise a freshly
/// generated set from the resolved generator spec.
aunce::Dataset input_data(const Options& o) {
  if (!o.data.empty()) {
    if (!fs::exists(o.data)) throw aunce::IoError("dataset not found: '" + o.data + "'");
    return aunce::load_dataset(o.data);
  }
  return aunce::generate(o.cfg.generator);
}

void write_metrics(const fs::path& out, const std::string& stem, const aunce::MetricsReport& m) {
  write_json(out / (stem + ".json"), aunce::to_json(m));
  write_text(out / (stem + ".csv"),
             aunce::metrics_csv_header(m.f1_per_label.size()) + "\n" + aunce::metrics_csv_row(m) +
                 "\n");
}

void write_table(const fs::path& out, const std::string& stem,
                 const std::vector<aunce::ResultRow>& rows) {
  const auto summary = aunce::summarize(rows);
  write_text(out / (stem + ".csv"), aunce::rows_csv(rows));
  write_text(out / (stem + "_summary.csv"), aunce::summary_csv(summary));
  write_json(out / (stem + "_summary.json"), aunce::summary_json(summary));
  for (const auto& s : summary) {
    std::cerr << s.variant << "  f1_macro " << aunce::format_double(s.f1_macro_mean) << " +- "
              << aunce::format_double(s.f1_macro_sd) << '\n';
  }
}

int cmd_generate(const Options& o, const fs::path& out) {
  const aunce::Dataset data = aunce::generate(o.cfg.generator);
  const fs::path csv = o.data.empty() ? out / "dataset.csv" : fs::path(o.data);
  aunce::save_dataset(csv, data, o.cfg.generator);
  std::cerr << "wrote " << data.size() << " samples to " << csv.string() << '\n';
  return kOk;
}

int cmd_pretrain(const Options& o, const fs::path& out) {
  const aunce::Dataset data = input_data(o);
  const auto seeds = aunce::run_seeds(o.cfg.seed);
  const auto [train, test] = aunce::split(data, o.cfg.train_fraction, seeds.split);
  const auto init = aunce::init_encoder(aunce::encoder_dims(o.cfg, data), seeds.init);
  try {
    const auto result =
        aunce::pretrain(train, init, aunce::pretrain_config(o.cfg, o.cfg.switches), seeds.pretrain);
    aunce::save_checkpoint(out / "encoder.json", result.encoder);
    write_text(out / "pretrain.jsonl", aunce::to_jsonl(result.run));
    write_json(out / "pretrain_summary.json", aunce::summary_json(result.run));
  } catch (const aunce::TrainingAborted& e) {
    write_text(out / "pretrain.jsonl", aunce::to_jsonl(e.partial_run()));
    write_json(out / "pretrain_summary.json", aunce::summary_json(e.partial_run()));
    throw;
  }
  return kOk;
}

int cmd_linear_eval(const Options& o, const fs::path& out) {
  const aunce::Dataset data = input_data(o);
  const fs::path ckpt = o.checkpoint.empty() ? out / "encoder.json" : fs::path(o.checkpoint);
  const auto encoder = aunce::load_checkpoint(ckpt);
  const auto seeds = aunce::run_seeds(o.cfg.seed);
  const auto [train, test] = aunce::split(data, o.cfg.train_fraction, seeds.split);
  const auto rates = aunce::training_rates(train);
  const auto w = o.cfg.switches.use_wi ? aunce::au_weights(rates) : aunce::uniform_weights(rates);
  const auto result =
      aunce::linear_eval(encoder, train, test, w, aunce::linear_config(o.cfg), seeds.linear);
  write_text(out / "linear.jsonl", aunce::to_jsonl(result.run));
  write_metrics(out, "metrics", result.metrics);
  std::cerr << "f1_macro " << aunce::format_double(result.metrics.f1_macro) << '\n';
  return kOk;
}

int cmd_baseline(const Options& o, const fs::path& out) {
  const aunce::Dataset data = input_data(o);
  const auto result = aunce::run_baseline(data, o.cfg, o.cfg.seed);
  aunce::save_checkpoint(out / "baseline_encoder.json", result.encoder);
  write_text(out / "baseline.jsonl", aunce::to_jsonl(result.run));
  write_metrics(out, "baseline_metrics", result.metrics);
  std::cerr << "f1_macro " << aunce::format_double(result.metrics.f1_macro) << '\n';
  return kOk;
}

int cmd_ablation(const Options& o, const fs::path& out) {
  const aunce::Dataset data = input_data(o);
  write_table(out, "ablation", aunce::run_ablation(data, o.cfg));
  return kOk;
}

int cmd_sweep(const Options& o, const fs::path& out) {
  aunce::sweep_grid(o.cfg, o.axis);  // rejects an unknown axis before loading data
  const aunce::Dataset data = input_data(o);
  write_table(out, "sweep_" + o.axis, aunce::run_sweep(data, o.cfg, o.axis));
  return kOk;
}

int cmd_gradcheck(const Options& o, const fs::path& out) {
  const auto report = aunce::run_gradcheck(o.cfg.seed, o.trials, o.inject_fault);
  write_json(out / "gradcheck.json", aunce::to_json(report));
  std::cerr << "gradcheck " << (report.passed ? "passed" : "FAILED") << ": max rel error term "
            << report.aunce_max_rel << ", wce " << report.wce_max_rel << ", encoder "
            << report.encoder_max_rel << '\n';
  return report.passed ? kOk : kNumeric;
}

void add_options(CLI::App& app, Options& o) {
  auto& c = o.cfg;
  app.set_config("--config", "", "Read options from a key = value file; flags override it");

  app.add_option("--seed", c.seed, "Run seed")->capture_default_str();
  app.add_option("--seeds", c.seeds, "Seed list for ablation and sweep runs")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--out", c.out_dir, "Output directory")->capture_default_str();
  app.add_option("--data", o.data, "Dataset CSV (generate: output path; others: input)");
  app.add_option("--checkpoint", o.checkpoint, "Encoder checkpoint for linear-eval");

  auto* gen = "Data generator";
  app.add_option("--fixture", o.fixture, "Named generator fixture")
      ->check(CLI::IsMember(aunce::fixture_names()))
      ->group(gen);
  app.add_option("--preset", o.preset, "Label-rate preset")
      ->check(CLI::IsMember(aunce::preset_names()))
      ->group(gen);
  app.add_option("--n-au", o.n_au, "Number of labels")->group(gen);
  app.add_option("--feature-dim", o.feature_dim, "Feature dimension")->group(gen);
  app.add_option("--rates", o.rates, "Per-label occurrence rates")->delimiter(',')->group(gen);
  app.add_option("--n-samples", o.n_samples, "Number of samples")->group(gen);
  app.add_option("--data-seed", o.data_seed, "Generator seed")->group(gen);
  app.add_option("--noise-sigma", o.noise_sigma, "Feature noise sigma")->group(gen);
  app.add_option("--flip-rate", o.flip_rate, "Label flip probability")->group(gen);
  app.add_option("--prototype-scale", o.prototype_scale, "Prototype norm")->group(gen);

  auto* loss = "Loss";
  app.add_option("--tau", c.aunce.tau, "Temperature")->capture_default_str()->group(loss);
  app.add_option("--beta-minority", c.aunce.beta_minority, "Beta for majority-valued anchors")
      ->capture_default_str()
      ->group(loss);
  app.add_option("--beta-majority", c.aunce.beta_majority, "Beta for minority-valued anchors")
      ->capture_default_str()
      ->group(loss);
  app.add_option("--beta-uniform", c.beta_uniform, "Beta used when --use-ns=false")
      ->capture_default_str()
      ->group(loss);
  app.add_option("--probs", o.probs, "Positive-kind probabilities: highest,augmented,mixture,lowest")
      ->delimiter(',')
      ->expected(4)
      ->group(loss);
  app.add_option("--normalize", c.aunce.normalize, "L2-normalize embeddings")
      ->capture_default_str()
      ->group(loss);
  app.add_option("--eps", c.aunce.eps, "Cross-entropy clamp")->capture_default_str()->group(loss);

  auto* aug = "Augmentation";
  app.add_option("--aug-noise", c.augment.noise_sigma)->capture_default_str()->group(aug);
  app.add_option("--aug-scale-lo", c.augment.scale_lo)->capture_default_str()->group(aug);
  app.add_option("--aug-scale-hi", c.augment.scale_hi)->capture_default_str()->group(aug);
  app.add_option("--aug-mask", c.augment.mask_fraction)->capture_default_str()->group(aug);

  auto* tr = "Training";
  app.add_option("--hidden", c.hidden)->capture_default_str()->group(tr);
  app.add_option("--embed-dim", c.embed_dim)->capture_default_str()->group(tr);
  app.add_option("--pretrain-epochs", c.pretrain_epochs)->capture_default_str()->group(tr);
  app.add_option("--batch-size", c.batch_size)->capture_default_str()->group(tr);
  app.add_option("--pretrain-lr", c.pretrain_lr)->capture_default_str()->group(tr);
  app.add_option("--weight-decay", c.weight_decay)->capture_default_str()->group(tr);
  app.add_option("--linear-epochs", c.linear_epochs)->capture_default_str()->group(tr);
  app.add_option("--linear-batch-size", c.linear_batch_size)->capture_default_str()->group(tr);
  app.add_option("--linear-lr", c.linear_lr)->capture_default_str()->group(tr);
  app.add_option("--train-fraction", c.train_fraction)->capture_default_str()->group(tr);
  app.add_option("--threshold", c.threshold)->capture_default_str()->group(tr);

  auto* sw = "Ablation switches";
  app.add_option("--use-wi", c.switches.use_wi)->capture_default_str()->group(sw);
  app.add_option("--use-ps", c.switches.use_ps)->capture_default_str()->group(sw);
  app.add_option("--use-ns", c.switches.use_ns)->capture_default_str()->group(sw);

  app.add_option("--axis", o.axis, "Sweep axis")
      ->check(CLI::IsMember({"probs", "beta"}))
      ->capture_default_str();
  app.add_option("--trials", o.trials, "Gradient-check instances per suite")->capture_default_str();
  app.add_flag("--inject-fault", o.inject_fault, "Negate analytic gradients (self-test)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contrastive multi-label representation learning on synthetic data"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  add_options(app, o);

  using Handler = int (*)(const Options&, const fs::path&);
  const std::vector<std::pair<std::string, std::pair<std::string, Handler>>> commands = {
      {"generate", {"Write a synthetic dataset (CSV + metadata)", cmd_generate}},
      {"pretrain", {"Contrastive pretraining of the encoder", cmd_pretrain}},
      {"linear-eval", {"Linear evaluation of a pretrained encoder", cmd_linear_eval}},
      {"baseline", {"End-to-end cross-entropy baseline", cmd_baseline}},
      {"ablation", {"Models A-E over the seed list", cmd_ablation}},
      {"sweep", {"Grid over positive probabilities or beta", cmd_sweep}},
      {"gradcheck", {"Finite-difference gradient checks", cmd_gradcheck}},
  };
  for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.first);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    resolve(o);
    const fs::path out = o.cfg.out_dir;
    ensure_dir(out);
    write_json(out / "config.json", echo(o, command));
    for (const auto& [name, entry] : commands) {
      if (name == command) return entry.second(o, out);
    }
    return kUnexpected;
  } catch (const aunce::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const aunce::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const aunce::NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const aunce::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return kUnexpected;
  }
}
