#include "aunce/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "aunce/errors.hpp"
#include "aunce/rng.hpp"

namespace aunce {

namespace {

enum StreamId : std::uint64_t { kPrototypes = 0, kSamples = 1, kFlips = 2 };

// Per-label occurrence rates of the BP4D and DISFA training sets.
constexpr std::array kBp4dRates = {0.211, 0.171, 0.203, 0.462, 0.549, 0.594,
                                   0.562, 0.466, 0.169, 0.344, 0.165, 0.152};
constexpr std::array kDisfaRates = {0.050, 0.040, 0.150, 0.081, 0.043, 0.132, 0.278, 0.089};

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::uint8_t parse_bit(const std::string& s, std::size_t row) {
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw IoError("dataset CSV row " + std::to_string(row) + ": label cell '" + s + "' is not 0/1");
}

}  // namespace

void GeneratorSpec::validate() const {
  if (n_au == 0) throw ConfigError("generator: n_au must be at least 1");
  if (feature_dim == 0) throw ConfigError("generator: feature_dim must be at least 1");
  if (rates.size() != n_au) throw ConfigError("generator: rates length must equal n_au");
  for (double r : rates) {
    if (!(r > 0.0 && r < 1.0)) throw ConfigError("generator: rates must lie in (0, 1)");
  }
  if (!(prototype_scale > 0.0)) throw ConfigError("generator: prototype_scale must be positive");
  if (!(noise_sigma >= 0.0)) throw ConfigError("generator: noise_sigma must be non-negative");
  if (!(flip_rate >= 0.0 && flip_rate < 0.5)) {
    throw ConfigError("generator: flip_rate must lie in [0, 0.5)");
  }
  if (n_samples == 0) throw ConfigError("generator: n_samples must be positive");
}

std::vector<LabelPrototypes> draw_prototypes(const GeneratorSpec& spec) {
  spec.validate();
  RngStream rng = RngStream(spec.seed).fork(kPrototypes);
  std::vector<LabelPrototypes> out(spec.n_au);
  for (auto& pair : out) {
    for (Vec& proto : pair) {
      Vec v(spec.feature_dim);
      for (double& x : v) x = rng.normal();
      proto = scaled(l2_normalize(v), spec.prototype_scale);
    }
  }
  return out;
}

Dataset generate(const GeneratorSpec& spec) {
  const std::vector<LabelPrototypes> protos = draw_prototypes(spec);
  const RngStream root(spec.seed);
  RngStream sample_rng = root.fork(kSamples);
  RngStream flip_rng = root.fork(kFlips);

  Dataset data;
  data.reserve(spec.n_samples);
  for (std::size_t s = 0; s < spec.n_samples; ++s) {
    LabeledSample sample;
    sample.clean_labels.resize(spec.n_au);
    sample.features = Vec(spec.feature_dim);
    for (std::size_t i = 0; i < spec.n_au; ++i) {
      const std::uint8_t bit = sample_rng.bernoulli(spec.rates[i]) ? 1 : 0;
      sample.clean_labels[i] = bit;
      axpy(1.0, protos[i][bit], sample.features);
    }
    for (double& x : sample.features) x += spec.noise_sigma * sample_rng.normal();
    sample.labels = sample.clean_labels;
    for (auto& bit : sample.labels) {
      if (flip_rng.bernoulli(spec.flip_rate)) bit ^= 1;
    }
    data.push_back(std::move(sample));
  }
  return data;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("split: train_fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  RngStream rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  const auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(data.size())));
  std::pair<Dataset, Dataset> out;
  out.first.reserve(n_train);
  out.second.reserve(data.size() - n_train);
  for (std::size_t k = 0; k < order.size(); ++k) {
    (k < n_train ? out.first : out.second).push_back(data[order[k]]);
  }
  return out;
}

std::vector<double> label_rates(const Dataset& data) {
  if (data.empty()) throw DegenerateInput("label_rates: empty dataset");
  std::vector<double> rates(data.front().labels.size(), 0.0);
  for (const auto& s : data) {
    for (std::size_t i = 0; i < rates.size(); ++i) rates[i] += s.labels[i];
  }
  for (double& r : rates) r /= static_cast<double>(data.size());
  return rates;
}

std::vector<double> clamp_rates(std::vector<double> rates, std::size_t n_samples) {
  const double lo = 0.5 / static_cast<double>(std::max<std::size_t>(n_samples, 1));
  for (double& r : rates) r = std::clamp(r, lo, 1.0 - lo);
  return rates;
}

std::vector<double> preset_rates(std::string_view name) {
  if (name == "bp4d-rates") return {kBp4dRates.begin(), kBp4dRates.end()};
  if (name == "disfa-rates") return {kDisfaRates.begin(), kDisfaRates.end()};
  throw ConfigError("unknown rate preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() { return {"bp4d-rates", "disfa-rates"}; }

void write_csv(std::ostream& os, const Dataset& data) {
  if (data.empty()) throw DegenerateInput("write_csv: empty dataset");
  const std::size_t dim = data.front().features.size();
  const std::size_t n_au = data.front().labels.size();
  std::string line;
  for (std::size_t k = 0; k < dim; ++k) line += "f" + std::to_string(k) + ",";
  for (std::size_t i = 0; i < n_au; ++i) line += "au" + std::to_string(i) + ",";
  for (std::size_t i = 0; i < n_au; ++i) {
    line += "clean" + std::to_string(i);
    line += (i + 1 < n_au ? "," : "\n");
  }
  os << line;
  for (const auto& s : data) {
    if (s.features.size() != dim || s.labels.size() != n_au || s.clean_labels.size() != n_au) {
      throw ContractViolation("write_csv: ragged dataset");
    }
    line.clear();
    for (double x : s.features) line += format_real(x) + ",";
    for (auto b : s.labels) line += (b ? "1," : "0,");
    for (std::size_t i = 0; i < n_au; ++i) {
      line += (s.clean_labels[i] ? "1" : "0");
      line += (i + 1 < n_au ? "," : "\n");
    }
    os << line;
  }
}

Dataset read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("dataset CSV: missing header");
  const auto header = split_csv_line(line);
  std::size_t dim = 0, n_au = 0, n_clean = 0;
  for (const auto& h : header) {
    if (h.rfind("clean", 0) == 0) ++n_clean;
    else if (h.rfind("au", 0) == 0) ++n_au;
    else if (h.rfind("f", 0) == 0) ++dim;
    else throw IoError("dataset CSV: unexpected column '" + h + "'");
  }
  if (dim == 0 || n_au == 0 || n_au != n_clean) throw IoError("dataset CSV: malformed header");

  Dataset data;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw IoError("dataset CSV row " + std::to_string(row) + ": wrong cell count");
    }
    LabeledSample s;
    s.features = Vec(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      try {
        std::size_t used = 0;
        s.features[k] = std::stod(cells[k], &used);
        if (used != cells[k].size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw IoError("dataset CSV row " + std::to_string(row) + ": bad real '" + cells[k] + "'");
      }
    }
    for (std::size_t i = 0; i < n_au; ++i) s.labels.push_back(parse_bit(cells[dim + i], row));
    for (std::size_t i = 0; i < n_au; ++i) {
      s.clean_labels.push_back(parse_bit(cells[dim + n_au + i], row));
    }
    data.push_back(std::move(s));
  }
  if (data.empty()) throw IoError("dataset CSV: no rows");
  return data;
}

std::filesystem::path metadata_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".meta.json");
  return p;
}

void save_dataset(const std::filesystem::path& csv_path, const Dataset& data,
                  const GeneratorSpec& spec) {
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw IoError("cannot write " + csv_path.string());
  write_csv(csv, data);
  if (!csv) throw IoError("write failed for " + csv_path.string());

  nlohmann::json meta = {{"format", "aunce-dataset"}, {"version", 1}, {"generator", spec},
                         {"rows", data.size()}};
  std::ofstream js(metadata_path(csv_path), std::ios::binary);
  if (!js) throw IoError("cannot write " + metadata_path(csv_path).string());
  js << meta.dump(2) << "\n";
}

Dataset load_dataset(const std::filesystem::path& csv_path) {
  std::ifstream csv(csv_path, std::ios::binary);
  if (!csv) throw IoError("cannot read dataset " + csv_path.string());
  return read_csv(csv);
}

void to_json(nlohmann::json& j, const GeneratorSpec& spec) {
  j = {{"n_au", spec.n_au},
       {"feature_dim", spec.feature_dim},
       {"rates", spec.rates},
       {"prototype_scale", spec.prototype_scale},
       {"noise_sigma", spec.noise_sigma},
       {"flip_rate", spec.flip_rate},
       {"n_samples", spec.n_samples},
       {"seed", spec.seed}};
}

void from_json(const nlohmann::json& j, GeneratorSpec& spec) {
  j.at("n_au").get_to(spec.n_au);
  j.at("feature_dim").get_to(spec.feature_dim);
  j.at("rates").get_to(spec.rates);
  j.at("prototype_scale").get_to(spec.prototype_scale);
  j.at("noise_sigma").get_to(spec.noise_sigma);
  j.at("flip_rate").get_to(spec.flip_rate);
  j.at("n_samples").get_to(spec.n_samples);
  j.at("seed").get_to(spec.seed);
}

}  // namespace aunce
