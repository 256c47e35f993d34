#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aunce/core_math.hpp"

namespace aunce {

using LabelVector = std::vector<std::uint8_t>;

struct LabeledSample {
  Vec features;
  /// Observed (possibly flipped) labels.
  LabelVector labels;
  /// Ground truth before label flipping.
  LabelVector clean_labels;
};

using Dataset = std::vector<LabeledSample>;

/// Parameters of the synthetic multi-label generator. Features are sums of
/// per-label class prototypes plus isotropic Gaussian noise.
struct GeneratorSpec {
  std::size_t n_au = 2;
  std::size_t feature_dim = 64;
  std::vector<double> rates = {0.5, 0.5};
  double prototype_scale = 1.0;
  double noise_sigma = 0.5;
  /// Symmetric per-label flip probability, in [0, 0.5).
  double flip_rate = 0.0;
  std::size_t n_samples = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

/// The two class prototypes (inactive, active) of one label.
using LabelPrototypes = std::array<Vec, 2>;

/// Prototypes are drawn from a dedicated fork of the generator seed, so they can be
/// recovered without regenerating the samples.
std::vector<LabelPrototypes> draw_prototypes(const GeneratorSpec& spec);

Dataset generate(const GeneratorSpec& spec);

/// Seeded shuffle split; the train part holds round(train_fraction * n) samples.
std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, std::uint64_t seed);

/// Empirical activation frequency of each observed label.
std::vector<double> label_rates(const Dataset& data);

/// Clamps empirical rates into [0.5/n, 1 - 0.5/n] so they are valid weight
/// inputs even when a label never (or always) fires in a small set.
std::vector<double> clamp_rates(std::vector<double> rates, std::size_t n_samples);

/// Named occurrence-rate presets: "bp4d-rates" (12 labels), "disfa-rates" (8).
std::vector<double> preset_rates(std::string_view name);
std::vector<std::string> preset_names();

// CSV: f0..f{D-1}, au0..au{n-1}, clean0..clean{n-1}; reals as %.9g.
void write_csv(std::ostream& os, const Dataset& data);
Dataset read_csv(std::istream& is);
void save_dataset(const std::filesystem::path& csv_path, const Dataset& data,
                  const GeneratorSpec& spec);
Dataset load_dataset(const std::filesystem::path& csv_path);

/// Sidecar metadata path for a dataset CSV: "<stem>.meta.json".
std::filesystem::path metadata_path(const std::filesystem::path& csv_path);

void to_json(nlohmann::json& j, const GeneratorSpec& spec);
void from_json(const nlohmann::json& j, GeneratorSpec& spec);

}  // namespace aunce
