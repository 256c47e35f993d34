#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "aunce/core_math.hpp"

namespace aunce {

struct EncoderDims {
  std::size_t feature_dim = 64;
  std::size_t hidden = 128;
  std::size_t n_au = 12;
  std::size_t embed_dim = 32;

  void validate() const;
  bool operator==(const EncoderDims&) const = default;
};

/// Parameters of a one-layer tanh trunk followed by one linear head per label.
///
/// Flat layout, all row-major:
///   trunk weights [hidden x feature_dim], trunk bias [hidden],
///   then per label i: head weights [embed_dim x hidden], head bias [embed_dim].
class EncoderParams {
 public:
  /// All-zero parameters.
  explicit EncoderParams(EncoderDims dims, std::uint64_t seed = 0);

  const EncoderDims& dims() const noexcept { return dims_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  std::span<const double> trunk_weights() const noexcept;
  std::span<const double> trunk_bias() const noexcept;
  std::span<const double> head_weights(std::size_t label) const noexcept;
  std::span<const double> head_bias(std::size_t label) const noexcept;

  std::size_t trunk_weights_offset() const noexcept { return 0; }
  std::size_t trunk_bias_offset() const noexcept;
  std::size_t head_weights_offset(std::size_t label) const noexcept;
  std::size_t head_bias_offset(std::size_t label) const noexcept;

  bool operator==(const EncoderParams&) const = default;

 private:
  EncoderDims dims_;
  std::uint64_t seed_;
  std::vector<double> values_;
};

std::size_t parameter_count(const EncoderDims& dims);

/// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero; deterministic
/// given the seed.
EncoderParams init_encoder(const EncoderDims& dims, std::uint64_t seed);

/// trunk -> per-label heads -> optional L2 normalization.
EmbeddingSet forward(const EncoderParams& params, const Vec& x, bool normalize);

/// Adds dL/dparams to `grad` (length params.size()) given dL/dembeddings.
void backward_accumulate(const EncoderParams& params, const Vec& x, const EmbeddingSet& upstream,
                         bool normalize, std::span<double> grad);

std::vector<double> backward(const EncoderParams& params, const Vec& x,
                             const EmbeddingSet& upstream, bool normalize);

/// Concatenated per-label embeddings (n_au * embed_dim), the linear-probe input.
Vec concat(const EmbeddingSet& set);

// Checkpoint: JSON {"format", "version", "dims", "seed", "params"}. Reals are
// written in shortest round-trip form, so save -> load is exact.
nlohmann::json checkpoint_json(const EncoderParams& params);
EncoderParams from_checkpoint_json(const nlohmann::json& j);
void save_checkpoint(const std::filesystem::path& path, const EncoderParams& params);
EncoderParams load_checkpoint(const std::filesystem::path& path);

}  // namespace aunce
