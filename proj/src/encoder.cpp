#include "aunce/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "aunce/errors.hpp"
#include "aunce/rng.hpp"

namespace aunce {

namespace {

constexpr int kCheckpointVersion = 1;

struct TrunkActivations {
  std::vector<double> hidden;  // tanh output
};

TrunkActivations run_trunk(const EncoderParams& p, const Vec& x) {
  const auto& d = p.dims();
  if (x.size() != d.feature_dim) {
    throw ContractViolation("encoder: input has dimension " + std::to_string(x.size()) +
                            ", expected " + std::to_string(d.feature_dim));
  }
  const auto w = p.trunk_weights();
  const auto b = p.trunk_bias();
  TrunkActivations act;
  act.hidden.resize(d.hidden);
  for (std::size_t h = 0; h < d.hidden; ++h) {
    double s = b[h];
    const double* row = w.data() + h * d.feature_dim;
    for (std::size_t k = 0; k < d.feature_dim; ++k) s += row[k] * x[k];
    act.hidden[h] = std::tanh(s);
  }
  return act;
}

Vec run_head(const EncoderParams& p, std::size_t label, std::span<const double> hidden) {
  const auto& d = p.dims();
  const auto w = p.head_weights(label);
  const auto b = p.head_bias(label);
  Vec out(d.embed_dim);
  for (std::size_t e = 0; e < d.embed_dim; ++e) {
    double s = b[e];
    const double* row = w.data() + e * d.hidden;
    for (std::size_t h = 0; h < d.hidden; ++h) s += row[h] * hidden[h];
    out[e] = s;
  }
  return out;
}

}  // namespace

void EncoderDims::validate() const {
  if (feature_dim == 0 || hidden == 0 || n_au == 0 || embed_dim == 0) {
    throw ConfigError("encoder dimensions must all be positive");
  }
}

std::size_t parameter_count(const EncoderDims& d) {
  return d.hidden * d.feature_dim + d.hidden + d.n_au * (d.embed_dim * d.hidden + d.embed_dim);
}

EncoderParams::EncoderParams(EncoderDims dims, std::uint64_t seed)
    : dims_(dims), seed_(seed) {
  dims_.validate();
  values_.assign(parameter_count(dims_), 0.0);
}

std::size_t EncoderParams::trunk_bias_offset() const noexcept {
  return dims_.hidden * dims_.feature_dim;
}

std::size_t EncoderParams::head_weights_offset(std::size_t label) const noexcept {
  return trunk_bias_offset() + dims_.hidden +
         label * (dims_.embed_dim * dims_.hidden + dims_.embed_dim);
}

std::size_t EncoderParams::head_bias_offset(std::size_t label) const noexcept {
  return head_weights_offset(label) + dims_.embed_dim * dims_.hidden;
}

std::span<const double> EncoderParams::trunk_weights() const noexcept {
  return std::span<const double>(values_).subspan(0, dims_.hidden * dims_.feature_dim);
}

std::span<const double> EncoderParams::trunk_bias() const noexcept {
  return std::span<const double>(values_).subspan(trunk_bias_offset(), dims_.hidden);
}

std::span<const double> EncoderParams::head_weights(std::size_t label) const noexcept {
  return std::span<const double>(values_).subspan(head_weights_offset(label),
                                                  dims_.embed_dim * dims_.hidden);
}

std::span<const double> EncoderParams::head_bias(std::size_t label) const noexcept {
  return std::span<const double>(values_).subspan(head_bias_offset(label), dims_.embed_dim);
}

EncoderParams init_encoder(const EncoderDims& dims, std::uint64_t seed) {
  EncoderParams p(dims, seed);
  RngStream rng(seed);
  auto v = p.values();
  const double trunk_bound = 1.0 / std::sqrt(static_cast<double>(dims.feature_dim));
  for (std::size_t k = 0; k < p.trunk_bias_offset(); ++k) {
    v[k] = rng.uniform(-trunk_bound, trunk_bound);
  }
  const double head_bound = 1.0 / std::sqrt(static_cast<double>(dims.hidden));
  for (std::size_t i = 0; i < dims.n_au; ++i) {
    const std::size_t off = p.head_weights_offset(i);
    for (std::size_t k = 0; k < dims.embed_dim * dims.hidden; ++k) {
      v[off + k] = rng.uniform(-head_bound, head_bound);
    }
  }
  return p;
}

EmbeddingSet forward(const EncoderParams& params, const Vec& x, bool normalize) {
  const TrunkActivations act = run_trunk(params, x);
  EmbeddingSet out;
  out.reserve(params.dims().n_au);
  for (std::size_t i = 0; i < params.dims().n_au; ++i) {
    Vec raw = run_head(params, i, act.hidden);
    out.push_back(normalize ? l2_normalize(raw) : std::move(raw));
  }
  return out;
}

void backward_accumulate(const EncoderParams& params, const Vec& x, const EmbeddingSet& upstream,
                         bool normalize, std::span<double> grad) {
  const auto& d = params.dims();
  if (upstream.size() != d.n_au) throw ContractViolation("backward: upstream label count");
  if (grad.size() != params.size()) throw ContractViolation("backward: gradient buffer size");
  const TrunkActivations act = run_trunk(params, x);

  std::vector<double> g_hidden(d.hidden, 0.0);
  for (std::size_t i = 0; i < d.n_au; ++i) {
    const Vec& g = upstream[i];
    if (g.size() != d.embed_dim) throw ContractViolation("backward: upstream embedding size");
    if (std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; })) continue;
    const Vec g_raw = normalize ? l2_normalize_backward(run_head(params, i, act.hidden), g) : g;

    const auto w = params.head_weights(i);
    double* gw = grad.data() + params.head_weights_offset(i);
    double* gb = grad.data() + params.head_bias_offset(i);
    for (std::size_t e = 0; e < d.embed_dim; ++e) {
      const double ge = g_raw[e];
      gb[e] += ge;
      const double* row = w.data() + e * d.hidden;
      double* grow = gw + e * d.hidden;
      for (std::size_t h = 0; h < d.hidden; ++h) {
        grow[h] += ge * act.hidden[h];
        g_hidden[h] += ge * row[h];
      }
    }
  }

  double* gw = grad.data() + params.trunk_weights_offset();
  double* gb = grad.data() + params.trunk_bias_offset();
  for (std::size_t h = 0; h < d.hidden; ++h) {
    const double g_pre = g_hidden[h] * (1.0 - act.hidden[h] * act.hidden[h]);
    if (g_pre == 0.0) continue;
    gb[h] += g_pre;
    double* grow = gw + h * d.feature_dim;
    for (std::size_t k = 0; k < d.feature_dim; ++k) grow[k] += g_pre * x[k];
  }
}

std::vector<double> backward(const EncoderParams& params, const Vec& x,
                             const EmbeddingSet& upstream, bool normalize) {
  std::vector<double> grad(params.size(), 0.0);
  backward_accumulate(params, x, upstream, normalize, grad);
  return grad;
}

Vec concat(const EmbeddingSet& set) {
  std::vector<double> out;
  for (const Vec& v : set) out.insert(out.end(), v.begin(), v.end());
  return Vec(std::move(out));
}

nlohmann::json checkpoint_json(const EncoderParams& params) {
  const auto& d = params.dims();
  return {{"format", "aunce-encoder"},
          {"version", kCheckpointVersion},
          {"dims",
           {{"feature_dim", d.feature_dim},
            {"hidden", d.hidden},
            {"n_au", d.n_au},
            {"embed_dim", d.embed_dim}}},
          {"nonlinearity", "tanh"},
          {"seed", params.seed()},
          {"params", std::vector<double>(params.values().begin(), params.values().end())}};
}

EncoderParams from_checkpoint_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "aunce-encoder") throw IoError("checkpoint: unexpected format tag");
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw IoError("checkpoint: unsupported version");
    }
    const auto& jd = j.at("dims");
    EncoderDims dims{jd.at("feature_dim").get<std::size_t>(), jd.at("hidden").get<std::size_t>(),
                     jd.at("n_au").get<std::size_t>(), jd.at("embed_dim").get<std::size_t>()};
    EncoderParams p(dims, j.at("seed").get<std::uint64_t>());
    const auto values = j.at("params").get<std::vector<double>>();
    if (values.size() != p.size()) throw IoError("checkpoint: parameter count mismatch");
    std::copy(values.begin(), values.end(), p.values().begin());
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const EncoderParams& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write checkpoint " + path.string());
  os << checkpoint_json(params).dump() << "\n";
  if (!os) throw IoError("write failed for " + path.string());
}

EncoderParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read checkpoint " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("checkpoint " + path.string() + ": " + e.what());
  }
  return from_checkpoint_json(j);
}

}  // namespace aunce
