// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "model/segan_model.hpp"

#include <cmath>
#include <map>

#include "engine/optimizer.hpp"
#include "engine/tensor_file.hpp"

namespace segan::model {

using engine::Shape;
using engine::shape_string;

namespace {

std::string layer_name(const char* prefix, std::size_t i, const char* field) {
  return std::string(prefix) + std::to_string(i) + "." + field;
}

Tensor<float> init_normal(const Shape& shape, std::uint64_t seed) {
  return engine::sample_normal<float>(shape, seed, kInitStddev);
}

void require_shape(const Tensor<float>& t, const Shape& expected, const char* what) {
  if (t.shape() != expected) {
    fail(ErrorCode::kShapeMismatch, std::string(what) + ": expected " + shape_string(expected) +
                                        ", got " + shape_string(t.shape()));
  }
}

// Normalizes x by the given statistics (plain batch norm with frozen stats).
Tensor<float> normalize(const Tensor<float>& x, const engine::VbnReference<float>& ref,
                        const Tensor<float>& gamma, const Tensor<float>& beta) {
  const std::size_t c = x.dim(2);
  std::vector<float> inv(c);
  for (std::size_t k = 0; k < c; ++k) {
    inv[k] = static_cast<float>(1.0 / std::sqrt(static_cast<double>(ref.var[k]) + engine::kVbnEpsilon));
  }
  Tensor<float> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t k = i % c;
    y[i] = gamma[k] * (x[i] - ref.mean[k]) * inv[k] + beta[k];
  }
  return y;
}

}  // namespace

void GeneratorConfig::validate() const {
  auto bad = [](const std::string& msg) { fail(ErrorCode::kConfig, msg); };
  if (enc_channels.empty()) bad("enc_channels must list at least one layer");
  if (filter_width == 0 || filter_width % 2 == 0) bad("filter_width must be odd");
  if (stride == 0) bad("stride must be positive");
  if (window == 0) bad("window must be positive");
  if (z_channels == 0) bad("z_channels must be positive");
  for (std::size_t c : enc_channels) {
    if (c == 0) bad("enc_channels entries must be positive");
  }
  std::size_t len = window;
  for (std::size_t i = 0; i < enc_channels.size(); ++i) {
    if (len % stride != 0) {
      bad("window " + std::to_string(window) + " is not divisible by stride^" +
          std::to_string(enc_channels.size()));
    }
    len /= stride;
  }
}

std::size_t GeneratorConfig::bottleneck_length() const {
  std::size_t len = window;
  for (std::size_t i = 0; i < enc_channels.size(); ++i) len /= stride;
  return len;
}

std::size_t GeneratorConfig::decoder_channels(std::size_t j) const {
  const std::size_t n = layers();
  return j + 1 < n ? enc_channels[n - 2 - j] : 1;
}

std::size_t GeneratorConfig::decoder_input_channels(std::size_t j) const {
  const std::size_t n = layers();
  return j == 0 ? enc_channels[n - 1] + z_channels : 2 * enc_channels[n - 1 - j];
}

std::vector<LedgerEntry> encoder_ledger(const GeneratorConfig& cfg) {
  cfg.validate();
  std::vector<LedgerEntry> out{{"input", 0, cfg.window, 1}};
  std::size_t len = cfg.window;
  for (std::size_t i = 0; i < cfg.layers(); ++i) {
    len /= cfg.stride;
    out.push_back({"encoder", i + 1, len, cfg.enc_channels[i]});
  }
  return out;
}

std::vector<LedgerEntry> shape_ledger(const GeneratorConfig& cfg) {
  std::vector<LedgerEntry> out = encoder_ledger(cfg);
  std::size_t len = cfg.bottleneck_length();
  out.push_back({"bottleneck+z", cfg.layers(), len, cfg.decoder_input_channels(0)});
  for (std::size_t j = 0; j < cfg.layers(); ++j) {
    len *= cfg.stride;
    out.push_back({"decoder", j + 1, len, cfg.decoder_channels(j)});
  }
  return out;
}

// ---------------------------------------------------------------- Generator

Generator::Generator(GeneratorConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const std::size_t n = cfg_.layers();
  const std::size_t k = cfg_.filter_width;
  std::uint64_t s = seed * 7919 + 11;
  std::size_t in = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t out = cfg_.enc_channels[i];
    params_.add(layer_name("g.enc", i, "w"), init_normal({k, in, out}, s++));
    params_.add(layer_name("g.enc", i, "b"), Tensor<float>({out}));
    params_.add(layer_name("g.enc", i, "alpha"), Tensor<float>({out}, kPreluInit));
    in = out;
  }
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t out = cfg_.decoder_channels(j);
    params_.add(layer_name("g.dec", j, "w"),
                init_normal({k, out, cfg_.decoder_input_channels(j)}, s++));
    params_.add(layer_name("g.dec", j, "b"), Tensor<float>({out}));
    if (j + 1 < n) params_.add(layer_name("g.dec", j, "alpha"), Tensor<float>({out}, kPreluInit));
  }
}

Var Generator::forward(Graph<float>& g, Var noisy, Var z, const GeneratorAblation& ablation) {
  const std::size_t n = cfg_.layers();
  const Tensor<float>& x = g.value(noisy);
  if (x.rank() != 3 || x.dim(1) != cfg_.window || x.dim(2) != 1) {
    fail(ErrorCode::kShapeMismatch, "generator input must be (B, " + std::to_string(cfg_.window) +
                                        ", 1), got " + shape_string(x.shape()));
  }
  require_shape(g.value(z), {x.dim(0), cfg_.bottleneck_length(), cfg_.z_channels}, "latent z");
  auto p = [&](const std::string& name) { return g.parameter(params_.at(name)); };
  auto zeros_like = [&g](Var v) { return g.input(Tensor<float>(g.value(v).shape())); };

  Var h = noisy;
  std::vector<Var> skips;
  for (std::size_t i = 0; i < n; ++i) {
    h = engine::conv1d(g, h, p(layer_name("g.enc", i, "w")), p(layer_name("g.enc", i, "b")),
                       cfg_.stride);
    h = engine::prelu(g, h, p(layer_name("g.enc", i, "alpha")));
    skips.push_back(h);
  }
  if (ablation.sever_bottleneck) h = zeros_like(h);
  h = engine::concat_channels(g, h, z);
  for (std::size_t j = 0; j < n; ++j) {
    if (j > 0) {
      const Var skip = skips[n - 1 - j];
      h = engine::concat_channels(g, h, ablation.zero_skips ? zeros_like(skip) : skip);
    }
    h = engine::conv1d_transpose(g, h, p(layer_name("g.dec", j, "w")),
                                 p(layer_name("g.dec", j, "b")), cfg_.stride);
    h = j + 1 < n ? engine::prelu(g, h, p(layer_name("g.dec", j, "alpha")))
                  : engine::tanh_act(g, h);
  }
  return h;
}

Tensor<float> Generator::enhance(const Tensor<float>& noisy, const Tensor<float>& z) {
  Graph<float> g;
  const Var out = forward(g, g.input(noisy), g.input(z));
  return g.value(out);
}

Tensor<float> Generator::sample_z(std::size_t batch, std::uint64_t seed) const {
  return engine::sample_z<float>(batch, cfg_.bottleneck_length(), cfg_.z_channels, seed);
}

Tensor<float> Generator::zero_z(std::size_t batch) const {
  return Tensor<float>({batch, cfg_.bottleneck_length(), cfg_.z_channels});
}

// ------------------------------------------------------------ Discriminator

Discriminator::Discriminator(GeneratorConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const std::size_t k = cfg_.filter_width;
  std::uint64_t s = seed * 7919 + 5003;
  std::size_t in = 2;
  for (std::size_t i = 0; i < cfg_.layers(); ++i) {
    const std::size_t out = cfg_.enc_channels[i];
    params_.add(layer_name("d.conv", i, "w"), init_normal({k, in, out}, s++));
    params_.add(layer_name("d.vbn", i, "gamma"), Tensor<float>({out}, 1.0f));
    params_.add(layer_name("d.vbn", i, "beta"), Tensor<float>({out}));
    in = out;
  }
  params_.add("d.head.w", init_normal({1, in, 1}, s++));
  params_.add("d.head.b", Tensor<float>({1}));
  params_.add("d.fc.w", init_normal({cfg_.bottleneck_length(), 1}, s++));
  params_.add("d.fc.b", Tensor<float>({1}));
}

bool Discriminator::has_reference() const noexcept {
  return refs_.size() == cfg_.layers() && refs_.front().ready();
}

void Discriminator::set_reference(const Tensor<float>& candidate, const Tensor<float>& noisy) {
  const Shape expected{candidate.rank() == 3 ? candidate.dim(0) : 0, cfg_.window, 1};
  require_shape(candidate, expected, "reference candidate");
  require_shape(noisy, expected, "reference noisy");
  std::vector<engine::VbnReference<float>> refs;
  Graph<float> g;
  Var h = engine::concat_channels(g, g.input(candidate), g.input(noisy));
  for (std::size_t i = 0; i < cfg_.layers(); ++i) {
    h = engine::conv1d(g, h, g.input(params_.at(layer_name("d.conv", i, "w")).value), Var{},
                       cfg_.stride);
    refs.push_back(engine::reference_stats(g.value(h)));
    const Tensor<float> y = normalize(g.value(h), refs.back(),
                                      params_.at(layer_name("d.vbn", i, "gamma")).value,
                                      params_.at(layer_name("d.vbn", i, "beta")).value);
    h = engine::leaky_relu(g, g.input(y), kLeakyAlpha);
  }
  refs_ = std::move(refs);
}

Var Discriminator::forward(Graph<float>& g, Var candidate, Var noisy) {
  if (!has_reference()) {
    fail(ErrorCode::kMissingRefBatch, "discriminator used before its reference batch was set");
  }
  const Tensor<float>& c = g.value(candidate);
  require_shape(c, {c.rank() == 3 ? c.dim(0) : 0, cfg_.window, 1}, "discriminator candidate");
  require_shape(g.value(noisy), c.shape(), "discriminator noisy input");
  auto p = [&](const std::string& name) { return g.parameter(params_.at(name)); };

  Var h = engine::concat_channels(g, candidate, noisy);
  for (std::size_t i = 0; i < cfg_.layers(); ++i) {
    h = engine::conv1d(g, h, p(layer_name("d.conv", i, "w")), Var{}, cfg_.stride);
    h = engine::virtual_batch_norm(g, h, refs_[i], p(layer_name("d.vbn", i, "gamma")),
                                   p(layer_name("d.vbn", i, "beta")));
    h = engine::leaky_relu(g, h, kLeakyAlpha);
  }
  h = engine::conv1d(g, h, p("d.head.w"), p("d.head.b"), 1);
  return engine::linear(g, h, p("d.fc.w"), p("d.fc.b"));
}

Tensor<float> Discriminator::score(const Tensor<float>& candidate, const Tensor<float>& noisy) {
  Graph<float> g;
  const Var out = forward(g, g.input(candidate), g.input(noisy));
  return g.value(out);
}

// --------------------------------------------------------------- Checkpoint

namespace {

constexpr const char* kMetaName = "meta.config";

Tensor<float> encode_config(const GeneratorConfig& cfg) {
  std::vector<float> v{static_cast<float>(cfg.window), static_cast<float>(cfg.filter_width),
                       static_cast<float>(cfg.stride), static_cast<float>(cfg.z_channels)};
  for (std::size_t c : cfg.enc_channels) v.push_back(static_cast<float>(c));
  const std::size_t n = v.size();
  return Tensor<float>({n}, std::move(v));
}

GeneratorConfig decode_config(const Tensor<float>& t) {
  if (t.rank() != 1 || t.size() < 5) fail(ErrorCode::kCorruptCheckpoint, "malformed meta.config");
  auto as_size = [](float f) {
    if (!(f >= 0.0f) || f != std::floor(f)) fail(ErrorCode::kCorruptCheckpoint, "malformed meta.config");
    return static_cast<std::size_t>(f);
  };
  GeneratorConfig cfg;
  cfg.window = as_size(t[0]);
  cfg.filter_width = as_size(t[1]);
  cfg.stride = as_size(t[2]);
  cfg.z_channels = as_size(t[3]);
  cfg.enc_channels.clear();
  for (std::size_t i = 4; i < t.size(); ++i) cfg.enc_channels.push_back(as_size(t[i]));
  try {
    cfg.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kCorruptCheckpoint, std::string("meta.config: ") + e.what());
  }
  return cfg;
}

void load_tensors_into(SeganModel& model, std::vector<engine::NamedTensor> tensors,
                       const std::string& origin) {
  std::map<std::string, Tensor<float>> by_name;
  for (auto& nt : tensors) {
    if (!by_name.emplace(nt.name, std::move(nt.tensor)).second) {
      fail(ErrorCode::kCorruptCheckpoint, origin + ": duplicate tensor '" + nt.name + "'");
    }
  }
  auto take = [&](const std::string& name, const Shape& shape) {
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      fail(ErrorCode::kCorruptCheckpoint, origin + ": missing tensor '" + name + "'");
    }
    if (it->second.shape() != shape) {
      fail(ErrorCode::kCorruptCheckpoint, origin + ": tensor '" + name + "' has shape " +
                                              shape_string(it->second.shape()) + ", expected " +
                                              shape_string(shape));
    }
    Tensor<float> t = std::move(it->second);
    by_name.erase(it);
    return t;
  };

  // Validate everything before touching the model.
  std::vector<Tensor<float>> g_values, d_values;
  for (const auto& p : model.generator.params()) g_values.push_back(take(p.name, p.value.shape()));
  for (const auto& p : model.discriminator.params()) d_values.push_back(take(p.name, p.value.shape()));

  const GeneratorConfig& cfg = model.config();
  std::vector<engine::VbnReference<float>> refs;
  if (by_name.contains(layer_name("d.vbn", 0, "ref_mean"))) {
    for (std::size_t i = 0; i < cfg.layers(); ++i) {
      const Shape ch{cfg.enc_channels[i]};
      engine::VbnReference<float> r;
      r.mean = take(layer_name("d.vbn", i, "ref_mean"), ch);
      r.var = take(layer_name("d.vbn", i, "ref_var"), ch);
      r.count = take(layer_name("d.vbn", i, "ref_count"), {1})[0];
      refs.push_back(std::move(r));
    }
  }
  const Tensor<float> meta = take(kMetaName, {4 + cfg.layers()});
  if (decode_config(meta) != cfg) {
    fail(ErrorCode::kCorruptCheckpoint, origin + ": tensor 'meta.config' describes another model");
  }
  if (!by_name.empty()) {
    fail(ErrorCode::kCorruptCheckpoint, origin + ": unexpected tensor '" + by_name.begin()->first + "'");
  }

  std::size_t i = 0;
  for (auto& p : model.generator.params()) p.value = std::move(g_values[i++]);
  i = 0;
  for (auto& p : model.discriminator.params()) p.value = std::move(d_values[i++]);
  model.discriminator.references() = std::move(refs);
}

}  // namespace

void save_checkpoint(const SeganModel& model, const std::filesystem::path& path) {
  std::vector<engine::NamedTensor> out;
  out.push_back({kMetaName, encode_config(model.config())});
  for (const auto& p : model.generator.params()) out.push_back({p.name, p.value});
  for (const auto& p : model.discriminator.params()) out.push_back({p.name, p.value});
  const auto& refs = model.discriminator.references();
  for (std::size_t i = 0; i < refs.size(); ++i) {
    out.push_back({layer_name("d.vbn", i, "ref_mean"), refs[i].mean});
    out.push_back({layer_name("d.vbn", i, "ref_var"), refs[i].var});
    out.push_back({layer_name("d.vbn", i, "ref_count"),
                   Tensor<float>({1}, static_cast<float>(refs[i].count))});
  }
  engine::write_tensor_file(path, out);
}

SeganModel load_checkpoint(const std::filesystem::path& path) {
  auto tensors = engine::read_tensor_file(path);
  const engine::NamedTensor* meta = nullptr;
  for (const auto& nt : tensors) {
    if (nt.name == kMetaName) meta = &nt;
  }
  if (meta == nullptr) fail(ErrorCode::kCorruptCheckpoint, path.string() + ": missing tensor 'meta.config'");
  SeganModel model(decode_config(meta->tensor), 0);
  load_tensors_into(model, std::move(tensors), path.string());
  return model;
}

void load_checkpoint_into(SeganModel& model, const std::filesystem::path& path) {
  load_tensors_into(model, engine::read_tensor_file(path), path.string());
}

}  // namespace segan::model
