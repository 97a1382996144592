// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "engine/graph.hpp"
#include "engine/ops.hpp"

namespace segan::model {

using engine::Graph;
using engine::ParameterStore;
using engine::Tensor;
using engine::Var;

struct GeneratorConfig {
  std::size_t window = 16384;
  std::size_t filter_width = 31;
  std::size_t stride = 2;
  std::vector<std::size_t> enc_channels{16, 32, 32, 64, 64, 128, 128, 256, 256, 512, 1024};
  std::size_t z_channels = 1024;

  // Throws ConfigError.
  void validate() const;
  std::size_t layers() const noexcept { return enc_channels.size(); }
  std::size_t bottleneck_length() const;
  // Output channels of decoder layer j; the last layer emits the waveform.
  std::size_t decoder_channels(std::size_t j) const;
  std::size_t decoder_input_channels(std::size_t j) const;

  bool operator==(const GeneratorConfig&) const = default;
};

inline constexpr float kInitStddev = 0.02f;
inline constexpr float kPreluInit = 0.25f;
inline constexpr float kLeakyAlpha = 0.3f;

struct LedgerEntry {
  std::string stage;  // "input", "encoder", "bottleneck+z", "decoder"
  std::size_t layer = 0;
  std::size_t length = 0;
  std::size_t channels = 0;
};

// Activation sizes through G: the input and the output of every encoder
// layer, the bottleneck after z concatenation, then every decoder output.
std::vector<LedgerEntry> shape_ledger(const GeneratorConfig& cfg);

// The input plus the encoder outputs ("16384x1" ... "8x1024" by default).
std::vector<LedgerEntry> encoder_ledger(const GeneratorConfig& cfg);

// Test-only ablations of the generator's information paths.
struct GeneratorAblation {
  bool sever_bottleneck = false;  // replace the thought vector by zeros
  bool zero_skips = false;        // replace every skip tensor by zeros
};

// Fully convolutional encoder-decoder. Encoder layer i: strided conv + PReLU.
// The deepest encoder output is concatenated with z; decoder layer j is a
// transposed conv whose input (for j > 0) is the previous decoder output
// concatenated with the encoder output of matching length. Every decoder
// layer except the last is followed by PReLU; the last ends in tanh.
class Generator {
 public:
  Generator(GeneratorConfig cfg, std::uint64_t seed);

  const GeneratorConfig& config() const noexcept { return cfg_; }
  ParameterStore<float>& params() noexcept { return params_; }
  const ParameterStore<float>& params() const noexcept { return params_; }
  std::size_t conv_layer_count() const noexcept { return 2 * cfg_.layers(); }

  // noisy: (B, window, 1); z: (B, bottleneck_length, z_channels).
  Var forward(Graph<float>& g, Var noisy, Var z, const GeneratorAblation& ablation = {});

  // Forward pass without gradient bookkeeping.
  Tensor<float> enhance(const Tensor<float>& noisy, const Tensor<float>& z);

  Tensor<float> sample_z(std::size_t batch, std::uint64_t seed) const;
  Tensor<float> zero_z(std::size_t batch) const;

 private:
  GeneratorConfig cfg_;
  ParameterStore<float> params_;
};

// Conditioned critic. Input channels are (candidate, noisy). Every conv layer
// is followed by virtual batch norm and LeakyReLU(0.3); a width-1 conv maps to
// one channel and a single linear neuron over the remaining length gives the
// unbounded least-squares score.
class Discriminator {
 public:
  Discriminator(GeneratorConfig cfg, std::uint64_t seed);

  const GeneratorConfig& config() const noexcept { return cfg_; }
  ParameterStore<float>& params() noexcept { return params_; }
  const ParameterStore<float>& params() const noexcept { return params_; }
  std::size_t linear_inputs() const { return cfg_.bottleneck_length(); }

  // Freezes the VBN reference statistics from a batch of (candidate, noisy)
  // pairs, each (B, window, 1). The reference batch itself is normalized by
  // its own statistics as it propagates.
  void set_reference(const Tensor<float>& candidate, const Tensor<float>& noisy);
  bool has_reference() const noexcept;
  std::vector<engine::VbnReference<float>>& references() noexcept { return refs_; }
  const std::vector<engine::VbnReference<float>>& references() const noexcept { return refs_; }

  // Returns scores (B, 1). Throws MissingRefBatch before set_reference().
  Var forward(Graph<float>& g, Var candidate, Var noisy);

  Tensor<float> score(const Tensor<float>& candidate, const Tensor<float>& noisy);

 private:
  GeneratorConfig cfg_;
  ParameterStore<float> params_;
  std::vector<engine::VbnReference<float>> refs_;
};

struct SeganModel {
  SeganModel(const GeneratorConfig& cfg, std::uint64_t seed)
      : generator(cfg, seed), discriminator(cfg, seed + 1) {}

  const GeneratorConfig& config() const noexcept { return generator.config(); }

  Generator generator;
  Discriminator discriminator;
};

// All G and D parameters, the VBN reference statistics and the config.
void save_checkpoint(const SeganModel& model, const std::filesystem::path& path);

// Rebuilds the model from the config stored in the file.
SeganModel load_checkpoint(const std::filesystem::path& path);

// Loads into an existing model; CorruptCheckpoint names the first tensor
// whose shape differs or which is missing.
void load_checkpoint_into(SeganModel& model, const std::filesystem::path& path);

}  // namespace segan::model
