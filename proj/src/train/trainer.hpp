// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "audio/audio_io.hpp"
#include "dataset/dataset.hpp"
#include "engine/optimizer.hpp"
#include "model/segan_model.hpp"

namespace segan::train {

struct TrainConfig {
  std::size_t epochs = 86;
  double lr = 2e-4;
  // Pairs per optimizer update. Gradients of micro-batches of at most
  // micro_batch pairs are summed before each RMSprop step.
  std::size_t batch_size = 16;
  std::size_t micro_batch = 16;
  double lambda_l1 = 100.0;
  std::uint64_t seed = 1;
  std::size_t checkpoint_every = 0;  // steps; 0 writes only the final checkpoint
  std::size_t max_steps = 0;         // 0 = no cap
  bool adversarial = true;           // false: L1 regression only
  bool shuffle = true;

  // Throws ConfigError.
  void validate() const;
};

struct StepReport {
  std::size_t step = 0;
  double d_real = 0.0;
  double d_fake = 0.0;
  double g_adv = 0.0;
  double g_l1 = 0.0;
};

enum class Phase { kDiscriminatorReal, kDiscriminatorFake, kGenerator };

// Called before (after == false) and after each phase of a step.
using PhaseObserver = std::function<void(Phase phase, bool after, const model::SeganModel&)>;

// The three-phase least-squares adversarial update: D on real pairs toward 1,
// D on (G(z, noisy), noisy) toward 0, then with D frozen G toward
// 0.5 * mean((D(G(z, noisy), noisy) - 1)^2) + lambda * mean|G(z, noisy) - clean|.
// Each phase ends in one RMSprop step of the updated network.
class Trainer {
 public:
  Trainer(model::SeganModel& model, TrainConfig cfg);

  // Sets the VBN reference from the first batch it sees. Throws
  // NonFiniteLoss when any loss component is NaN or infinite.
  StepReport train_step(std::span<const dataset::TrainingPair* const> batch, std::uint64_t z_seed);

  // Individual phases; each accumulates gradients and applies one step.
  double discriminator_real_phase(std::span<const dataset::TrainingPair* const> batch);
  double discriminator_fake_phase(std::span<const dataset::TrainingPair* const> batch,
                                  std::uint64_t z_seed);
  // Returns (adversarial, l1) loss components.
  std::pair<double, double> generator_phase(std::span<const dataset::TrainingPair* const> batch,
                                            std::uint64_t z_seed);

  void set_observer(PhaseObserver observer) { observer_ = std::move(observer); }
  const TrainConfig& config() const noexcept { return cfg_; }
  std::size_t steps_taken() const noexcept { return step_; }

 private:
  model::SeganModel& model_;
  TrainConfig cfg_;
  engine::RmsProp<float> g_opt_;
  engine::RmsProp<float> d_opt_;
  PhaseObserver observer_;
  std::size_t step_ = 0;
};

// Stacks the noisy or clean halves of a batch into (B, window, 1).
engine::Tensor<float> stack(std::span<const dataset::TrainingPair* const> batch, bool clean);

struct TrainResult {
  std::vector<StepReport> reports;
  std::filesystem::path final_checkpoint;
  std::filesystem::path loss_log;
};

// Epochs x batches of train_step. Writes out_dir/loss.csv (step, d_real,
// d_fake, g_adv, g_l1), out_dir/step_<n>.sgn every checkpoint_every steps and
// out_dir/final.sgn. Progress lines go to `log` when given.
TrainResult train(model::SeganModel& model, const TrainConfig& cfg,
                  const std::vector<dataset::TrainingPair>& pairs,
                  const std::filesystem::path& out_dir, std::ostream* log = nullptr);

void write_loss_log(const std::filesystem::path& path, const std::vector<StepReport>& reports);

struct ZMode {
  enum class Kind { kSeeded, kZero };
  Kind kind = Kind::kSeeded;
  std::uint64_t seed = 0;
};

// preemphasis -> non-overlapping windows -> G -> reassemble -> deemphasis.
// 48 kHz input is resampled first; the output has the input's duration at
// 16 kHz.
audio::Waveform enhance_waveform(model::Generator& gen, const audio::Waveform& noisy, ZMode z);

void enhance_file(const std::filesystem::path& checkpoint, const std::filesystem::path& in_wav,
                  const std::filesystem::path& out_wav, ZMode z);

}  // namespace segan::train
