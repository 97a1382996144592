// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>

#include "common/error.hpp"

namespace segan::train {

using dataset::TrainingPair;
using engine::Graph;
using engine::Tensor;
using engine::Var;
using Batch = std::span<const TrainingPair* const>;

namespace {

Tensor<float> slice_batch(const Tensor<float>& t, std::size_t start, std::size_t count) {
  const std::size_t row = t.size() / t.dim(0);
  std::vector<float> data(t.data().begin() + static_cast<long>(start * row),
                          t.data().begin() + static_cast<long>((start + count) * row));
  engine::Shape shape = t.shape();
  shape[0] = count;
  return Tensor<float>(std::move(shape), std::move(data));
}

void require_finite(double v, const char* what, std::size_t step) {
  if (!std::isfinite(v)) {
    fail(ErrorCode::kNonFiniteLoss, std::string(what) + " is " + std::to_string(v) +
                                        " at step " + std::to_string(step));
  }
}

// Restores D's trainable flag even when a phase throws.
class FreezeGuard {
 public:
  explicit FreezeGuard(engine::ParameterStore<float>& params) : params_(params) {
    params_.set_trainable(false);
  }
  ~FreezeGuard() { params_.set_trainable(true); }
  FreezeGuard(const FreezeGuard&) = delete;
  FreezeGuard& operator=(const FreezeGuard&) = delete;

 private:
  engine::ParameterStore<float>& params_;
};

std::uint64_t chunk_seed(std::uint64_t seed, std::size_t k) { return seed * 1000003 + k; }

}  // namespace

void TrainConfig::validate() const {
  auto bad = [](const std::string& msg) { fail(ErrorCode::kConfig, msg); };
  if (epochs == 0) bad("epochs must be positive");
  if (!(lr > 0.0) || !std::isfinite(lr)) bad("lr must be positive");
  if (batch_size == 0) bad("batch_size must be positive");
  if (micro_batch == 0) bad("micro_batch must be positive");
  if (!(lambda_l1 >= 0.0) || !std::isfinite(lambda_l1)) bad("lambda_l1 must be >= 0");
}

Tensor<float> stack(Batch batch, bool clean) {
  if (batch.empty()) fail(ErrorCode::kInvalidArgument, "empty batch");
  const std::size_t w = batch.front()->noisy.size();
  Tensor<float> out({batch.size(), w, 1});
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& src = clean ? batch[b]->clean : batch[b]->noisy;
    if (src.size() != w || batch[b]->noisy.size() != batch[b]->clean.size()) {
      fail(ErrorCode::kShapeMismatch, "training pairs in a batch must share one length");
    }
    std::copy(src.begin(), src.end(), out.data().begin() + static_cast<long>(b * w));
  }
  return out;
}

Trainer::Trainer(model::SeganModel& model, TrainConfig cfg)
    : model_(model),
      cfg_(cfg),
      g_opt_(engine::RmsPropOptions{.learning_rate = cfg.lr}),
      d_opt_(engine::RmsPropOptions{.learning_rate = cfg.lr}) {
  cfg_.validate();
}

double Trainer::discriminator_real_phase(Batch batch) {
  if (observer_) observer_(Phase::kDiscriminatorReal, false, model_);
  auto& d = model_.discriminator;
  d.params().zero_grad();
  const Tensor<float> clean = stack(batch, true), noisy = stack(batch, false);
  double total = 0.0;
  for (std::size_t s = 0; s < batch.size(); s += cfg_.micro_batch) {
    const std::size_t n = std::min(cfg_.micro_batch, batch.size() - s);
    const float w = static_cast<float>(n) / static_cast<float>(batch.size());
    Graph<float> g;
    const Var loss = engine::lsq_loss(
        g, d.forward(g, g.input(slice_batch(clean, s, n)), g.input(slice_batch(noisy, s, n))), 1.0f);
    total += w * g.value(loss)[0];
    g.backward(engine::scale(g, loss, w));
  }
  require_finite(total, "d_real", step_);
  d_opt_.step(d.params());
  if (observer_) observer_(Phase::kDiscriminatorReal, true, model_);
  return total;
}

double Trainer::discriminator_fake_phase(Batch batch, std::uint64_t z_seed) {
  if (observer_) observer_(Phase::kDiscriminatorFake, false, model_);
  auto& d = model_.discriminator;
  auto& gen = model_.generator;
  d.params().zero_grad();
  const Tensor<float> noisy = stack(batch, false);
  const Tensor<float> z = gen.sample_z(batch.size(), z_seed);
  double total = 0.0;
  for (std::size_t s = 0; s < batch.size(); s += cfg_.micro_batch) {
    const std::size_t n = std::min(cfg_.micro_batch, batch.size() - s);
    const float w = static_cast<float>(n) / static_cast<float>(batch.size());
    const Tensor<float> x = slice_batch(noisy, s, n);
    // G's output enters as a constant: only D learns in this phase.
    const Tensor<float> fake = gen.enhance(x, slice_batch(z, s, n));
    Graph<float> g;
    const Var loss = engine::lsq_loss(g, d.forward(g, g.input(fake), g.input(x)), 0.0f);
    total += w * g.value(loss)[0];
    g.backward(engine::scale(g, loss, w));
  }
  require_finite(total, "d_fake", step_);
  d_opt_.step(d.params());
  if (observer_) observer_(Phase::kDiscriminatorFake, true, model_);
  return total;
}

std::pair<double, double> Trainer::generator_phase(Batch batch, std::uint64_t z_seed) {
  if (observer_) observer_(Phase::kGenerator, false, model_);
  auto& d = model_.discriminator;
  auto& gen = model_.generator;
  double adv_total = 0.0, l1_total = 0.0;
  {
    FreezeGuard frozen(d.params());
    gen.params().zero_grad();
    const Tensor<float> clean = stack(batch, true), noisy = stack(batch, false);
    const Tensor<float> z = gen.sample_z(batch.size(), z_seed);
    const float lambda = static_cast<float>(cfg_.lambda_l1);
    for (std::size_t s = 0; s < batch.size(); s += cfg_.micro_batch) {
      const std::size_t n = std::min(cfg_.micro_batch, batch.size() - s);
      const float w = static_cast<float>(n) / static_cast<float>(batch.size());
      Graph<float> g;
      const Var x = g.input(slice_batch(noisy, s, n));
      const Var fake = gen.forward(g, x, g.input(slice_batch(z, s, n)));
      const Var l1 = engine::l1_loss(g, fake, g.input(slice_batch(clean, s, n)));
      Var loss = engine::scale(g, l1, lambda);
      l1_total += w * g.value(l1)[0];
      if (cfg_.adversarial) {
        const Var adv = engine::lsq_loss(g, d.forward(g, fake, x), 1.0f);
        adv_total += w * g.value(adv)[0];
        loss = engine::add(g, adv, loss);
      }
      g.backward(engine::scale(g, loss, w));
    }
    require_finite(adv_total, "g_adv", step_);
    require_finite(l1_total, "g_l1", step_);
    g_opt_.step(gen.params());
  }
  if (observer_) observer_(Phase::kGenerator, true, model_);
  return {adv_total, l1_total};
}

StepReport Trainer::train_step(Batch batch, std::uint64_t z_seed) {
  StepReport r;
  r.step = step_;
  if (cfg_.adversarial) {
    auto& d = model_.discriminator;
    if (!d.has_reference()) d.set_reference(stack(batch, true), stack(batch, false));
    r.d_real = discriminator_real_phase(batch);
    r.d_fake = discriminator_fake_phase(batch, z_seed);
  }
  std::tie(r.g_adv, r.g_l1) = generator_phase(batch, z_seed);
  ++step_;
  return r;
}

void write_loss_log(const std::filesystem::path& path, const std::vector<StepReport>& reports) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << "step,d_real,d_fake,g_adv,g_l1\n";
  char line[160];
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%zu,%.9g,%.9g,%.9g,%.9g\n", r.step, r.d_real, r.d_fake,
                  r.g_adv, r.g_l1);
    out << line;
  }
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

TrainResult train(model::SeganModel& model, const TrainConfig& cfg,
                  const std::vector<TrainingPair>& pairs, const std::filesystem::path& out_dir,
                  std::ostream* log) {
  cfg.validate();
  if (pairs.empty()) fail(ErrorCode::kInvalidArgument, "training set is empty");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create " + out_dir.string() + ": " + ec.message());

  TrainResult result;
  result.loss_log = out_dir / "loss.csv";
  result.final_checkpoint = out_dir / "final.sgn";
  Trainer trainer(model, cfg);
  std::vector<std::size_t> order(pairs.size());
  std::vector<const TrainingPair*> batch;
  bool done = false;
  try {
    for (std::size_t epoch = 0; epoch < cfg.epochs && !done; ++epoch) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      if (cfg.shuffle) {
        std::mt19937_64 rng(cfg.seed * 7727 + epoch);
        std::shuffle(order.begin(), order.end(), rng);
      }
      for (std::size_t s = 0; s < order.size() && !done; s += cfg.batch_size) {
        batch.clear();
        for (std::size_t i = s; i < std::min(order.size(), s + cfg.batch_size); ++i)
          batch.push_back(&pairs[order[i]]);
        const std::size_t step = trainer.steps_taken();
        result.reports.push_back(trainer.train_step(batch, chunk_seed(cfg.seed, step)));
        const StepReport& r = result.reports.back();
        if (log != nullptr && (step % 10 == 0)) {
          char line[200];
          std::snprintf(line, sizeof line,
                        "step %zu epoch %zu d_real %.5f d_fake %.5f g_adv %.5f g_l1 %.5f\n", step,
                        epoch, r.d_real, r.d_fake, r.g_adv, r.g_l1);
          *log << line << std::flush;
        }
        if (cfg.checkpoint_every > 0 && (step + 1) % cfg.checkpoint_every == 0) {
          model::save_checkpoint(model, out_dir / ("step_" + std::to_string(step + 1) + ".sgn"));
        }
        done = cfg.max_steps > 0 && trainer.steps_taken() >= cfg.max_steps;
      }
    }
  } catch (const Error&) {
    write_loss_log(result.loss_log, result.reports);
    throw;
  }
  write_loss_log(result.loss_log, result.reports);
  model::save_checkpoint(model, result.final_checkpoint);
  return result;
}

audio::Waveform enhance_waveform(model::Generator& gen, const audio::Waveform& noisy, ZMode z) {
  audio::Waveform w = noisy.sample_rate == audio::kSourceRate ? audio::resample_48k_to_16k(noisy) : noisy;
  if (w.sample_rate != audio::kModelRate) {
    fail(ErrorCode::kUnsupportedFormat,
         "enhancement needs 16000 or 48000 Hz input, got " + std::to_string(w.sample_rate));
  }
  const std::size_t window = gen.config().window;
  const auto chunks = audio::chunk(audio::preemphasis(w).samples, window, window);
  std::vector<std::vector<double>> out(chunks.frames.size());
  for (std::size_t k = 0; k < chunks.frames.size(); ++k) {
    const auto& f = chunks.frames[k];
    const Tensor<float> x({1, window, 1}, std::vector<float>(f.begin(), f.end()));
    const Tensor<float> zt =
        z.kind == ZMode::Kind::kZero ? gen.zero_z(1) : gen.sample_z(1, chunk_seed(z.seed, k));
    const Tensor<float> y = gen.enhance(x, zt);
    out[k].assign(y.data().begin(), y.data().end());
  }
  audio::Waveform joined{audio::reassemble(out, window, chunks.pad_len), audio::kModelRate};
  return audio::deemphasis(joined);
}

void enhance_file(const std::filesystem::path& checkpoint, const std::filesystem::path& in_wav,
                  const std::filesystem::path& out_wav, ZMode z) {
  model::SeganModel m = model::load_checkpoint(checkpoint);
  audio::write_wav(enhance_waveform(m.generator, audio::read_wav(in_wav), z), out_wav);
}

}  // namespace segan::train
