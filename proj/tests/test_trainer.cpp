// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "audio/audio_io.hpp"
#include "common/error.hpp"
#include "doctest.h"
#include "engine/ops.hpp"
#include "model/segan_model.hpp"
#include "test_util.hpp"
#include "train/trainer.hpp"

using namespace segan;
using namespace segan::train;
using dataset::TrainingPair;
using engine::Graph;
using engine::Tensor;
using model::GeneratorConfig;
using model::SeganModel;

namespace {

GeneratorConfig tiny() {
  GeneratorConfig cfg;
  cfg.window = 64;
  cfg.filter_width = 5;
  cfg.enc_channels = {4, 6, 8};
  cfg.z_channels = 8;
  return cfg;
}

std::vector<TrainingPair> make_pairs(std::size_t n, std::size_t window, std::uint64_t seed) {
  std::vector<TrainingPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto clean = testing::sine(window, 300.0 + 40.0 * static_cast<double>(i), 16000.0, 0.4);
    const auto noise = testing::gaussian(window, seed + i, 0.1);
    TrainingPair p;
    for (std::size_t k = 0; k < window; ++k) {
      p.clean.push_back(static_cast<float>(clean[k]));
      p.noisy.push_back(static_cast<float>(clean[k] + noise[k]));
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<const TrainingPair*> pointers(const std::vector<TrainingPair>& pairs) {
  std::vector<const TrainingPair*> out;
  for (const auto& p : pairs) out.push_back(&p);
  return out;
}

std::vector<std::vector<float>> snapshot(const engine::ParameterStore<float>& params) {
  std::vector<std::vector<float>> out;
  for (const auto& p : params) out.emplace_back(p.value.data().begin(), p.value.data().end());
  return out;
}

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("train config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.epochs == 86);
  CHECK(cfg.lr == doctest::Approx(2e-4));
  CHECK(cfg.lambda_l1 == 100.0);
  for (auto mutate : std::vector<void (*)(TrainConfig&)>{
           [](TrainConfig& c) { c.epochs = 0; }, [](TrainConfig& c) { c.lr = 0.0; },
           [](TrainConfig& c) { c.batch_size = 0; }, [](TrainConfig& c) { c.micro_batch = 0; },
           [](TrainConfig& c) { c.lambda_l1 = -1.0; }}) {
    TrainConfig bad;
    mutate(bad);
    CHECK(code_of([&] { bad.validate(); }) == ErrorCode::kConfig);
  }
}

TEST_CASE("adversarial term at its optimum and lambda 0 leave G untouched") {
  SeganModel m(tiny(), 3);
  const auto pairs = make_pairs(4, 64, 10);
  const auto batch = pointers(pairs);
  m.discriminator.set_reference(stack(batch, true), stack(batch, false));
  m.discriminator.params().at("d.fc.w").value.fill(0.0f);
  m.discriminator.params().at("d.fc.b").value.fill(1.0f);

  TrainConfig cfg;
  cfg.lambda_l1 = 0.0;
  Trainer t(m, cfg);
  const auto before = snapshot(m.generator.params());
  const auto [adv, l1] = t.generator_phase(batch, 5);
  CHECK(adv == 0.0);
  CHECK(l1 > 0.0);
  for (const auto& p : m.generator.params())
    for (float g : p.grad.data()) CHECK(g == 0.0f);
  CHECK(snapshot(m.generator.params()) == before);
}

TEST_CASE("L1-only step equals a direct L1 regression step") {
  const auto pairs = make_pairs(4, 64, 20);
  const auto batch = pointers(pairs);
  const std::uint64_t z_seed = 99;

  SeganModel trained(tiny(), 7);
  TrainConfig cfg;
  cfg.adversarial = false;
  cfg.lr = 1e-3;
  Trainer t(trained, cfg);
  const StepReport r = t.train_step(batch, z_seed);
  CHECK(r.d_real == 0.0);
  CHECK(r.d_fake == 0.0);
  CHECK(r.g_adv == 0.0);

  // Reference: forward, 100 * mean|G - clean|, backward, hand-rolled RMSprop
  // from a zero cache.
  model::Generator ref(tiny(), 7);
  Graph<float> g;
  const auto y = ref.forward(g, g.input(stack(batch, false)), g.input(ref.sample_z(4, z_seed)));
  const auto l1 = engine::l1_loss(g, y, g.input(stack(batch, true)));
  CHECK(r.g_l1 == doctest::Approx(g.value(l1)[0]).epsilon(1e-6));
  g.backward(engine::scale(g, l1, 100.0f));
  std::size_t changed = 0;
  for (std::size_t i = 0; i < ref.params().size(); ++i) {
    const auto& p = ref.params()[i];
    const auto& got = trained.generator.params()[i].value.data();
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double grad = p.grad.empty() ? 0.0 : p.grad.data()[k];
      const double cache = 0.1 * grad * grad;
      const double want = p.value.data()[k] - 1e-3 * grad / (std::sqrt(cache) + 1e-6);
      CHECK(got[k] == doctest::Approx(want).epsilon(1e-5));
      changed += got[k] != p.value.data()[k];
    }
  }
  CHECK(changed > 0);
}

TEST_CASE("micro-batch accumulation matches a single full batch") {
  const auto pairs = make_pairs(6, 64, 30);
  const auto batch = pointers(pairs);
  SeganModel a(tiny(), 4), b(tiny(), 4);
  TrainConfig full;
  full.batch_size = 6;
  full.micro_batch = 6;
  TrainConfig split = full;
  split.micro_batch = 4;  // 4 + 2
  Trainer ta(a, full), tb(b, split);
  const auto ra = ta.train_step(batch, 1);
  const auto rb = tb.train_step(batch, 1);
  CHECK(ra.d_real == doctest::Approx(rb.d_real).epsilon(1e-5));
  CHECK(ra.d_fake == doctest::Approx(rb.d_fake).epsilon(1e-5));
  CHECK(ra.g_adv == doctest::Approx(rb.g_adv).epsilon(1e-5));
  CHECK(ra.g_l1 == doctest::Approx(rb.g_l1).epsilon(1e-5));
  // Tiny gradients make RMSprop's direction sensitive to rounding; compare
  // the update size instead of exact values.
  double diff = 0.0, moved = 0.0;
  const auto before = snapshot(SeganModel(tiny(), 4).generator.params());
  for (std::size_t i = 0; i < before.size(); ++i)
    for (std::size_t k = 0; k < before[i].size(); ++k) {
      const float va = a.generator.params()[i].value.data()[k];
      const float vb = b.generator.params()[i].value.data()[k];
      diff = std::max(diff, static_cast<double>(std::abs(va - vb)));
      moved = std::max(moved, static_cast<double>(std::abs(va - before[i][k])));
    }
  CHECK(moved > 0.0);
  CHECK(diff <= moved * 1e-2);
}

TEST_CASE("identical real and fake inputs keep the D losses at or above one quarter") {
  const auto pairs = make_pairs(4, 64, 40);
  const auto batch = pointers(pairs);
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    model::Discriminator d(tiny(), seed);
    const auto clean = stack(batch, true), noisy = stack(batch, false);
    d.set_reference(clean, noisy);
    // An oracle generator returns the clean signal, so D sees the same pair twice.
    Graph<float> g;
    const auto real = d.forward(g, g.input(clean), g.input(noisy));
    const auto fake = d.forward(g, g.input(clean), g.input(noisy));
    const double sum = g.value(engine::lsq_loss(g, real, 1.0f))[0] +
                       g.value(engine::lsq_loss(g, fake, 0.0f))[0];
    CHECK(sum >= 0.25 - 1e-7);
  }
}

TEST_CASE("phase 3 leaves D bit-identical and reports finite nonnegative losses") {
  SeganModel m(tiny(), 11);
  const auto pairs = make_pairs(8, 64, 50);
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.micro_batch = 2;
  cfg.lr = 1e-3;
  Trainer t(m, cfg);
  std::vector<std::vector<float>> d_before;
  std::size_t checked = 0;
  std::vector<Phase> seen;
  t.set_observer([&](Phase phase, bool after, const SeganModel& model) {
    if (!after) seen.push_back(phase);
    if (phase != Phase::kGenerator) return;
    if (!after) {
      d_before = snapshot(model.discriminator.params());
    } else {
      CHECK(snapshot(model.discriminator.params()) == d_before);
      for (const auto& p : model.discriminator.params()) CHECK(p.trainable);
      ++checked;
    }
  });
  const auto all = pointers(pairs);
  for (std::size_t step = 0; step < 6; ++step) {
    const std::span<const TrainingPair* const> batch(all.data() + 4 * (step % 2), 4);
    const auto d_snapshot = snapshot(m.discriminator.params());
    const auto r = t.train_step(batch, step);
    CHECK(r.step == step);
    for (double v : {r.d_real, r.d_fake, r.g_adv, r.g_l1}) {
      CHECK(std::isfinite(v));
      CHECK(v >= 0.0);
    }
    CHECK(snapshot(m.discriminator.params()) != d_snapshot);
  }
  CHECK(checked == 6);
  REQUIRE(seen.size() == 18);
  CHECK(seen[0] == Phase::kDiscriminatorReal);
  CHECK(seen[1] == Phase::kDiscriminatorFake);
  CHECK(seen[2] == Phase::kGenerator);
  CHECK(t.steps_taken() == 6);
}

TEST_CASE("non-finite losses abort the step") {
  SeganModel m(tiny(), 2);
  auto pairs = make_pairs(2, 64, 60);
  pairs[1].clean[5] = std::numeric_limits<float>::quiet_NaN();
  TrainConfig cfg;
  cfg.adversarial = false;
  Trainer t(m, cfg);
  const auto before = snapshot(m.generator.params());
  CHECK(code_of([&] { t.train_step(pointers(pairs), 0); }) == ErrorCode::kNonFiniteLoss);
  CHECK(snapshot(m.generator.params()) == before);
}

TEST_CASE("train writes one report per batch and is reproducible") {
  const auto pairs = make_pairs(20, 64, 70);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 2;
  cfg.micro_batch = 2;
  cfg.checkpoint_every = 4;
  cfg.seed = 5;
  testing::TempDir dir("trainer");

  SeganModel a(tiny(), 5);
  std::ostringstream log;
  const auto ra = train::train(a, cfg, pairs, dir / "a", &log);
  CHECK(ra.reports.size() == 10);
  CHECK(log.str().find("step 0 epoch 0") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "a" / "step_4.sgn"));
  CHECK(std::filesystem::exists(dir / "a" / "step_8.sgn"));
  CHECK_FALSE(std::filesystem::exists(dir / "a" / "step_10.sgn"));

  const std::string csv = slurp(ra.loss_log);
  CHECK(csv.starts_with("step,d_real,d_fake,g_adv,g_l1\n"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);

  SeganModel b(tiny(), 5);
  const auto rb = train::train(b, cfg, pairs, dir / "b");
  CHECK(testing::read_bytes(ra.final_checkpoint) == testing::read_bytes(rb.final_checkpoint));
  CHECK(csv == slurp(rb.loss_log));

  SUBCASE("max_steps caps the run") {
    TrainConfig capped = cfg;
    capped.epochs = 5;
    capped.max_steps = 3;
    SeganModel c(tiny(), 5);
    CHECK(train::train(c, capped, pairs, dir / "c").reports.size() == 3);
  }
  SUBCASE("empty training set") {
    SeganModel c(tiny(), 5);
    CHECK(code_of([&] { train::train(c, cfg, {}, dir / "c"); }) == ErrorCode::kInvalidArgument);
  }
}

TEST_CASE("enhancement of whole waveforms") {
  GeneratorConfig cfg = tiny();
  cfg.window = 16384;
  cfg.filter_width = 31;
  cfg.enc_channels = {4, 4};
  cfg.z_channels = 4;

  SUBCASE("zero-weight generator gives silence of equal length") {
    model::Generator gen(cfg, 1);
    for (auto& p : gen.params()) p.value.fill(0.0f);
    const audio::Waveform in{testing::gaussian(40000, 3, 0.2), 16000};
    CHECK(audio::chunk(in.samples, 16384, 16384).frames.size() == 3);
    const auto out = enhance_waveform(gen, in, ZMode{ZMode::Kind::kSeeded, 7});
    CHECK(out.size() == 40000);
    CHECK(out.sample_rate == 16000);
    for (double v : out.samples) CHECK(v == 0.0);
  }
  SUBCASE("seeded z is reproducible and the seed matters") {
    model::Generator gen(cfg, 2);
    const audio::Waveform in{testing::gaussian(20000, 4, 0.2), 16000};
    const auto a = enhance_waveform(gen, in, ZMode{ZMode::Kind::kSeeded, 7});
    const auto b = enhance_waveform(gen, in, ZMode{ZMode::Kind::kSeeded, 7});
    const auto c = enhance_waveform(gen, in, ZMode{ZMode::Kind::kSeeded, 8});
    const auto z0 = enhance_waveform(gen, in, ZMode{ZMode::Kind::kZero, 0});
    CHECK(a.samples == b.samples);
    CHECK(a.samples != c.samples);
    CHECK(z0.samples == enhance_waveform(gen, in, ZMode{ZMode::Kind::kZero, 5}).samples);
  }
  SUBCASE("48 kHz input is resampled; other rates are rejected") {
    model::Generator gen(cfg, 2);
    const audio::Waveform in48{testing::gaussian(48000, 4, 0.2), 48000};
    CHECK(enhance_waveform(gen, in48, {}).size() == 16000);
    const audio::Waveform in22{testing::gaussian(22050, 4, 0.2), 22050};
    CHECK(code_of([&] { enhance_waveform(gen, in22, {}); }) == ErrorCode::kUnsupportedFormat);
  }
  SUBCASE("enhance_file round trip") {
    testing::TempDir dir("enhance");
    SeganModel m(cfg, 3);
    model::save_checkpoint(m, dir / "g.sgn");
    audio::write_wav(audio::Waveform{testing::gaussian(17000, 5, 0.1), 16000}, dir / "in.wav");
    enhance_file(dir / "g.sgn", dir / "in.wav", dir / "out.wav", ZMode{ZMode::Kind::kSeeded, 1});
    CHECK(audio::read_wav(dir / "out.wav").size() == 17000);
    CHECK(code_of([&] {
            enhance_file(dir / "missing.sgn", dir / "in.wav", dir / "x.wav", {});
          }) != ErrorCode::kInternal);
  }
}
