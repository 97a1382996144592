// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Acceptance checks 1-11. Prints one PASS/FAIL line per criterion and exits
// non-zero when any fails. Pass criterion numbers to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "audio/audio_io.hpp"
#include "dataset/dataset.hpp"
#include "engine/gradcheck.hpp"
#include "engine/ops.hpp"
#include "engine/optimizer.hpp"
#include "metrics/metrics.hpp"
#include "model/segan_model.hpp"
#include "test_util.hpp"
#include "train/trainer.hpp"
#include "wiener/wiener.hpp"

namespace fs = std::filesystem;
using namespace segan;
using engine::Graph;
using engine::Tensor;
using engine::Var;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

Tensor<double> randn(const engine::Shape& shape, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  Tensor<double> t(shape);
  for (auto& v : t.storage()) v = d(rng);
  return t;
}

double inner(const Tensor<double>& a, const Tensor<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// ------------------------------------------------------------------ 1
void shape_fidelity(Outcome& o) {
  const std::vector<std::string> expected = {
      "16384x1", "8192x16", "4096x32", "2048x32", "1024x64", "512x64",
      "256x128", "128x128", "64x256",  "32x256",  "16x512",  "8x1024"};
  const model::GeneratorConfig cfg;
  std::vector<std::string> got;
  for (const auto& e : model::encoder_ledger(cfg))
    got.push_back(std::to_string(e.length) + "x" + std::to_string(e.channels));
  o.require(got == expected, "encoder ledger");
  bool bottleneck = false;
  for (const auto& e : model::shape_ledger(cfg))
    if (e.stage == "bottleneck+z") bottleneck = e.length == 8 && e.channels == 2048;
  o.require(bottleneck, "bottleneck 8x2048");
  o.detail << got.size() << " encoder entries, bottleneck after z 8x2048";
}

// ------------------------------------------------------------------ 2
void gradient_suite(Outcome& o) {
  engine::GradCheckOptions opt;
  opt.eps = 1e-5;
  opt.samples = 128;
  const auto results = engine::run_gradcheck_suite(opt);
  const std::set<std::string> required = {"conv1d", "conv1d_transpose", "prelu",
                                          "leaky_relu", "virtual_batch_norm", "linear",
                                          "tanh", "lsq_loss_composite"};
  std::set<std::string> seen;
  double worst = 0.0;
  for (const auto& r : results) {
    seen.insert(r.name);
    worst = std::max(worst, r.max_rel_error);
    o.require(r.max_rel_error < 1e-4, r.name + " relative error");
    o.require(r.coordinates >= 100, r.name + " coordinates");
  }
  for (const auto& name : required) o.require(seen.contains(name), "missing " + name);
  o.detail << results.size() << " ops, worst relative error " << worst;
}

// ------------------------------------------------------------------ 3
void adjointness(Outcome& o) {
  std::mt19937_64 rng(31);
  const std::size_t widths[] = {1, 3, 5, 15, 31};
  double worst = 0.0;
  bool saw_31_2 = false;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = widths[trial % 5];
    const std::size_t s = 1 + (trial / 5) % 3;
    saw_31_2 = saw_31_2 || (k == 31 && s == 2);
    const std::size_t ly = 4 + rng() % 60;
    const std::size_t ci = 1 + rng() % 6, co = 1 + rng() % 6, b = 1 + rng() % 3;
    const auto x = randn({b, ly * s, ci}, rng);
    const auto y = randn({b, ly, co}, rng);
    const auto w = randn({k, ci, co}, rng);
    Graph<double> g;
    const Var wv = g.input(w);
    const double lhs = inner(g.value(engine::conv1d(g, g.input(x), wv, Var{}, s)), y);
    const double rhs = inner(x, g.value(engine::conv1d_transpose(g, g.input(y), wv, Var{}, s)));
    worst = std::max(worst, std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300}));
  }
  o.require(saw_31_2, "width 31 stride 2 covered");
  o.require(worst < 1e-10, "relative error");
  o.detail << "50 combinations, worst relative error " << worst;
}

// ------------------------------------------------------------------ 4
void signal_pipeline(Outcome& o) {
  audio::Waveform noise;
  noise.samples = testing::gaussian(16000, 4);
  const auto back = audio::deemphasis(audio::preemphasis(noise));
  const double emph_err = max_abs_diff(back.samples, noise.samples);
  o.require(emph_err < 1e-9, "emphasis round trip");

  bool chunks_exact = true;
  for (std::size_t len : {1u, 16383u, 16384u, 40000u}) {
    const auto x = testing::gaussian(len, len);
    const auto c = audio::chunk(x, 16384, 16384);
    auto y = audio::reassemble(c.frames, 16384, c.pad_len);
    chunks_exact = chunks_exact && y == x;
  }
  o.require(chunks_exact, "chunk/reassemble identity");

  testing::TempDir dir("acceptance_wav");
  audio::Waveform q;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20000; ++i)
    q.samples.push_back(static_cast<double>(static_cast<int>(rng() % 65536) - 32768) / 32768.0);
  audio::write_wav(q, dir / "q.wav");
  o.require(audio::read_wav(dir / "q.wav").samples == q.samples, "wav round trip");

  // Frequency response of the decimation filter at 48 kHz.
  const auto h = audio::decimation_filter();
  auto response = [&](double hz) {
    std::complex<double> acc = 0.0;
    for (std::size_t n = 0; n < h.size(); ++n)
      acc += h[n] * std::polar(1.0, -2.0 * M_PI * hz / 48000.0 * static_cast<double>(n));
    return std::abs(acc);
  };
  const double dc = response(0.0);
  double stop = 0.0;
  for (double f = 8000.0; f <= 24000.0; f += 10.0) stop = std::max(stop, response(f));
  const double rejection_db = -20.0 * std::log10(stop / dc);

  // The same properties measured on resampled signals, away from the edges.
  audio::Waveform constant{std::vector<double>(48000, 0.5), audio::kSourceRate};
  const auto dc_out = audio::resample_48k_to_16k(constant);
  const double dc_gain = dc_out.samples[8000] / 0.5;
  audio::Waveform tone{testing::sine(48000, 12000.0, 48000.0), audio::kSourceRate};
  const auto tone_out = audio::resample_48k_to_16k(tone);
  const double tone_db = 20.0 * std::log10(testing::rms(tone_out.samples, 100, 15900) /
                                           testing::rms(tone.samples));
  o.require(std::abs(dc - 1.0) <= 1e-3 && std::abs(dc_gain - 1.0) <= 1e-3, "dc gain");
  o.require(rejection_db >= 40.0 && tone_db <= -40.0, "stopband rejection");
  o.detail << "emphasis error " << emph_err << ", dc gain " << dc_gain << ", stopband rejection "
           << rejection_db << " dB (12 kHz tone " << tone_db << " dB)";
}

// ------------------------------------------------------------------ 5
void optimizer(Outcome& o) {
  // Minimize 0.5 (theta - 3)^2 from theta = 0.
  engine::ParameterStore<double> store;
  store.add("theta", Tensor<double>({1}, 0.0));
  engine::RmsProp<double> opt;
  const double lr = 2e-4, rho = 0.9, eps = 1e-6;
  double theta = 0.0, cache = 0.0, worst = 0.0;
  for (int step = 0; step < 100; ++step) {
    auto& p = store[0];
    p.zero_grad();
    p.grad[0] = p.value[0] - 3.0;
    opt.step(store);
    const double g = theta - 3.0;
    cache = rho * cache + (1.0 - rho) * g * g;
    theta -= lr * g / (std::sqrt(cache) + eps);
    worst = std::max(worst, std::abs(store[0].value[0] - theta));
  }
  o.require(worst < 1e-12, "recurrence");
  o.detail << "100 steps, max deviation " << worst << ", theta " << theta;
}

// ------------------------------------------------------------------ 6
void loss_semantics(Outcome& o) {
  Graph<double> g;
  const double a = g.value(engine::lsq_loss(g, g.input(Tensor<double>({1, 1}, 0.0)), 1.0))[0];
  const double b = g.value(engine::lsq_loss(g, g.input(Tensor<double>({1, 1}, 2.0)), 0.0))[0];
  o.require(a == 0.5 && b == 2.0, "lsq fixtures");

  // Constant-output D: zero linear weights, only the output bias trainable,
  // fitted by plain gradient descent on real and fake losses of the same input.
  model::GeneratorConfig cfg;
  cfg.window = 64;
  cfg.filter_width = 5;
  cfg.enc_channels = {4, 6, 8};
  cfg.z_channels = 8;
  model::Discriminator d(cfg, 2);
  std::mt19937_64 rng(6);
  Tensor<float> x({4, 64, 1});
  std::normal_distribution<float> nd(0.0f, 0.3f);
  for (auto& v : x.storage()) v = nd(rng);
  d.set_reference(x, x);
  d.params().set_trainable(false);
  d.params().at("d.fc.w").value.fill(0.0f);
  auto& bias = d.params().at("d.fc.b");
  bias.trainable = true;
  bias.value.fill(-1.5f);
  double summed = 0.0;
  for (int it = 0; it < 80; ++it) {
    bias.zero_grad();
    Graph<float> gf;
    const Var in = gf.input(x);
    const Var real = d.forward(gf, in, in);
    const Var fake = d.forward(gf, in, in);
    const Var loss = engine::add(gf, engine::lsq_loss(gf, real, 1.0f), engine::lsq_loss(gf, fake, 0.0f));
    summed = gf.value(loss)[0];
    gf.backward(loss);
    bias.value[0] -= 0.25f * bias.grad[0];
  }
  o.require(std::abs(summed - 0.25) <= 1e-6, "fitted summed loss");
  o.require(std::abs(bias.value[0] - 0.5f) <= 1e-3f, "fitted response");
  o.detail << "lsq 0.5 / 2.0 exact, fitted response " << bias.value[0] << ", summed loss " << summed;
}

// ------------------------------------------------- shared toy experiment
model::GeneratorConfig toy_config() {
  model::GeneratorConfig cfg;
  cfg.window = 1024;
  cfg.enc_channels = {16, 32, 32, 64};
  cfg.z_channels = 64;
  return cfg;
}

std::vector<dataset::TrainingPair> toy_pairs() {
  dataset::SynthSpec spec;
  spec.utterances = 10;
  spec.duration_s = 0.15;
  spec.seed = 3;
  auto pairs = dataset::build_pairs(dataset::synth_corpus(spec), 1024, 512);
  pairs.resize(std::min<std::size_t>(pairs.size(), 50));
  return pairs;
}

train::TrainConfig regression_config() {
  train::TrainConfig tc;
  tc.lr = 1e-3;
  tc.batch_size = 10;
  tc.micro_batch = 10;
  tc.max_steps = 200;
  tc.epochs = 1000;
  tc.adversarial = false;
  tc.seed = 11;
  return tc;
}

std::optional<model::SeganModel> regression_model;

// ------------------------------------------------------------------ 7
void toy_regression(Outcome& o) {
  const auto pairs = toy_pairs();
  o.require(pairs.size() == 50, "50 pairs");
  testing::TempDir dir("acceptance_toy");
  const auto tc = regression_config();
  model::SeganModel a(toy_config(), 1);
  const auto ra = train::train(a, tc, pairs, dir / "a");
  model::SeganModel b(toy_config(), 1);
  const auto rb = train::train(b, tc, pairs, dir / "b");
  o.require(ra.reports.size() == 200, "200 steps");
  o.require(testing::read_bytes(ra.loss_log) == testing::read_bytes(rb.loss_log), "identical loss logs");

  // Mean L1 over the first and the last pass through the 50 pairs.
  const std::size_t per_epoch = pairs.size() / tc.batch_size;
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < per_epoch; ++i) {
    first += ra.reports[i].g_l1 / per_epoch;
    last += ra.reports[ra.reports.size() - 1 - i].g_l1 / per_epoch;
  }
  o.require(last <= 0.5 * first, "final L1 at most half of initial");
  o.detail << "mean L1 " << first << " -> " << last << " (ratio " << last / first
           << "), loss logs identical";
  regression_model.emplace(std::move(a));
}

// ------------------------------------------------------------------ 8
void toy_adversarial(Outcome& o) {
  const auto pairs = toy_pairs();
  model::SeganModel m(toy_config(), 1);
  train::TrainConfig tc;
  tc.batch_size = 10;
  tc.micro_batch = 10;
  train::Trainer trainer(m, tc);

  std::vector<std::vector<float>> before;
  std::size_t d_changed = 0, observed = 0;
  trainer.set_observer([&](train::Phase phase, bool after, const model::SeganModel& s) {
    if (phase != train::Phase::kGenerator) return;
    std::vector<std::vector<float>> now;
    for (const auto& p : s.discriminator.params()) now.push_back(p.value.storage());
    if (!after) {
      before = std::move(now);
    } else {
      ++observed;
      if (now != before) ++d_changed;
    }
  });

  std::vector<const dataset::TrainingPair*> order;
  for (const auto& p : pairs) order.push_back(&p);
  std::mt19937_64 rng(tc.seed);
  std::size_t non_finite = 0;
  double last_d = 0.0, last_g = 0.0;
  const std::size_t steps = 500;
  for (std::size_t step = 0; step < steps; ++step) {
    const std::size_t offset = (step * tc.batch_size) % order.size();
    if (offset == 0) std::shuffle(order.begin(), order.end(), rng);
    const std::span<const dataset::TrainingPair* const> batch(order.data() + offset, tc.batch_size);
    try {
      const auto r = trainer.train_step(batch, step);
      for (double v : {r.d_real, r.d_fake, r.g_adv, r.g_l1})
        if (!std::isfinite(v)) ++non_finite;
      last_d = r.d_real + r.d_fake;
      last_g = r.g_adv;
    } catch (const Error& e) {
      ++non_finite;
      o.detail << "step " << step << ": " << e.what() << " ";
      break;
    }
  }
  o.require(non_finite == 0, "finite losses");
  o.require(observed == steps && d_changed == 0, "D unchanged by every generator phase");
  o.require(trainer.steps_taken() == steps, "500 steps");
  o.detail << trainer.steps_taken() << " steps, non-finite losses " << non_finite
           << ", D changed in " << d_changed << " of " << observed << " generator phases, last D loss " << last_d
           << ", last G adversarial " << last_g;
}

// ------------------------------------------------------------------ 9
void enhancement_smoke(Outcome& o) {
  if (!regression_model) {
    Outcome quiet;
    toy_regression(quiet);
  }
  const auto clean = dataset::synth_clean(dataset::CleanKind::kHarmonic, 9001, 1.0);
  const auto noisy =
      dataset::mix_at_snr(clean, dataset::synth_noise(dataset::NoiseKind::kWhite, 9001, 1.0), 0.0);
  const auto enhanced = train::enhance_waveform(regression_model->generator, noisy,
                                                {train::ZMode::Kind::kSeeded, 7});
  o.require(enhanced.size() == noisy.size(), "length");
  const double before = metrics::ssnr(clean, noisy);
  const double after = metrics::ssnr(clean, enhanced);
  o.require(after - before >= 3.0, "improvement of at least 3 dB");
  o.detail << "held-out white 0 dB: SSNR " << before << " -> " << after << " dB ("
           << (after - before >= 0 ? "+" : "") << after - before << ")";
}

// ------------------------------------------------------------------ 10
void wiener_baseline(Outcome& o) {
  const wiener::WienerOptions opt;
  const std::size_t lead = (opt.noise_frames - 1) * opt.hop + opt.frame;
  double worst_gain = 0.0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto clean = dataset::synth_clean(dataset::CleanKind::kHarmonic, seed, 2.0);
    clean.samples.insert(clean.samples.begin(), lead, 0.0);
    const double dur = static_cast<double>(clean.size()) / 16000.0 + 0.01;
    const auto noisy =
        dataset::mix_at_snr(clean, dataset::synth_noise(dataset::NoiseKind::kWhite, seed + 100, dur), 5.0);
    const auto enhanced = wiener::enhance_wiener(noisy, opt);
    o.require(enhanced.size() == noisy.size(), "output length");
    for (const auto& frame : wiener::wiener_gains(wiener::stft(noisy, opt.frame, opt.hop), opt))
      for (double h : frame) worst_gain = std::max(worst_gain, h);
    const double before = metrics::ssnr(clean, noisy);
    const double after = metrics::ssnr(clean, enhanced);
    o.require(after - before >= 2.0, "improvement of at least 2 dB");
    o.detail << "seed " << seed << " SSNR " << before << " -> " << after << "; ";
  }
  o.require(worst_gain <= 1.0, "gain at most 1");
  o.detail << "max gain " << worst_gain;
}

// ------------------------------------------------------------------ 11
void metric_fixtures(Outcome& o) {
  audio::Waveform x;
  x.samples = testing::gaussian(16000, 8, 0.1);
  audio::Waveform zero{std::vector<double>(x.size(), 0.0), 16000};
  const double same = metrics::ssnr(x, x);
  const double silent = metrics::ssnr(x, zero);
  const double l = metrics::llr(x, x);
  o.require(same == 35.0, "ssnr(x, x)");
  o.require(std::abs(silent) <= 1e-9, "ssnr(x, 0)");
  o.require(std::abs(l) < 1e-10, "llr(x, x)");

  const std::vector<double> r = {1.0, 0.5};
  const auto lpc = metrics::levinson(r, 1);
  o.require(std::abs(lpc.a[1] + 0.5) <= 1e-12 && std::abs(lpc.error - 0.75) <= 1e-12, "levinson");

  // 100 rated items whose per-system means are 2.09, 2.70 and 3.18.
  std::vector<metrics::Rating> table;
  for (int i = 0; i < 100; ++i) {
    const std::string listener = "l" + std::to_string(i % 16), sentence = "s" + std::to_string(i / 16);
    table.push_back({listener, sentence, "noisy", i < 9 ? 3 : 2});
    table.push_back({listener, sentence, "wiener", i < 70 ? 3 : 2});
    table.push_back({listener, sentence, "segan", i < 18 ? 4 : 3});
  }
  const auto s = metrics::aggregate_mos(table);
  o.require(std::abs(s.mos.at("noisy") - 2.09) < 1e-12 && std::abs(s.mos.at("wiener") - 2.70) < 1e-12 &&
                std::abs(s.mos.at("segan") - 3.18) < 1e-12,
            "mos means");
  for (const auto& c : s.comparisons)
    o.require(std::abs(c.prefer_a + c.prefer_b + c.no_preference - 1.0) < 1e-12, "preference fractions");
  o.detail << "ssnr(x,x) " << same << ", ssnr(x,0) " << silent << ", llr(x,x) " << l << ", a1 " << lpc.a[1]
           << ", err " << lpc.error << ", MOS " << s.mos.at("noisy") << "/" << s.mos.at("wiener") << "/"
           << s.mos.at("segan");
}

struct Criterion {
  int id;
  const char* title;
  double time_limit_s;  // 0 = none
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "shape fidelity", 1.0, shape_fidelity},
      {2, "gradient suite", 300.0, gradient_suite},
      {3, "adjointness", 60.0, adjointness},
      {4, "signal pipeline", 0.0, signal_pipeline},
      {5, "optimizer", 0.0, optimizer},
      {6, "loss semantics", 0.0, loss_semantics},
      {7, "toy regression run", 600.0, toy_regression},
      {8, "toy adversarial run", 1800.0, toy_adversarial},
      {9, "enhancement smoke test", 0.0, enhancement_smoke},
      {10, "wiener baseline", 0.0, wiener_baseline},
      {11, "metrics", 0.0, metric_fixtures},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "[exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit_s > 0.0 && secs >= c.time_limit_s) {
      o.pass = false;
      o.detail << " [over the " << c.time_limit_s << " s limit]";
    }
    if (!o.pass) ++failures;
    std::printf("criterion %2d %s  %-24s %8.2f s  %s\n", c.id, o.pass ? "PASS" : "FAIL", c.title, secs,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
