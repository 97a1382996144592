// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dataset/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "common/error.hpp"

namespace segan::dataset {

namespace {

constexpr double kPeak = 0.8;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t sample_count(double duration_s, int rate) {
  if (!(duration_s > 0.0) || rate <= 0) {
    fail(ErrorCode::kInvalidArgument, "duration and rate must be positive");
  }
  return static_cast<std::size_t>(std::llround(duration_s * rate));
}

void normalize_peak(std::vector<double>& x, double peak) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  if (m == 0.0) return;
  const double s = peak / m;
  for (double& v : x) v *= s;
}

double mean_square(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

std::vector<double> white(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d;
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

// Paul Kellet's refined pink filter: six leaky integrators approximating a
// 1/f power spectrum over the audio band.
std::vector<double> pinken(const std::vector<double>& w) {
  std::vector<double> out(w.size());
  double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double x = w[i];
    b0 = 0.99886 * b0 + x * 0.0555179;
    b1 = 0.99332 * b1 + x * 0.0750759;
    b2 = 0.96900 * b2 + x * 0.1538520;
    b3 = 0.86650 * b3 + x * 0.3104856;
    b4 = 0.55000 * b4 + x * 0.5329522;
    b5 = -0.7616 * b5 - x * 0.0168980;
    out[i] = b0 + b1 + b2 + b3 + b4 + b5 + b6 + x * 0.5362;
    b6 = x * 0.115926;
  }
  return out;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

Waveform load_at_model_rate(const std::filesystem::path& p) {
  Waveform w = audio::read_wav(p);
  if (w.sample_rate == audio::kSourceRate) return audio::resample_48k_to_16k(w);
  if (w.sample_rate != audio::kModelRate) {
    fail(ErrorCode::kWrongRate, p.string() + ": expected 16000 or 48000 Hz, got " +
                                    std::to_string(w.sample_rate));
  }
  return w;
}

}  // namespace

const char* to_string(CleanKind kind) noexcept {
  switch (kind) {
    case CleanKind::kHarmonic: return "harmonic";
    case CleanKind::kGlide: return "glide";
  }
  return "?";
}

const char* to_string(NoiseKind kind) noexcept {
  switch (kind) {
    case NoiseKind::kWhite: return "white";
    case NoiseKind::kPink: return "pink";
    case NoiseKind::kTonalHum: return "tonal_hum";
    case NoiseKind::kModulatedBurst: return "modulated_burst";
  }
  return "?";
}

CleanKind parse_clean_kind(std::string_view name) {
  for (CleanKind k : {CleanKind::kHarmonic, CleanKind::kGlide}) {
    if (name == to_string(k)) return k;
  }
  fail(ErrorCode::kInvalidArgument, "unknown clean kind '" + std::string(name) + "'");
}

NoiseKind parse_noise_kind(std::string_view name) {
  for (NoiseKind k : kAllNoiseKinds) {
    if (name == to_string(k)) return k;
  }
  fail(ErrorCode::kInvalidArgument, "unknown noise kind '" + std::string(name) + "'");
}

CleanParams draw_clean_params(CleanKind kind, std::uint64_t seed) {
  std::mt19937_64 rng(seed * 2 + static_cast<std::uint64_t>(kind));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CleanParams p;
  p.f0 = 80.0 + 220.0 * u(rng);
  p.harmonics = std::uniform_int_distribution<int>(3, 8)(rng);
  p.glide_depth = kind == CleanKind::kGlide ? 0.03 + 0.07 * u(rng) : 0.0;
  p.envelope_rate = 2.0 + 3.0 * u(rng);
  p.peak = kPeak * (0.5 + 0.5 * u(rng));
  p.phase = kTwoPi * u(rng);
  return p;
}

Waveform synth_clean(CleanKind kind, std::uint64_t seed, double duration_s, int rate) {
  const std::size_t n = sample_count(duration_s, rate);
  const CleanParams p = draw_clean_params(kind, seed);
  std::vector<double> x(n);
  double cycles = 0.0;  // integral of the instantaneous f0
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double f0 = p.f0 * (1.0 + p.glide_depth * std::sin(kTwoPi * 0.5 * t));
    double v = 0.0;
    for (int h = 1; h <= p.harmonics; ++h) {
      if (h * f0 >= 0.5 * rate) break;
      v += std::sin(kTwoPi * h * cycles + h * p.phase) / h;
    }
    const double env = 0.55 + 0.45 * std::sin(kTwoPi * p.envelope_rate * t + p.phase);
    x[i] = env * v;
    cycles += f0 / rate;
  }
  normalize_peak(x, p.peak);
  return Waveform{std::move(x), rate};
}

Waveform synth_noise(NoiseKind kind, std::uint64_t seed, double duration_s, int rate) {
  const std::size_t n = sample_count(duration_s, rate);
  std::mt19937_64 rng(seed * 4 + static_cast<std::uint64_t>(kind) + 0x5eed);
  std::vector<double> x;
  switch (kind) {
    case NoiseKind::kWhite:
      x = white(rng, n);
      break;
    case NoiseKind::kPink:
      x = pinken(white(rng, n));
      break;
    case NoiseKind::kTonalHum: {
      std::uniform_real_distribution<double> ph(0.0, kTwoPi);
      double phases[6];
      for (double& v : phases) v = ph(rng);
      x.assign(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate;
        for (int h = 1; h <= 6; ++h) x[i] += std::sin(kTwoPi * 50.0 * h * t + phases[h - 1]) / h;
      }
      break;
    }
    case NoiseKind::kModulatedBurst: {
      x = white(rng, n);
      std::uniform_real_distribution<double> seg(0.05, 0.25);
      bool on = true;
      std::size_t i = 0;
      while (i < n) {
        const auto len = static_cast<std::size_t>(seg(rng) * rate) + 1;
        const std::size_t end = std::min(n, i + len);
        if (!on) std::fill(x.begin() + static_cast<long>(i), x.begin() + static_cast<long>(end), 0.0);
        i = end;
        on = !on;
      }
      break;
    }
  }
  normalize_peak(x, kPeak);
  return Waveform{std::move(x), rate};
}

double mix_gain(const Waveform& clean, const Waveform& noise, double snr_db) {
  if (clean.sample_rate != noise.sample_rate) {
    fail(ErrorCode::kInvalidArgument, "clean and noise sample rates differ");
  }
  if (noise.size() < clean.size()) {
    fail(ErrorCode::kInvalidArgument, "noise is shorter than the clean signal");
  }
  if (!std::isfinite(snr_db)) fail(ErrorCode::kInvalidArgument, "snr must be finite");
  const double pc = mean_square(clean.samples);
  const double pn = mean_square(std::span(noise.samples).first(clean.size()));
  if (pc == 0.0) fail(ErrorCode::kZeroPower, "clean signal has zero energy");
  if (pn == 0.0) fail(ErrorCode::kZeroPower, "noise has zero energy over the clean duration");
  return std::sqrt(pc / (pn * std::pow(10.0, snr_db / 10.0)));
}

Waveform mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db) {
  const double g = mix_gain(clean, noise, snr_db);
  Waveform out{clean.samples, clean.sample_rate};
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] += g * noise.samples[i];
  return out;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kManifest, "cannot open manifest " + path.string());
  const auto base = path.parent_path();
  auto resolve = [&base](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };

  std::vector<ManifestEntry> out;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(t);
    for (std::string field; std::getline(ss, field, '\t');) f.push_back(trim(field));
    if (f.size() != 4) {
      fail(ErrorCode::kManifest, where + ": expected 4 tab-separated fields, got " +
                                     std::to_string(f.size()));
    }
    ManifestEntry e;
    e.clean_path = resolve(f[0]);
    if (f[1].rfind("SYNTH:", 0) == 0) {
      try {
        e.synth_noise = parse_noise_kind(f[1].substr(6));
      } catch (const Error& err) {
        fail(ErrorCode::kManifest, where + ": " + err.what());
      }
    } else {
      e.noise_path = resolve(f[1]);
    }
    const auto [ptr, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), e.snr_db);
    if (ec != std::errc() || ptr != f[2].data() + f[2].size() || !std::isfinite(e.snr_db)) {
      fail(ErrorCode::kManifest, where + ": bad snr_db '" + f[2] + "'");
    }
    if (f[3] == "train") {
      e.split = Split::kTrain;
    } else if (f[3] == "test") {
      e.split = Split::kTest;
    } else {
      fail(ErrorCode::kManifest, where + ": split must be train or test, got '" + f[3] + "'");
    }
    if (!std::filesystem::exists(e.clean_path)) {
      fail(ErrorCode::kManifest, where + ": missing file " + e.clean_path.string());
    }
    if (!e.synth_noise && !std::filesystem::exists(e.noise_path)) {
      fail(ErrorCode::kManifest, where + ": missing file " + e.noise_path.string());
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Utterance> load_manifest(const std::filesystem::path& path, Split split,
                                     std::uint64_t seed) {
  const auto entries = read_manifest(path);
  std::vector<Utterance> out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const ManifestEntry& e = entries[i];
    if (e.split != split) continue;
    Utterance u;
    u.id = e.clean_path.stem().string();
    u.clean = load_at_model_rate(e.clean_path);
    if (u.clean.empty()) fail(ErrorCode::kManifest, e.clean_path.string() + ": empty");
    const Waveform noise = e.synth_noise
                               ? synth_noise(*e.synth_noise, seed + i, u.clean.duration(),
                                             u.clean.sample_rate)
                               : load_at_model_rate(e.noise_path);
    if (noise.size() < u.clean.size()) {
      fail(ErrorCode::kManifest, "noise for " + e.clean_path.string() + " is too short");
    }
    u.noisy = mix_at_snr(u.clean, noise, e.snr_db);
    u.snr_db = e.snr_db;
    u.split = e.split;
    out.push_back(std::move(u));
  }
  return out;
}

namespace {

struct SynthItem {
  Utterance utt;
  Waveform noise;  // scaled by the mixing gain
};

std::vector<SynthItem> synth_items(const SynthSpec& spec) {
  if (spec.noise_kinds.empty() || spec.snrs_db.empty()) {
    fail(ErrorCode::kInvalidArgument, "synthetic corpus needs noise kinds and SNRs");
  }
  std::vector<SynthItem> out;
  for (std::size_t i = 0; i < spec.utterances; ++i) {
    const std::uint64_t s = spec.seed * 1000003 + i;
    const CleanKind ck = i % 2 ? CleanKind::kGlide : CleanKind::kHarmonic;
    const NoiseKind nk = spec.noise_kinds[i % spec.noise_kinds.size()];
    const double snr = spec.snrs_db[(i / spec.noise_kinds.size()) % spec.snrs_db.size()];
    SynthItem item;
    Utterance& u = item.utt;
    u.id = "synth" + std::to_string(i) + "_" + to_string(nk) + "_" +
           std::to_string(static_cast<int>(snr)) + "dB";
    u.clean = synth_clean(ck, s, spec.duration_s, spec.rate);
    item.noise = synth_noise(nk, s, spec.duration_s, spec.rate);
    u.noisy = mix_at_snr(u.clean, item.noise, snr);
    const double g = mix_gain(u.clean, item.noise, snr);
    item.noise.samples.resize(u.clean.size());
    for (double& v : item.noise.samples) v *= g;
    u.snr_db = snr;
    out.push_back(std::move(item));
  }
  return out;
}

}  // namespace

std::vector<Utterance> synth_corpus(const SynthSpec& spec) {
  std::vector<Utterance> out;
  for (auto& item : synth_items(spec)) out.push_back(std::move(item.utt));
  return out;
}

std::filesystem::path export_synth_corpus(const SynthSpec& spec, const std::filesystem::path& dir,
                                          std::size_t test_count) {
  auto items = synth_items(spec);
  if (test_count > items.size()) {
    fail(ErrorCode::kInvalidArgument, "test_count exceeds the number of utterances");
  }
  std::error_code ec;
  for (const char* sub : {"clean", "noise", "noisy"}) {
    std::filesystem::create_directories(dir / sub, ec);
    if (ec) fail(ErrorCode::kIo, "cannot create " + (dir / sub).string() + ": " + ec.message());
  }
  const auto manifest = dir / "manifest.tsv";
  std::ofstream out(manifest);
  if (!out) fail(ErrorCode::kIo, "cannot write " + manifest.string());
  out << "# clean\tnoise\tsnr_db\tsplit\n";
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto& [u, noise] = items[i];
    double peak = 0.0;
    for (double v : u.noisy.samples) peak = std::max(peak, std::abs(v));
    if (peak > 0.99) {
      const double k = 0.99 / peak;
      for (auto* w : {&u.clean, &u.noisy, &noise})
        for (double& v : w->samples) v *= k;
    }
    const std::string name = u.id + ".wav";
    audio::write_wav(u.clean, dir / "clean" / name);
    audio::write_wav(noise, dir / "noise" / name);
    audio::write_wav(u.noisy, dir / "noisy" / name);
    char snr[32];
    std::snprintf(snr, sizeof snr, "%g", u.snr_db);
    out << "clean/" << name << '\t' << "noise/" << name << '\t' << snr << '\t'
        << (i + test_count >= items.size() ? "test" : "train") << '\n';
  }
  if (!out) fail(ErrorCode::kIo, "write failed: " + manifest.string());
  return manifest;
}

std::vector<TrainingPair> build_pairs(const std::vector<Utterance>& utterances,
                                      std::size_t window, std::size_t hop, double preemph) {
  std::vector<TrainingPair> out;
  for (const Utterance& u : utterances) {
    if (u.clean.size() != u.noisy.size()) {
      fail(ErrorCode::kManifest, u.id + ": clean and noisy lengths differ");
    }
    const auto c = audio::chunk(audio::preemphasis(u.clean, preemph).samples, window, hop);
    const auto n = audio::chunk(audio::preemphasis(u.noisy, preemph).samples, window, hop);
    for (std::size_t k = 0; k < c.frames.size(); ++k) {
      out.push_back({{n.frames[k].begin(), n.frames[k].end()},
                     {c.frames[k].begin(), c.frames[k].end()}});
    }
  }
  return out;
}

}  // namespace segan::dataset
