// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "audio/audio_io.hpp"

namespace segan::dataset {

using audio::Waveform;

enum class CleanKind { kHarmonic, kGlide };
enum class NoiseKind { kWhite, kPink, kTonalHum, kModulatedBurst };

const char* to_string(CleanKind kind) noexcept;
const char* to_string(NoiseKind kind) noexcept;
CleanKind parse_clean_kind(std::string_view name);
NoiseKind parse_noise_kind(std::string_view name);

inline constexpr NoiseKind kAllNoiseKinds[] = {NoiseKind::kWhite, NoiseKind::kPink,
                                               NoiseKind::kTonalHum,
                                               NoiseKind::kModulatedBurst};

// Random draws behind one synthetic "utterance". Exposed so tests can check
// the generated signal against the parameters that produced it.
struct CleanParams {
  double f0 = 0.0;            // Hz, in [80, 300]
  int harmonics = 0;          // in [3, 8]
  double glide_depth = 0.0;   // relative f0 excursion (kGlide only)
  double envelope_rate = 0.0; // Hz, syllable-like modulation
  double peak = 0.0;          // target peak amplitude, <= 0.8
  double phase = 0.0;
};

CleanParams draw_clean_params(CleanKind kind, std::uint64_t seed);

// Harmonic complex with a slow amplitude envelope. Harmonic h has amplitude
// 1/h. Deterministic in (kind, seed); peak amplitude <= 0.8.
Waveform synth_clean(CleanKind kind, std::uint64_t seed, double duration_s,
                     int rate = audio::kModelRate);

// white: iid Gaussian. pink: white through a -3 dB/octave shaping filter.
// tonal_hum: 50 Hz and its harmonics. modulated_burst: white noise gated on
// and off in random segments. All are normalized to peak 0.8.
Waveform synth_noise(NoiseKind kind, std::uint64_t seed, double duration_s,
                     int rate = audio::kModelRate);

// Scale g applied to the noise so that mean(clean^2) / mean((g*noise)^2) is
// 10^(snr_db/10). Powers are taken over the clean duration.
double mix_gain(const Waveform& clean, const Waveform& noise, double snr_db);

// clean + g * noise, with the noise truncated to the clean length.
Waveform mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db);

enum class Split { kTrain, kTest };

struct Utterance {
  std::string id;
  Waveform clean;
  Waveform noisy;
  double snr_db = 0.0;
  Split split = Split::kTrain;
};

struct ManifestEntry {
  std::filesystem::path clean_path;
  std::filesystem::path noise_path;   // empty when synthesized
  std::optional<NoiseKind> synth_noise;
  double snr_db = 0.0;
  Split split = Split::kTrain;
};

// Tab-separated: clean_path, noise_path or SYNTH:<kind>, snr_db, train|test.
// Blank lines and lines starting with '#' are ignored. Relative paths are
// resolved against the manifest's directory. Missing files are reported.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

// Loads (and resamples from 48 kHz if needed) every entry of `split`.
// Synthesized noise uses seed + line index.
std::vector<Utterance> load_manifest(const std::filesystem::path& path, Split split,
                                     std::uint64_t seed);

// Desk-scale synthetic corpus: the i-th utterance takes noise kind
// kinds[i % kinds.size()] and SNR snrs[(i / kinds.size()) % snrs.size()].
struct SynthSpec {
  std::size_t utterances = 16;
  double duration_s = 1.0;
  std::vector<NoiseKind> noise_kinds{std::begin(kAllNoiseKinds), std::end(kAllNoiseKinds)};
  std::vector<double> snrs_db{0.0, 5.0, 10.0, 15.0};
  std::uint64_t seed = 1;
  int rate = audio::kModelRate;
};

std::vector<Utterance> synth_corpus(const SynthSpec& spec);

// Writes synth_corpus(spec) as clean/, noise/ and noisy/ WAV files plus a
// manifest.tsv whose last `test_count` utterances form the test split. Each
// utterance is scaled (all three files alike) so the noisy file does not clip.
// Returns the manifest path.
std::filesystem::path export_synth_corpus(const SynthSpec& spec, const std::filesystem::path& dir,
                                          std::size_t test_count);

struct TrainingPair {
  std::vector<float> noisy;
  std::vector<float> clean;
};

// Preemphasizes both signals, then cuts them with identical offsets.
std::vector<TrainingPair> build_pairs(const std::vector<Utterance>& utterances,
                                      std::size_t window, std::size_t hop,
                                      double preemph = audio::kPreemphasis);

}  // namespace segan::dataset
