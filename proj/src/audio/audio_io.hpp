// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace segan::audio {

inline constexpr int kModelRate = 16000;
inline constexpr int kSourceRate = 48000;
inline constexpr double kPreemphasis = 0.95;

// Mono signal. Samples are kept in double so that the emphasis filters and
// the metrics do not accumulate float32 rounding.
struct Waveform {
  std::vector<double> samples;
  int sample_rate = kModelRate;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  double duration() const noexcept {
    return static_cast<double>(samples.size()) / sample_rate;
  }

  // Throws InvalidArgument when sample_rate <= 0 or a sample is not finite.
  void validate() const;
};

// RIFF/WAVE, PCM 16-bit little-endian, mono. Samples are scaled by 1/32768.
Waveform read_wav(const std::filesystem::path& path);

// Quantizes with round(x * 32768) clamped to the int16 range, the exact
// inverse of the reader's scaling. Out-of-range samples are clipped.
void write_wav(const Waveform& w, const std::filesystem::path& path);

std::int16_t quantize_sample(double x) noexcept;

// Anti-aliased decimation by three (127-tap Hamming windowed sinc, cutoff at
// 0.45 of the output rate). Output length is ceil(len / 3).
Waveform resample_48k_to_16k(const Waveform& w);

// The low-pass prototype used by the resampler, normalized to unit DC gain.
std::vector<double> decimation_filter();

Waveform preemphasis(const Waveform& w, double coef = kPreemphasis);
Waveform deemphasis(const Waveform& w, double coef = kPreemphasis);

struct Chunks {
  std::vector<std::vector<double>> frames;
  std::size_t pad_len = 0;
};

// ceil(len / hop) chunks of `window` samples starting every `hop` samples;
// the tail is zero padded so the last chunk is full.
Chunks chunk(std::span<const double> samples, std::size_t window,
             std::size_t hop);

// Inverse of chunk() for non-overlapping windows (hop == window).
std::vector<double> reassemble(const std::vector<std::vector<double>>& chunks,
                               std::size_t hop, std::size_t pad_len);

}  // namespace segan::audio
