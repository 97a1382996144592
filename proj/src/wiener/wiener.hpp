// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <vector>

#include "audio/audio_io.hpp"

namespace segan::wiener {

using audio::Waveform;

enum class WindowKind { kHamming };

// Periodic Hamming window 0.54 - 0.46 cos(2 pi n / N); at hop N/2 its
// shifted copies sum to a constant.
std::vector<double> hamming(std::size_t n);

struct Spectrogram {
  std::vector<std::vector<std::complex<double>>> frames;  // n_frames x (frame/2 + 1)
  std::size_t frame_length = 512;
  std::size_t hop = 256;
  WindowKind window = WindowKind::kHamming;
  std::size_t signal_length = 0;
  int sample_rate = audio::kModelRate;

  std::size_t bins() const noexcept { return frame_length / 2 + 1; }
};

// Windowed real FFT of frames starting every `hop` samples; the last frame
// is zero padded. n_frames = 1 + ceil((len - frame) / hop). Throws TooShort.
Spectrogram stft(const Waveform& w, std::size_t frame = 512, std::size_t hop = 256);

// Weighted overlap-add with the analysis window, normalized by the summed
// squared window. Throws InconsistentShape.
Waveform istft(const Spectrogram& s);

struct WienerOptions {
  double alpha = 0.98;            // decision-directed smoothing
  std::size_t noise_frames = 6;   // leading frames used for the noise PSD
  double gain_floor_db = -25.0;
  std::size_t frame = 512;
  std::size_t hop = 256;
};

// Per-frame, per-bin Wiener gains H = xi / (1 + xi) with the decision-directed
// a-priori SNR xi = alpha * H_prev^2 * gamma_prev + (1 - alpha) * max(gamma - 1, 0),
// gamma = |Y|^2 / lambda and lambda the mean noise power of the leading
// frames. Before the first frame H_prev^2 * gamma_prev is taken as 1.
// Gains are floored at 10^(gain_floor_db / 20).
std::vector<std::vector<double>> wiener_gains(const Spectrogram& noisy, const WienerOptions& o = {});

// istft(H * Y), same length as the input. Throws TooShort, WrongRate.
Waveform enhance_wiener(const Waveform& noisy, const WienerOptions& o = {});

}  // namespace segan::wiener
