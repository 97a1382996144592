// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "wiener/wiener.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "common/error.hpp"

namespace segan::wiener {

namespace {

// FFTW's planner is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// One-frame real transform pair with private buffers. FFTW_ESTIMATE keeps the
// chosen algorithm, and so the rounding, identical from run to run.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    real_ = fftw_alloc_real(n);
    spec_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard lock(planner_mutex());
    const int size = static_cast<int>(n);
    forward_ = fftw_plan_dft_r2c_1d(size, real_, spec_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(size, spec_, real_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
    fftw_free(real_);
    fftw_free(spec_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  void forward(const double* in, std::complex<double>* out) {
    std::copy(in, in + n_, real_);
    fftw_execute(forward_);
    for (std::size_t k = 0; k <= n_ / 2; ++k) out[k] = {spec_[k][0], spec_[k][1]};
  }

  // Normalized inverse: forward followed by inverse is the identity.
  void inverse(const std::complex<double>* in, double* out) {
    for (std::size_t k = 0; k <= n_ / 2; ++k) {
      spec_[k][0] = in[k].real();
      spec_[k][1] = in[k].imag();
    }
    fftw_execute(inverse_);
    const double s = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = real_[i] * s;
  }

 private:
  std::size_t n_;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

std::size_t frame_count(std::size_t len, std::size_t frame, std::size_t hop) {
  return 1 + (len - frame + hop - 1) / hop;
}

}  // namespace

std::vector<double> hamming(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

Spectrogram stft(const Waveform& w, std::size_t frame, std::size_t hop) {
  if (frame < 2 || hop == 0 || hop > frame) {
    fail(ErrorCode::kInvalidArgument, "stft needs frame >= 2 and 0 < hop <= frame");
  }
  if (w.size() < frame) {
    fail(ErrorCode::kTooShort, "signal of " + std::to_string(w.size()) +
                                   " samples is shorter than one " + std::to_string(frame) +
                                   "-sample frame");
  }
  Spectrogram s;
  s.frame_length = frame;
  s.hop = hop;
  s.signal_length = w.size();
  s.sample_rate = w.sample_rate;
  const auto win = hamming(frame);
  const std::size_t n = frame_count(w.size(), frame, hop);
  RealFft fft(frame);
  std::vector<double> buf(frame);
  s.frames.assign(n, std::vector<std::complex<double>>(s.bins()));
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t i = 0; i < frame; ++i) {
      const std::size_t at = t * hop + i;
      buf[i] = at < w.size() ? w.samples[at] * win[i] : 0.0;
    }
    fft.forward(buf.data(), s.frames[t].data());
  }
  return s;
}

Waveform istft(const Spectrogram& s) {
  const std::size_t frame = s.frame_length;
  if (frame < 2 || s.hop == 0 || s.hop > frame) {
    fail(ErrorCode::kInconsistentShape, "spectrogram frame/hop are inconsistent");
  }
  for (const auto& f : s.frames) {
    if (f.size() != s.bins()) {
      fail(ErrorCode::kInconsistentShape, "frame with " + std::to_string(f.size()) +
                                              " bins, expected " + std::to_string(s.bins()));
    }
  }
  const std::size_t span = s.frames.empty() ? 0 : (s.frames.size() - 1) * s.hop + frame;
  if (s.signal_length > span) {
    fail(ErrorCode::kInconsistentShape, "frames do not cover the signal length");
  }
  const auto win = hamming(frame);
  std::vector<double> acc(span, 0.0), norm(span, 0.0), buf(frame);
  RealFft fft(frame);
  for (std::size_t t = 0; t < s.frames.size(); ++t) {
    fft.inverse(s.frames[t].data(), buf.data());
    for (std::size_t i = 0; i < frame; ++i) {
      acc[t * s.hop + i] += buf[i] * win[i];
      norm[t * s.hop + i] += win[i] * win[i];
    }
  }
  Waveform out{std::vector<double>(s.signal_length), s.sample_rate};
  for (std::size_t i = 0; i < s.signal_length; ++i) {
    out.samples[i] = norm[i] > 0.0 ? acc[i] / norm[i] : 0.0;
  }
  return out;
}

std::vector<std::vector<double>> wiener_gains(const Spectrogram& y, const WienerOptions& o) {
  if (!(o.alpha >= 0.0 && o.alpha < 1.0)) fail(ErrorCode::kInvalidArgument, "alpha must be in [0, 1)");
  if (o.noise_frames == 0) fail(ErrorCode::kInvalidArgument, "noise_frames must be positive");
  if (y.frames.size() < o.noise_frames) {
    fail(ErrorCode::kTooShort, "fewer frames than the " + std::to_string(o.noise_frames) +
                                   " leading noise frames");
  }
  constexpr double kPowerFloor = 1e-10;
  const std::size_t bins = y.bins();
  const double floor_gain = std::pow(10.0, o.gain_floor_db / 20.0);

  std::vector<double> lambda(bins, 0.0);
  for (std::size_t t = 0; t < o.noise_frames; ++t)
    for (std::size_t k = 0; k < bins; ++k) lambda[k] += std::norm(y.frames[t][k]);
  for (double& l : lambda) l = std::max(l / static_cast<double>(o.noise_frames), kPowerFloor);

  std::vector<std::vector<double>> gains(y.frames.size(), std::vector<double>(bins));
  std::vector<double> prev(bins, 1.0);  // H_prev^2 * gamma_prev
  for (std::size_t t = 0; t < y.frames.size(); ++t) {
    for (std::size_t k = 0; k < bins; ++k) {
      const double gamma = std::norm(y.frames[t][k]) / lambda[k];
      const double xi = o.alpha * prev[k] + (1.0 - o.alpha) * std::max(gamma - 1.0, 0.0);
      const double h = std::max(xi / (1.0 + xi), floor_gain);
      gains[t][k] = h;
      prev[k] = h * h * gamma;
    }
  }
  return gains;
}

Waveform enhance_wiener(const Waveform& noisy, const WienerOptions& o) {
  if (noisy.sample_rate != audio::kModelRate) {
    fail(ErrorCode::kWrongRate, "Wiener baseline expects 16000 Hz, got " +
                                    std::to_string(noisy.sample_rate));
  }
  if (noisy.size() <= o.noise_frames * o.hop || noisy.size() < o.frame) {
    fail(ErrorCode::kTooShort, "input must be longer than the leading noise segment");
  }
  Spectrogram s = stft(noisy, o.frame, o.hop);
  const auto gains = wiener_gains(s, o);
  for (std::size_t t = 0; t < s.frames.size(); ++t)
    for (std::size_t k = 0; k < s.bins(); ++k) s.frames[t][k] *= gains[t][k];
  return istft(s);
}

}  // namespace segan::wiener
