// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "audio/audio_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>

#include "common/error.hpp"

namespace segan::audio {

namespace {

constexpr std::size_t kFilterTaps = 127;
constexpr int kDecimation = 3;
constexpr double kCutoffOfOutputRate = 0.45;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

}  // namespace

void Waveform::validate() const {
  if (sample_rate <= 0) {
    fail(ErrorCode::kInvalidArgument,
         "sample rate must be positive, got " + std::to_string(sample_rate));
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) {
      fail(ErrorCode::kInvalidArgument,
           "non-finite sample at index " + std::to_string(i));
    }
  }
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorCode::kNotFound, "cannot open " + path.string());
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const auto bad = [&](const std::string& why) {
    fail(ErrorCode::kUnsupportedFormat, path.string() + ": " + why);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    bad("not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  int rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    const std::uint32_t size = read_u32(hdr + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16 || avail < 16) bad("truncated fmt chunk");
      const unsigned char* f = bytes.data() + body;
      std::uint16_t format = read_u16(f);
      const std::uint16_t channels = read_u16(f + 2);
      rate = static_cast<int>(read_u32(f + 4));
      const std::uint16_t bits = read_u16(f + 14);
      // WAVE_FORMAT_EXTENSIBLE carries the real format tag in its sub-format.
      if (format == 0xFFFE && size >= 40 && avail >= 26) {
        format = read_u16(f + 24);
      }
      if (format != 1) bad("only PCM is supported (format tag " + std::to_string(format) + ")");
      if (channels != 1) {
        bad(std::to_string(channels) + " channels; convert to mono first");
      }
      if (bits != 16) bad(std::to_string(bits) + "-bit samples; only 16-bit PCM is supported");
      if (rate <= 0) bad("invalid sample rate");
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (!have_fmt) bad("data chunk precedes fmt chunk");
      // Streaming writers may leave the size field unset; take what is there.
      const std::size_t n = std::min<std::size_t>(size, avail) / 2;
      Waveform w;
      w.sample_rate = rate;
      w.samples.resize(n);
      const unsigned char* d = bytes.data() + body;
      for (std::size_t i = 0; i < n; ++i) {
        const auto v = static_cast<std::int16_t>(read_u16(d + 2 * i));
        w.samples[i] = static_cast<double>(v) / 32768.0;
      }
      return w;
    }
    pos = body + size + (size & 1U);
  }
  bad(have_fmt ? "missing data chunk" : "missing fmt chunk");
}

std::int16_t quantize_sample(double x) noexcept {
  const double q = std::round(x * 32768.0);
  return static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0));
}

void write_wav(const Waveform& w, const std::filesystem::path& path) {
  if (w.sample_rate <= 0) {
    fail(ErrorCode::kInvalidArgument, "sample rate must be positive");
  }
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (double x : w.samples) {
    // NaN maps to silence instead of an unspecified integer conversion.
    const std::int16_t v = std::isnan(x) ? 0 : quantize_sample(x);
    put_u16(out, static_cast<std::uint16_t>(v));
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) fail(ErrorCode::kIo, "write failed: " + path.string());
}

std::vector<double> decimation_filter() {
  const double fc = kCutoffOfOutputRate * kModelRate / kSourceRate;  // cycles/sample
  const double mid = (kFilterTaps - 1) / 2.0;
  std::vector<double> h(kFilterTaps);
  double sum = 0.0;
  for (std::size_t n = 0; n < kFilterTaps; ++n) {
    const double t = static_cast<double>(n) - mid;
    const double sinc =
        t == 0.0 ? 2.0 * fc
                 : std::sin(2.0 * std::numbers::pi * fc * t) / (std::numbers::pi * t);
    const double hamming =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (kFilterTaps - 1));
    h[n] = sinc * hamming;
    sum += h[n];
  }
  for (double& v : h) v /= sum;
  return h;
}

Waveform resample_48k_to_16k(const Waveform& w) {
  if (w.sample_rate != kSourceRate) {
    fail(ErrorCode::kWrongRate,
         "expected 48000 Hz input, got " + std::to_string(w.sample_rate));
  }
  static const std::vector<double> h = decimation_filter();
  const auto half = static_cast<std::ptrdiff_t>(kFilterTaps / 2);
  const auto len = static_cast<std::ptrdiff_t>(w.samples.size());
  Waveform out;
  out.sample_rate = kModelRate;
  out.samples.resize(static_cast<std::size_t>((len + kDecimation - 1) / kDecimation));
  // Only every third output of the zero-phase filter is evaluated.
  for (std::size_t m = 0; m < out.samples.size(); ++m) {
    const auto centre = static_cast<std::ptrdiff_t>(m) * kDecimation;
    double acc = 0.0;
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(kFilterTaps); ++k) {
      const std::ptrdiff_t idx = centre + half - k;
      if (idx >= 0 && idx < len) acc += h[static_cast<std::size_t>(k)] * w.samples[static_cast<std::size_t>(idx)];
    }
    out.samples[m] = acc;
  }
  return out;
}

Waveform preemphasis(const Waveform& w, double coef) {
  Waveform out{std::vector<double>(w.samples.size()), w.sample_rate};
  for (std::size_t n = 0; n < w.samples.size(); ++n) {
    out.samples[n] = n == 0 ? w.samples[0] : w.samples[n] - coef * w.samples[n - 1];
  }
  return out;
}

Waveform deemphasis(const Waveform& w, double coef) {
  Waveform out{std::vector<double>(w.samples.size()), w.sample_rate};
  for (std::size_t n = 0; n < w.samples.size(); ++n) {
    out.samples[n] = n == 0 ? w.samples[0] : w.samples[n] + coef * out.samples[n - 1];
  }
  return out;
}

Chunks chunk(std::span<const double> samples, std::size_t window, std::size_t hop) {
  if (window == 0 || hop == 0 || hop > window) {
    fail(ErrorCode::kInvalidWindow, "need window > 0 and 0 < hop <= window (window=" +
                                        std::to_string(window) + ", hop=" +
                                        std::to_string(hop) + ")");
  }
  Chunks out;
  const std::size_t n = (samples.size() + hop - 1) / hop;
  if (n == 0) return out;
  const std::size_t padded = (n - 1) * hop + window;
  out.pad_len = padded - samples.size();
  out.frames.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> frame(window, 0.0);
    const std::size_t start = i * hop;
    const std::size_t stop = std::min(samples.size(), start + window);
    std::copy(samples.begin() + static_cast<std::ptrdiff_t>(start),
              samples.begin() + static_cast<std::ptrdiff_t>(stop), frame.begin());
    out.frames.push_back(std::move(frame));
  }
  return out;
}

std::vector<double> reassemble(const std::vector<std::vector<double>>& chunks,
                               std::size_t hop, std::size_t pad_len) {
  std::vector<double> out;
  out.reserve(chunks.size() * hop);
  for (const auto& c : chunks) {
    if (c.size() != hop) {
      fail(ErrorCode::kOverlapUnsupported,
           "reassembly needs hop == window (hop=" + std::to_string(hop) +
               ", window=" + std::to_string(c.size()) + ")");
    }
    out.insert(out.end(), c.begin(), c.end());
  }
  if (pad_len > out.size()) {
    fail(ErrorCode::kInvalidArgument, "pad length exceeds reassembled length");
  }
  out.resize(out.size() - pad_len);
  return out;
}

}  // namespace segan::audio
