// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cstdint>
#include <fstream>
#include <random>
#include <string>

#include "audio/audio_io.hpp"
#include "common/error.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace segan;
using namespace segan::audio;
using segan::testing::TempDir;

namespace {

// Minimal PCM header writer, independent of write_wav.
std::string wav_bytes(const std::vector<std::int16_t>& pcm, int rate, int channels = 1,
                      int bits = 16, int format = 1) {
  auto u32 = [](std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  auto u16 = [](std::string& s, std::uint16_t v) {
    s.push_back(static_cast<char>(v & 0xFF));
    s.push_back(static_cast<char>(v >> 8));
  };
  std::string s = "RIFF";
  u32(s, 36 + static_cast<std::uint32_t>(pcm.size() * 2));
  s += "WAVEfmt ";
  u32(s, 16);
  u16(s, static_cast<std::uint16_t>(format));
  u16(s, static_cast<std::uint16_t>(channels));
  u32(s, static_cast<std::uint32_t>(rate));
  u32(s, static_cast<std::uint32_t>(rate * channels * bits / 8));
  u16(s, static_cast<std::uint16_t>(channels * bits / 8));
  u16(s, static_cast<std::uint16_t>(bits));
  s += "data";
  u32(s, static_cast<std::uint32_t>(pcm.size() * 2));
  for (auto v : pcm) u16(s, static_cast<std::uint16_t>(v));
  return s;
}

void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary) << bytes;
}

std::vector<std::int16_t> pcm_of(const std::filesystem::path& p) {
  const auto bytes = segan::testing::read_bytes(p);
  std::vector<std::int16_t> out;
  for (std::size_t i = 44; i + 1 < bytes.size(); i += 2) {
    out.push_back(static_cast<std::int16_t>((static_cast<unsigned char>(bytes[i])) |
                                            (static_cast<unsigned char>(bytes[i + 1]) << 8)));
  }
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

}  // namespace

TEST_CASE("read_wav scales PCM by 1/32768") {
  TempDir dir;
  write_file(dir / "a.wav", wav_bytes({0, 16384, -32768}, 16000));
  const Waveform w = read_wav(dir / "a.wav");
  CHECK(w.sample_rate == 16000);
  REQUIRE(w.size() == 3);
  CHECK(w.samples[0] == 0.0);
  CHECK(w.samples[1] == 0.5);
  CHECK(w.samples[2] == -1.0);
}

TEST_CASE("read_wav of a header with zero frames is empty") {
  TempDir dir;
  write_file(dir / "empty.wav", wav_bytes({}, 48000));
  const Waveform w = read_wav(dir / "empty.wav");
  CHECK(w.empty());
  CHECK(w.sample_rate == 48000);
}

TEST_CASE("read_wav rejects unsupported files") {
  TempDir dir;
  write_file(dir / "stereo.wav", wav_bytes({0, 0}, 16000, 2));
  write_file(dir / "8bit.wav", wav_bytes({0}, 16000, 1, 8));
  write_file(dir / "float.wav", wav_bytes({0, 0}, 16000, 1, 16, 3));
  write_file(dir / "junk.wav", "not a wav file at all");
  CHECK(code_of([&] { read_wav(dir / "stereo.wav"); }) == ErrorCode::kUnsupportedFormat);
  CHECK(code_of([&] { read_wav(dir / "8bit.wav"); }) == ErrorCode::kUnsupportedFormat);
  CHECK(code_of([&] { read_wav(dir / "float.wav"); }) == ErrorCode::kUnsupportedFormat);
  CHECK(code_of([&] { read_wav(dir / "junk.wav"); }) == ErrorCode::kUnsupportedFormat);
  CHECK(code_of([&] { read_wav(dir / "missing.wav"); }) == ErrorCode::kNotFound);
}

TEST_CASE("read_wav skips unknown chunks") {
  TempDir dir;
  std::string bytes = wav_bytes({1234}, 16000);
  // Splice a LIST chunk between fmt and data.
  const std::string list = std::string("LIST") + std::string("\x03\0\0\0", 4) + "abc" + '\0';
  bytes.insert(36, list);
  write_file(dir / "list.wav", bytes);
  const Waveform w = read_wav(dir / "list.wav");
  REQUIRE(w.size() == 1);
  CHECK(w.samples[0] == 1234.0 / 32768.0);
}

TEST_CASE("write_wav quantizer") {
  TempDir dir;
  write_wav(Waveform{{1.0, 0.0, -1.0, 1.7, -3.0, 0.5}, 16000}, dir / "q.wav");
  const auto pcm = pcm_of(dir / "q.wav");
  REQUIRE(pcm.size() == 6);
  CHECK(pcm[0] == 32767);   // full scale clamps
  CHECK(pcm[1] == 0);
  CHECK(pcm[2] == -32768);
  CHECK(pcm[3] == 32767);   // clipped
  CHECK(pcm[4] == -32768);  // clipped
  CHECK(pcm[5] == 16384);
}

TEST_CASE("write_wav then read_wav is the identity on quantized signals") {
  TempDir dir;
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> pcm(-32768, 32767);
  for (int trial = 0; trial < 5; ++trial) {
    Waveform w;
    w.sample_rate = trial % 2 ? 48000 : 16000;
    w.samples.resize(1000 + 37 * trial);
    for (auto& s : w.samples) s = pcm(rng) / 32768.0;
    write_wav(w, dir / "rt.wav");
    const Waveform back = read_wav(dir / "rt.wav");
    CHECK(back.sample_rate == w.sample_rate);
    CHECK(back.samples == w.samples);
  }
}

TEST_CASE("preemphasis and deemphasis fixtures") {
  CHECK(preemphasis(Waveform{{1, 0, 0}, 16000}).samples == std::vector<double>{1, -0.95, 0});
  const auto step = preemphasis(Waveform{{1, 1, 1}, 16000}).samples;
  CHECK(step[0] == 1.0);
  CHECK(step[1] == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(step[2] == doctest::Approx(0.05).epsilon(1e-12));

  const auto imp = deemphasis(Waveform{{1, -0.95, 0}, 16000}).samples;
  CHECK(imp[0] == 1.0);
  CHECK(std::abs(imp[1]) < 1e-15);
  CHECK(std::abs(imp[2]) < 1e-15);
  const auto flat = deemphasis(Waveform{{1, 0.05, 0.05}, 16000}).samples;
  for (double v : flat) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("emphasis filters are mutual inverses") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Waveform x{segan::testing::gaussian(16000, seed), 16000};
    const auto a = deemphasis(preemphasis(x)).samples;
    const auto b = preemphasis(deemphasis(x)).samples;
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      worst = std::max({worst, std::abs(a[i] - x.samples[i]), std::abs(b[i] - x.samples[i])});
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("chunk arithmetic") {
  std::vector<double> x(16384, 1.0);
  auto c = chunk(x, 16384, 16384);
  CHECK(c.frames.size() == 1);
  CHECK(c.pad_len == 0);

  x.assign(24576, 1.0);
  c = chunk(x, 16384, 8192);
  // ceil(24576 / 8192) chunks; the last one runs past the end.
  REQUIRE(c.frames.size() == 3);
  CHECK(c.pad_len == 8192);
  CHECK(c.frames[1][0] == 1.0);
  CHECK(c.frames[2][8191] == 1.0);
  CHECK(c.frames[2][8192] == 0.0);

  x.assign(10, 1.0);
  c = chunk(x, 4, 4);
  CHECK(c.frames.size() == 3);
  CHECK(c.pad_len == 2);

  x.assign(16384, 1.0);
  c = chunk(x, 16384, 8192);
  CHECK(c.frames.size() == 2);
  CHECK(c.pad_len == 8192);

  CHECK(code_of([&] { chunk(x, 0, 1); }) == ErrorCode::kInvalidWindow);
  CHECK(code_of([&] { chunk(x, 4, 0); }) == ErrorCode::kInvalidWindow);
  CHECK(code_of([&] { chunk(x, 4, 5); }) == ErrorCode::kInvalidWindow);
}

TEST_CASE("reassemble fixtures") {
  CHECK(reassemble({{1, 2}, {3, 4}}, 2, 0) == std::vector<double>{1, 2, 3, 4});
  CHECK(reassemble({{1, 2}, {3, 0}}, 2, 1) == std::vector<double>{1, 2, 3});
  CHECK(code_of([] { reassemble({{1, 2, 3}}, 2, 0); }) == ErrorCode::kOverlapUnsupported);
}

TEST_CASE("chunk then reassemble is the identity") {
  for (std::size_t len : {1UL, 16383UL, 16384UL, 16385UL, 50000UL}) {
    const auto x = segan::testing::gaussian(len, len);
    const auto c = chunk(x, 16384, 16384);
    CHECK(reassemble(c.frames, 16384, c.pad_len) == x);
  }
}

TEST_CASE("resampler rejects other rates") {
  CHECK(code_of([] { resample_48k_to_16k(Waveform{{0.0}, 16000}); }) == ErrorCode::kWrongRate);
}

TEST_CASE("resampler DC gain and length") {
  const Waveform dc{std::vector<double>(300, 0.5), 48000};
  const Waveform out = resample_48k_to_16k(dc);
  CHECK(out.sample_rate == 16000);
  REQUIRE(out.size() == 100);
  // Interior: the 127-tap filter spans 21 output samples either side.
  for (std::size_t i = 22; i < 78; ++i) CHECK(std::abs(out.samples[i] - 0.5) < 1e-3);
  CHECK(resample_48k_to_16k(Waveform{std::vector<double>(301, 0.0), 48000}).size() == 101);

  double sum = 0.0;
  for (double h : decimation_filter()) sum += h;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("resampler passband and stopband, measured by RMS") {
  const std::size_t n = 48000;
  auto ratio = [&](double freq) {
    const Waveform in{segan::testing::sine(n, freq, 48000.0), 48000};
    const Waveform out = resample_48k_to_16k(in);
    // Skip the filter edges on both sides.
    return segan::testing::rms(out.samples, 200, out.size() - 200) /
           segan::testing::rms(in.samples, 600, n - 600);
  };
  CHECK(std::abs(ratio(1000.0) - 1.0) < 0.005);
  CHECK(ratio(20000.0) < 0.01);
  for (double f = 8500.0; f < 24000.0; f += 500.0) {
    CAPTURE(f);
    CHECK(20.0 * std::log10(ratio(f)) <= -40.0);
  }
}

TEST_CASE("resampled tone keeps its frequency") {
  const Waveform in{segan::testing::sine(48000, 1000.0, 48000.0), 48000};
  const Waveform out = resample_48k_to_16k(in);
  // Correlate against the expected 16 kHz tone (zero-phase filter, no delay).
  const auto ref = segan::testing::sine(out.size(), 1000.0, 16000.0);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 200; i < out.size() - 200; ++i) {
    num += out.samples[i] * ref[i];
    den += ref[i] * ref[i];
  }
  CHECK(num / den == doctest::Approx(1.0).epsilon(0.005));
}
