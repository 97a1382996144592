// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "audio/audio_io.hpp"

namespace segan::metrics {

using audio::Waveform;

struct SsnrOptions {
  std::size_t frame = 512;
  double floor_db = -10.0;
  double ceil_db = 35.0;
  double silence_energy = 1e-8;  // frames of lower clean energy are skipped
  double denominator_floor = 1e-12;
};

// Mean over non-overlapping frames of the clamped per-frame
// 10 log10(sum clean^2 / sum (clean - test)^2). A trailing partial frame is
// ignored. Throws LengthMismatch, AllFramesSilent.
double ssnr(const Waveform& clean, const Waveform& test, const SsnrOptions& options = {});

// Per-frame values before averaging (skipped frames omitted).
std::vector<double> ssnr_frames(const Waveform& clean, const Waveform& test,
                                const SsnrOptions& options = {});

struct LpcResult {
  std::vector<double> a;  // a[0] = 1; A(z) = sum a_k z^-k
  double error = 0.0;     // final prediction error power
};

// Levinson-Durbin recursion on autocorrelation r[0..order]. Throws
// NumericalError when a prediction error is not positive.
LpcResult levinson(std::span<const double> r, std::size_t order);

// Biased autocorrelation r[k] = sum_n x[n] x[n + k], k = 0..max_lag.
std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag);

struct LlrOptions {
  std::size_t order = 16;
  std::size_t frame = 480;  // 30 ms at 16 kHz
  std::size_t hop = 120;    // 7.5 ms
  double keep_fraction = 0.95;
};

// Log-likelihood ratio between the LPC envelopes of clean and test frames
// (Hanning windowed): log(a_t R_c a_t' / a_c R_c a_c'), averaged over the
// smallest keep_fraction of frames.
double llr(const Waveform& clean, const Waveform& test, const LlrOptions& options = {});

// ---------------------------------------------------------------- ratings

inline constexpr const char* kSystems[] = {"noisy", "wiener", "segan"};

struct Rating {
  std::string listener;
  std::string sentence;
  std::string system;
  int score = 0;
};

// CSV with header listener,sentence,system,score. Scores are integers 1..5.
std::vector<Rating> read_ratings(const std::filesystem::path& path);

struct CmosSummary {
  std::string a, b;
  double cmos = 0.0;       // mean of score_a - score_b
  double prefer_a = 0.0;   // fraction of items with score_a > score_b
  double prefer_b = 0.0;
  double no_preference = 0.0;
};

struct MosSummary {
  std::map<std::string, double> mos;
  std::vector<CmosSummary> comparisons;  // (segan, noisy), (segan, wiener), (wiener, noisy)
  std::size_t items = 0;                  // rated (listener, sentence) triples
};

// Throws IncompleteTriplet when a (listener, sentence) lacks one of the
// three systems, InvalidArgument on duplicates or invalid scores.
MosSummary aggregate_mos(const std::vector<Rating>& table);

// ----------------------------------------------------------------- report

struct FileScores {
  std::string file;
  std::map<std::string, double> values;
};

struct MetricReport {
  std::vector<FileScores> files;

  // Mean of each metric over the files that report it.
  std::map<std::string, double> aggregate() const;
};

// CSV file,metric,value; the aggregate rows use the file name "ALL".
void write_report(const MetricReport& report, const std::filesystem::path& path);

}  // namespace segan::metrics
