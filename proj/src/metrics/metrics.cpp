// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "common/error.hpp"

namespace segan::metrics {

namespace {

void require_comparable(const Waveform& clean, const Waveform& test) {
  if (clean.size() != test.size() || clean.sample_rate != test.sample_rate) {
    fail(ErrorCode::kLengthMismatch,
         "signals differ: " + std::to_string(clean.size()) + " samples at " +
             std::to_string(clean.sample_rate) + " Hz vs " + std::to_string(test.size()) +
             " samples at " + std::to_string(test.sample_rate) + " Hz");
  }
}

// a R a' for the symmetric Toeplitz matrix built from r.
double toeplitz_form(const std::vector<double>& a, const std::vector<double>& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) s += a[i] * a[j] * r[i > j ? i - j : j - i];
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string f; std::getline(ss, f, ',');) {
    f.erase(0, f.find_first_not_of(" \t\r"));
    f.erase(f.find_last_not_of(" \t\r") + 1);
    out.push_back(f);
  }
  return out;
}

}  // namespace

std::vector<double> ssnr_frames(const Waveform& clean, const Waveform& test,
                                const SsnrOptions& o) {
  require_comparable(clean, test);
  if (o.frame == 0) fail(ErrorCode::kInvalidArgument, "ssnr frame must be positive");
  if (clean.size() < o.frame) {
    fail(ErrorCode::kLengthMismatch, "signal shorter than one " + std::to_string(o.frame) +
                                         "-sample frame");
  }
  std::vector<double> out;
  for (std::size_t s = 0; s + o.frame <= clean.size(); s += o.frame) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = s; i < s + o.frame; ++i) {
      const double x = clean.samples[i];
      const double e = x - test.samples[i];
      num += x * x;
      den += e * e;
    }
    if (num < o.silence_energy) continue;
    const double v = 10.0 * std::log10(num / std::max(den, o.denominator_floor));
    out.push_back(std::clamp(v, o.floor_db, o.ceil_db));
  }
  return out;
}

double ssnr(const Waveform& clean, const Waveform& test, const SsnrOptions& options) {
  const auto frames = ssnr_frames(clean, test, options);
  if (frames.empty()) fail(ErrorCode::kAllFramesSilent, "every frame of the clean signal is silent");
  double s = 0.0;
  for (double v : frames) s += v;
  return s / static_cast<double>(frames.size());
}

std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag) {
  std::vector<double> r(max_lag + 1, 0.0);
  for (std::size_t k = 0; k <= max_lag && k < x.size(); ++k)
    for (std::size_t n = 0; n + k < x.size(); ++n) r[k] += x[n] * x[n + k];
  return r;
}

LpcResult levinson(std::span<const double> r, std::size_t order) {
  if (r.size() < order + 1) {
    fail(ErrorCode::kInvalidArgument, "levinson needs " + std::to_string(order + 1) + " lags");
  }
  LpcResult out;
  out.a.assign(order + 1, 0.0);
  out.a[0] = 1.0;
  double err = r[0];
  if (!(err > 0.0)) fail(ErrorCode::kNumerical, "levinson: zero-energy autocorrelation");
  std::vector<double> prev(order + 1);
  for (std::size_t i = 1; i <= order; ++i) {
    double acc = r[i];
    for (std::size_t j = 1; j < i; ++j) acc += out.a[j] * r[i - j];
    const double k = -acc / err;
    prev = out.a;
    for (std::size_t j = 1; j < i; ++j) out.a[j] = prev[j] + k * prev[i - j];
    out.a[i] = k;
    err *= 1.0 - k * k;
    if (!(err > 0.0)) {
      fail(ErrorCode::kNumerical, "levinson: nonpositive prediction error at order " + std::to_string(i));
    }
  }
  out.error = err;
  return out;
}

double llr(const Waveform& clean, const Waveform& test, const LlrOptions& o) {
  require_comparable(clean, test);
  if (o.frame == 0 || o.hop == 0) fail(ErrorCode::kInvalidArgument, "llr frame and hop must be positive");
  if (clean.size() < o.frame) {
    fail(ErrorCode::kLengthMismatch, "signal shorter than one " + std::to_string(o.frame) +
                                         "-sample frame");
  }
  std::vector<double> window(o.frame);
  for (std::size_t n = 0; n < o.frame; ++n) {
    window[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(n + 1) /
                                      static_cast<double>(o.frame + 1)));
  }
  std::vector<double> values, xc(o.frame), xt(o.frame);
  for (std::size_t s = 0; s + o.frame <= clean.size(); s += o.hop) {
    for (std::size_t n = 0; n < o.frame; ++n) {
      xc[n] = clean.samples[s + n] * window[n];
      xt[n] = test.samples[s + n] * window[n];
    }
    const auto rc = autocorrelation(xc, o.order);
    const auto rt = autocorrelation(xt, o.order);
    const auto ac = levinson(rc, o.order).a;
    const auto at = levinson(rt, o.order).a;
    values.push_back(std::log(toeplitz_form(at, rc) / toeplitz_form(ac, rc)));
  }
  std::sort(values.begin(), values.end());
  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(o.keep_fraction * static_cast<double>(values.size()))));
  double sum = 0.0;
  for (std::size_t i = 0; i < keep; ++i) sum += values[i];
  return sum / static_cast<double>(keep);
}

std::vector<Rating> read_ratings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kNotFound, "cannot open ratings file " + path.string());
  std::vector<Rating> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = split_csv(line);
    if (f.empty() || (f.size() == 1 && f[0].empty()) || f[0].starts_with('#')) continue;
    if (lineno == 1 && f[0] == "listener") continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (f.size() != 4) fail(ErrorCode::kInvalidArgument, where + ": expected 4 fields");
    Rating r{f[0], f[1], f[2], 0};
    std::size_t used = 0;
    try {
      r.score = std::stoi(f[3], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != f[3].size()) {
      fail(ErrorCode::kInvalidArgument, where + ": score must be an integer, got '" + f[3] + "'");
    }
    out.push_back(std::move(r));
  }
  return out;
}

MosSummary aggregate_mos(const std::vector<Rating>& table) {
  using Item = std::pair<std::string, std::string>;
  std::map<Item, std::map<std::string, int>> items;
  std::map<std::string, std::pair<double, std::size_t>> totals;
  const std::set<std::string> systems(std::begin(kSystems), std::end(kSystems));
  for (const Rating& r : table) {
    if (!systems.contains(r.system)) {
      fail(ErrorCode::kInvalidArgument, "unknown system '" + r.system + "'");
    }
    if (r.score < 1 || r.score > 5) {
      fail(ErrorCode::kInvalidArgument, "score out of range 1..5: " + std::to_string(r.score));
    }
    if (!items[{r.listener, r.sentence}].emplace(r.system, r.score).second) {
      fail(ErrorCode::kInvalidArgument, "duplicate rating for listener " + r.listener +
                                            ", sentence " + r.sentence + ", system " + r.system);
    }
    totals[r.system].first += r.score;
    ++totals[r.system].second;
  }
  if (items.empty()) fail(ErrorCode::kIncompleteTriplet, "ratings table is empty");
  for (const auto& [item, scores] : items) {
    if (scores.size() != systems.size()) {
      fail(ErrorCode::kIncompleteTriplet, "listener " + item.first + ", sentence " + item.second +
                                              " is missing a system");
    }
  }
  MosSummary out;
  out.items = items.size();
  for (const auto& [system, t] : totals) out.mos[system] = t.first / static_cast<double>(t.second);
  const std::pair<const char*, const char*> pairs[] = {
      {"segan", "noisy"}, {"segan", "wiener"}, {"wiener", "noisy"}};
  const double n = static_cast<double>(items.size());
  for (const auto& [a, b] : pairs) {
    CmosSummary c{a, b};
    for (const auto& [item, scores] : items) {
      const int d = scores.at(a) - scores.at(b);
      c.cmos += d;
      (d > 0 ? c.prefer_a : d < 0 ? c.prefer_b : c.no_preference) += 1.0;
    }
    c.cmos /= n;
    c.prefer_a /= n;
    c.prefer_b /= n;
    c.no_preference /= n;
    out.comparisons.push_back(c);
  }
  return out;
}

std::map<std::string, double> MetricReport::aggregate() const {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& f : files)
    for (const auto& [metric, v] : f.values) {
      acc[metric].first += v;
      ++acc[metric].second;
    }
  std::map<std::string, double> out;
  for (const auto& [metric, a] : acc) out[metric] = a.first / static_cast<double>(a.second);
  return out;
}

void write_report(const MetricReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << "file,metric,value\n";
  char num[64];
  auto row = [&](const std::string& file, const std::string& metric, double v) {
    std::snprintf(num, sizeof num, "%.6f", v);
    out << file << ',' << metric << ',' << num << '\n';
  };
  for (const auto& f : report.files)
    for (const auto& [metric, v] : f.values) row(f.file, metric, v);
  for (const auto& [metric, v] : report.aggregate()) row("ALL", metric, v);
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

}  // namespace segan::metrics
