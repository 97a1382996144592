// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace segan::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw ConfigError("invalid value for " + key + ": '" + text + "'");
  }
  return v;
}

}  // namespace

const char* to_string(Source s) noexcept {
  switch (s) {
    case Source::kDefault:
      return "default";
    case Source::kFile:
      return "file";
    case Source::kFlag:
      return "flag";
  }
  return "?";
}

void RunConfig::declare(const std::string& key, const std::string& default_value,
                        const std::string& help) {
  if (!entries_.emplace(key, Entry{default_value, help, {}, {}, Source::kDefault}).second) {
    throw ConfigError("duplicate declaration of " + key);
  }
}

const RunConfig::Entry& RunConfig::entry(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

RunConfig::Entry& RunConfig::entry(const std::string& key) {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

const std::string& RunConfig::help(const std::string& key) const { return entry(key).help; }

const std::string& RunConfig::default_value(const std::string& key) const {
  return entry(key).default_value;
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  load_string(ss.str(), path.string());
}

void RunConfig::load_string(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (!has(key)) throw ConfigError(where + ": unknown config key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + ": duplicate key '" + key + "'");
    Entry& e = entry(key);
    e.file_value = trim(line.substr(eq + 1));
    if (e.source != Source::kFlag) e.source = Source::kFile;
  }
}

void RunConfig::set_flag(const std::string& key, const std::string& value) {
  Entry& e = entry(key);
  e.flag_value = value;
  e.source = Source::kFlag;
}

const std::string& RunConfig::get(const std::string& key) const {
  const Entry& e = entry(key);
  switch (e.source) {
    case Source::kFlag:
      return e.flag_value;
    case Source::kFile:
      return e.file_value;
    default:
      return e.default_value;
  }
}

Source RunConfig::source(const std::string& key) const { return entry(key).source; }

double RunConfig::get_double(const std::string& key) const {
  const double v = parse_number<double>(key, get(key));
  if (!std::isfinite(v)) throw ConfigError("invalid value for " + key + ": not finite");
  return v;
}

std::size_t RunConfig::get_size(const std::string& key) const {
  return parse_number<std::size_t>(key, get(key));
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  return parse_number<std::uint64_t>(key, get(key));
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("invalid boolean for " + key + ": '" + v + "'");
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
  std::vector<std::string> out;
  std::stringstream ss(get(key));
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty list item in " + key);
    out.push_back(item);
  }
  return out;
}

std::vector<std::size_t> RunConfig::get_size_list(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& s : get_list(key)) out.push_back(parse_number<std::size_t>(key, s));
  return out;
}

std::vector<double> RunConfig::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : get_list(key)) out.push_back(parse_number<double>(key, s));
  return out;
}

void RunConfig::dump(std::ostream& out, const std::vector<std::string>& sections) const {
  for (const auto& [key, e] : entries_) {
    if (!sections.empty()) {
      const std::string section = key.substr(0, key.find('.'));
      if (std::find(sections.begin(), sections.end(), section) == sections.end()) continue;
    }
    out << key << " = " << get(key) << " (" << to_string(e.source) << ")\n";
  }
}

std::vector<std::string> RunConfig::keys() const {
  std::vector<std::string> out;
  for (const auto& [key, e] : entries_) out.push_back(key);
  return out;
}

RunConfig default_run_config() {
  RunConfig c;
  c.declare("model.window", "16384", "samples per generator window");
  c.declare("model.filter_width", "31", "convolution kernel width");
  c.declare("model.stride", "2", "convolution stride");
  c.declare("model.enc_channels", "16,32,32,64,64,128,128,256,256,512,1024",
            "encoder output channels, comma separated");
  c.declare("model.z_channels", "1024", "latent channels concatenated at the bottleneck");
  c.declare("model.seed", "1", "weight initialization seed");

  c.declare("data.manifest", "", "manifest TSV; empty trains on the synth.* corpus");
  c.declare("data.hop", "0", "training window hop in samples; 0 means half a window");
  c.declare("data.seed", "1", "seed for manifest entries with synthesized noise");

  c.declare("synth.utterances", "16", "number of synthetic utterances");
  c.declare("synth.duration_s", "1.0", "utterance duration in seconds");
  c.declare("synth.seed", "1", "corpus seed");
  c.declare("synth.noise", "white,pink,tonal_hum,modulated_burst", "noise kinds, comma separated");
  c.declare("synth.snrs", "0,5,10,15", "mixing SNRs in dB, comma separated");
  c.declare("synth.test_count", "0", "trailing utterances marked as the test split");
  c.declare("synth.out", "", "output directory");

  c.declare("train.epochs", "86", "passes over the training pairs");
  c.declare("train.lr", "0.0002", "RMSprop learning rate");
  c.declare("train.batch_size", "16", "pairs per update");
  c.declare("train.micro_batch", "16", "pairs per accumulated micro-batch");
  c.declare("train.lambda_l1", "100", "weight of the L1 term");
  c.declare("train.seed", "1", "shuffle and latent seed");
  c.declare("train.checkpoint_every", "0", "steps between checkpoints; 0 writes only the final one");
  c.declare("train.max_steps", "0", "stop after this many steps; 0 means no cap");
  c.declare("train.adversarial", "true", "false trains on the L1 term only");
  c.declare("train.shuffle", "true", "reshuffle pairs every epoch");
  c.declare("train.out", "run", "output directory for checkpoints and loss.csv");

  c.declare("enhance.checkpoint", "", "trained checkpoint");
  c.declare("enhance.in", "", "noisy WAV (16 or 48 kHz)");
  c.declare("enhance.out", "", "enhanced WAV");
  c.declare("enhance.z", "seeded", "latent at inference: seeded or zero");
  c.declare("enhance.seed", "0", "latent seed for the seeded mode");

  c.declare("wiener.in", "", "noisy 16 kHz WAV");
  c.declare("wiener.out", "", "enhanced WAV");
  c.declare("wiener.alpha", "0.98", "decision-directed smoothing");
  c.declare("wiener.noise_frames", "6", "leading frames used for the noise estimate");
  c.declare("wiener.gain_floor_db", "-25", "minimum gain in dB");
  c.declare("wiener.frame", "512", "STFT frame length");
  c.declare("wiener.hop", "256", "STFT hop");

  c.declare("eval.clean", "", "clean WAV or directory of WAVs");
  c.declare("eval.test", "", "test WAV or directory with the same file names");
  c.declare("eval.metric", "ssnr", "ssnr, llr or all");
  c.declare("eval.report", "", "optional CSV report path");

  c.declare("gradcheck.eps", "1e-5", "central difference step");
  c.declare("gradcheck.samples", "128", "coordinates sampled per op");
  c.declare("gradcheck.seed", "0", "sampling seed");
  c.declare("gradcheck.tolerance", "1e-4", "maximum relative error");

  c.declare("shapes.full", "false", "also print the bottleneck and decoder shapes");

  c.declare("mos.ratings", "", "ratings CSV listener,sentence,system,score");
  return c;
}

}  // namespace segan::cli
