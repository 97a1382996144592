// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Command-line front end. Talks to the library only through segan.h.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "run_config.hpp"
#include "segan/segan.h"

namespace fs = std::filesystem;
using segan::cli::ConfigError;
using segan::cli::RunConfig;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

// The published encoder dimensions at window 16384.
const char* const kPublishedLedger[] = {
    "16384x1", "8192x16", "4096x32", "2048x32", "1024x64", "512x64",
    "256x128", "128x128", "64x256",  "32x256",  "16x512",  "8x1024",
};

class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void check(segan_status s, const std::string& what) {
  if (s != SEGAN_OK) {
    throw RuntimeFailure(what + ": " + segan_status_name(s) + ": " + segan_last_error());
  }
}

// Shortest round-trip decimal, always with a fractional part ("35.0").
std::string format_value(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, ec == std::errc{} ? end : buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::string line;
  for (char c : text) {
    if (c == '\n') {
      out.push_back(line);
      line.clear();
    } else {
      line.push_back(c);
    }
  }
  if (!line.empty()) out.push_back(line);
  return out;
}

struct Binding {
  CLI::Option* option;
  std::string key;
};

// A subcommand whose flags feed dotted config keys.
struct Command {
  CLI::App* app = nullptr;
  std::vector<std::string> sections;
  std::vector<Binding> bindings;
  std::map<std::string, std::string> values;  // key -> raw flag text
  std::string config_file;
  std::function<int(const RunConfig&)> run;
};

void bind_key(Command& cmd, const RunConfig& defaults, const std::string& flag, const std::string& key) {
  const std::string& d = defaults.default_value(key);
  CLI::Option* o = cmd.app->add_option(
      flag, cmd.values[key],
      defaults.help(key) + " (" + key + (d.empty() ? "" : ", default " + d) + ")");
  cmd.bindings.push_back({o, key});
}

void bind_model(Command& cmd, const RunConfig& d) {
  bind_key(cmd, d, "--window", "model.window");
  bind_key(cmd, d, "--filter-width", "model.filter_width");
  bind_key(cmd, d, "--stride", "model.stride");
  bind_key(cmd, d, "--enc-channels", "model.enc_channels");
  bind_key(cmd, d, "--z-channels", "model.z_channels");
}

void bind_synth(Command& cmd, const RunConfig& d, const std::string& prefix) {
  bind_key(cmd, d, "--" + prefix + "utterances", "synth.utterances");
  bind_key(cmd, d, "--" + prefix + "duration", "synth.duration_s");
  bind_key(cmd, d, "--" + prefix + "seed", "synth.seed");
  bind_key(cmd, d, "--" + prefix + "noise", "synth.noise");
  bind_key(cmd, d, "--" + prefix + "snrs", "synth.snrs");
}

segan_model_config model_config(const RunConfig& c) {
  segan_model_config m;
  segan_model_config_default(&m);
  m.window = c.get_size("model.window");
  m.filter_width = c.get_size("model.filter_width");
  m.stride = c.get_size("model.stride");
  const auto ch = c.get_size_list("model.enc_channels");
  if (ch.size() > SEGAN_MAX_LAYERS) throw ConfigError("model.enc_channels lists too many layers");
  m.layers = ch.size();
  std::copy(ch.begin(), ch.end(), m.enc_channels);
  m.z_channels = c.get_size("model.z_channels");
  return m;
}

segan_synth_config synth_config(const RunConfig& c) {
  static const char* const kNoise[] = {"white", "pink", "tonal_hum", "modulated_burst"};
  segan_synth_config s;
  segan_synth_config_default(&s);
  s.utterances = c.get_size("synth.utterances");
  s.duration_s = c.get_double("synth.duration_s");
  s.seed = c.get_u64("synth.seed");
  s.noise_mask = 0;
  for (const auto& name : c.get_list("synth.noise")) {
    const auto it = std::find(std::begin(kNoise), std::end(kNoise), name);
    if (it == std::end(kNoise)) throw ConfigError("unknown noise kind '" + name + "'");
    s.noise_mask |= 1u << (it - std::begin(kNoise));
  }
  const auto snrs = c.get_double_list("synth.snrs");
  if (snrs.empty() || snrs.size() > 16) throw ConfigError("synth.snrs needs 1 to 16 values");
  s.n_snrs = snrs.size();
  std::copy(snrs.begin(), snrs.end(), s.snrs_db);
  return s;
}

std::string require_path(const RunConfig& c, const std::string& key) {
  const std::string& v = c.get(key);
  if (v.empty()) throw ConfigError(key + " is required");
  return v;
}

// ------------------------------------------------------------ subcommands

int run_synth(const RunConfig& c) {
  const auto s = synth_config(c);
  const std::string out = require_path(c, "synth.out");
  check(segan_synth_export(&s, out.c_str(), c.get_size("synth.test_count")), "synth-data");
  std::cout << (fs::path(out) / "manifest.tsv").string() << "\n";
  return kExitOk;
}

int run_train(const RunConfig& c) {
  const auto mc = model_config(c);
  std::size_t hop = c.get_size("data.hop");
  if (hop == 0) hop = std::max<std::size_t>(1, mc.window / 2);

  segan_dataset* data = nullptr;
  const std::string manifest = c.get("data.manifest");
  if (manifest.empty()) {
    const auto s = synth_config(c);
    check(segan_dataset_synth(&s, mc.window, hop, &data), "synthesizing training data");
  } else {
    check(segan_dataset_from_manifest(manifest.c_str(), 0, c.get_u64("data.seed"), mc.window, hop,
                                      &data),
          "loading " + manifest);
  }
  std::unique_ptr<segan_dataset, decltype(&segan_dataset_destroy)> data_owner(data, segan_dataset_destroy);
  std::cerr << "training pairs: " << segan_dataset_size(data) << "\n";

  segan_model* model = nullptr;
  check(segan_model_create(&mc, c.get_u64("model.seed"), &model), "building the model");
  std::unique_ptr<segan_model, decltype(&segan_model_destroy)> model_owner(model, segan_model_destroy);

  segan_train_config t;
  segan_train_config_default(&t);
  t.epochs = c.get_size("train.epochs");
  t.lr = c.get_double("train.lr");
  t.batch_size = c.get_size("train.batch_size");
  t.micro_batch = c.get_size("train.micro_batch");
  t.lambda_l1 = c.get_double("train.lambda_l1");
  t.seed = c.get_u64("train.seed");
  t.checkpoint_every = c.get_size("train.checkpoint_every");
  t.max_steps = c.get_size("train.max_steps");
  t.adversarial = c.get_bool("train.adversarial") ? 1 : 0;
  t.shuffle = c.get_bool("train.shuffle") ? 1 : 0;

  const std::string out = require_path(c, "train.out");
  segan_train_summary summary;
  check(segan_train(
            model, data, &t, out.c_str(),
            [](const char* line, void*) { std::cerr << line << "\n"; }, nullptr, &summary),
        "training");
  std::cout << "steps " << summary.steps << "\n"
            << "first_g_l1 " << format_value(summary.first_g_l1) << "\n"
            << "last_g_l1 " << format_value(summary.last_g_l1) << "\n"
            << "last_g_adv " << format_value(summary.last_g_adv) << "\n"
            << "last_d_real " << format_value(summary.last_d_real) << "\n"
            << "last_d_fake " << format_value(summary.last_d_fake) << "\n"
            << "checkpoint " << (fs::path(out) / "final.sgn").string() << "\n";
  return kExitOk;
}

int run_enhance(const RunConfig& c) {
  const std::string z = c.get("enhance.z");
  if (z != "seeded" && z != "zero") throw ConfigError("enhance.z must be seeded or zero");
  check(segan_enhance_file(require_path(c, "enhance.checkpoint").c_str(),
                           require_path(c, "enhance.in").c_str(),
                           require_path(c, "enhance.out").c_str(),
                           z == "zero" ? SEGAN_Z_ZERO : SEGAN_Z_SEEDED, c.get_u64("enhance.seed")),
        "enhance");
  return kExitOk;
}

int run_wiener(const RunConfig& c) {
  segan_wiener_options o;
  segan_wiener_options_default(&o);
  o.alpha = c.get_double("wiener.alpha");
  o.noise_frames = c.get_size("wiener.noise_frames");
  o.gain_floor_db = c.get_double("wiener.gain_floor_db");
  o.frame = c.get_size("wiener.frame");
  o.hop = c.get_size("wiener.hop");
  check(segan_wiener_file(require_path(c, "wiener.in").c_str(), require_path(c, "wiener.out").c_str(),
                          &o),
        "enhance-wiener");
  return kExitOk;
}

int run_eval(const RunConfig& c) {
  const std::string metric = c.get("eval.metric");
  std::vector<std::pair<std::string, segan_metric>> metrics;
  if (metric == "ssnr" || metric == "all") metrics.emplace_back("ssnr", SEGAN_METRIC_SSNR);
  if (metric == "llr" || metric == "all") metrics.emplace_back("llr", SEGAN_METRIC_LLR);
  if (metrics.empty()) throw ConfigError("eval.metric must be ssnr, llr or all");

  const fs::path clean = require_path(c, "eval.clean");
  const fs::path test = require_path(c, "eval.test");
  std::vector<std::pair<fs::path, fs::path>> files;
  if (fs::is_directory(clean)) {
    if (!fs::is_directory(test)) throw ConfigError("eval.test must be a directory when eval.clean is");
    for (const auto& e : fs::directory_iterator(clean))
      if (e.path().extension() == ".wav") files.emplace_back(e.path(), test / e.path().filename());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw RuntimeFailure("no .wav files in " + clean.string());
  } else {
    files.emplace_back(clean, test);
  }

  segan_report* report = nullptr;
  check(segan_report_create(&report), "report");
  std::unique_ptr<segan_report, decltype(&segan_report_destroy)> owner(report, segan_report_destroy);
  const bool single = files.size() == 1 && metrics.size() == 1;
  for (const auto& [cp, tp] : files) {
    for (const auto& [name, m] : metrics) {
      double v = 0.0;
      check(segan_eval_files(cp.c_str(), tp.c_str(), m, &v), name + " of " + tp.string());
      check(segan_report_add(report, cp.filename().c_str(), name.c_str(), v), "report");
      if (single) {
        std::cout << format_value(v) << "\n";
      } else {
        std::cout << cp.filename().string() << " " << name << " " << format_value(v) << "\n";
      }
    }
  }
  if (!single) {
    for (const auto& [name, m] : metrics) {
      double v = 0.0;
      check(segan_report_aggregate(report, name.c_str(), &v), "report");
      std::cout << "ALL " << name << " " << format_value(v) << "\n";
    }
  }
  if (!c.get("eval.report").empty()) check(segan_report_write(report, c.get("eval.report").c_str()), "report");
  return kExitOk;
}

int run_gradcheck(const RunConfig& c) {
  const double tol = c.get_double("gradcheck.tolerance");
  std::size_t count = 0;
  std::vector<segan_gradcheck_entry> entries(32);
  check(segan_gradcheck(c.get_double("gradcheck.eps"), c.get_size("gradcheck.samples"),
                        c.get_u64("gradcheck.seed"), entries.data(), entries.size(), &count),
        "gradcheck");
  entries.resize(std::min(count, entries.size()));
  bool ok = true;
  for (const auto& e : entries) {
    const bool pass = e.max_rel_error < tol;
    ok = ok && pass;
    char line[128];
    std::snprintf(line, sizeof line, "%-20s max_rel_error %.3e coordinates %zu %s", e.name,
                  e.max_rel_error, e.coordinates, pass ? "PASS" : "FAIL");
    std::cout << line << "\n";
  }
  return ok ? kExitOk : kExitRuntime;
}

int run_shapes(const RunConfig& c) {
  const auto mc = model_config(c);
  char* text = nullptr;
  check(segan_encoder_ledger(&mc, &text), "shapes");
  const auto lines = split_lines(text);
  segan_string_free(text);
  for (const auto& l : lines) std::cout << l << "\n";
  if (c.get_bool("shapes.full")) {
    check(segan_full_ledger(&mc, &text), "shapes");
    std::cout << text;
    segan_string_free(text);
  }
  std::size_t diffs = 0;
  const std::size_t n = std::size(kPublishedLedger);
  for (std::size_t i = 0; i < std::max(n, lines.size()); ++i) {
    const std::string want = i < n ? kPublishedLedger[i] : "-";
    const std::string got = i < lines.size() ? lines[i] : "-";
    if (want != got) {
      std::cerr << "ledger line " << i << ": " << got << " (published " << want << ")\n";
      ++diffs;
    }
  }
  std::cerr << (diffs == 0 ? "encoder ledger matches the published dimensions\n"
                           : "encoder ledger differs from the published dimensions in " +
                                 std::to_string(diffs) + " lines\n");
  return kExitOk;
}

int run_mos(const RunConfig& c) {
  segan_mos_summary s;
  check(segan_mos_file(require_path(c, "mos.ratings").c_str(), &s), "mos");
  char line[160];
  std::cout << "items " << s.items << "\n";
  std::snprintf(line, sizeof line, "MOS noisy %.2f wiener %.2f segan %.2f\n", s.mos_noisy,
                s.mos_wiener, s.mos_segan);
  std::cout << line;
  for (const auto& cm : s.comparisons) {
    std::snprintf(line, sizeof line,
                  "CMOS %s vs %s %+.3f prefer %s %.1f%% prefer %s %.1f%% no preference %.1f%%\n",
                  cm.a, cm.b, cm.cmos, cm.a, 100.0 * cm.prefer_a, cm.b, 100.0 * cm.prefer_b,
                  100.0 * cm.no_preference);
    std::cout << line;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  const RunConfig defaults = segan::cli::default_run_config();
  CLI::App app{"Speech enhancement with a raw-waveform GAN and a Wiener baseline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", segan_version());

  std::vector<Command> commands(8);
  auto make = [&](std::size_t i, const char* name, const char* desc,
                  std::vector<std::string> sections, std::function<int(const RunConfig&)> run) {
    Command& cmd = commands[i];
    cmd.app = app.add_subcommand(name, desc);
    cmd.sections = std::move(sections);
    cmd.run = std::move(run);
    cmd.app->add_option("--config", cmd.config_file, "key=value config file (flags override it)")
        ->check(CLI::ExistingFile);
    return &cmd;
  };

  Command* synth = make(0, "synth-data", "Write a synthetic clean/noise/noisy corpus and manifest",
                        {"synth"}, run_synth);
  bind_synth(*synth, defaults, "");
  bind_key(*synth, defaults, "--test-count", "synth.test_count");
  bind_key(*synth, defaults, "--out", "synth.out");

  Command* train = make(1, "train", "Train the generator and discriminator",
                        {"model", "data", "synth", "train"}, run_train);
  bind_model(*train, defaults);
  bind_key(*train, defaults, "--model-seed", "model.seed");
  bind_key(*train, defaults, "--manifest", "data.manifest");
  bind_key(*train, defaults, "--hop", "data.hop");
  bind_key(*train, defaults, "--data-seed", "data.seed");
  bind_synth(*train, defaults, "synth-");
  bind_key(*train, defaults, "--epochs", "train.epochs");
  bind_key(*train, defaults, "--lr", "train.lr");
  bind_key(*train, defaults, "--batch-size", "train.batch_size");
  bind_key(*train, defaults, "--micro-batch", "train.micro_batch");
  bind_key(*train, defaults, "--lambda-l1", "train.lambda_l1");
  bind_key(*train, defaults, "--seed", "train.seed");
  bind_key(*train, defaults, "--checkpoint-every", "train.checkpoint_every");
  bind_key(*train, defaults, "--max-steps", "train.max_steps");
  bind_key(*train, defaults, "--adversarial", "train.adversarial");
  bind_key(*train, defaults, "--shuffle", "train.shuffle");
  bind_key(*train, defaults, "--out", "train.out");

  Command* enhance = make(2, "enhance", "Enhance a WAV file with a trained generator", {"enhance"},
                          run_enhance);
  bind_key(*enhance, defaults, "--checkpoint", "enhance.checkpoint");
  bind_key(*enhance, defaults, "--in", "enhance.in");
  bind_key(*enhance, defaults, "--out", "enhance.out");
  bind_key(*enhance, defaults, "--z", "enhance.z");
  bind_key(*enhance, defaults, "--seed", "enhance.seed");

  Command* wiener = make(3, "enhance-wiener", "Enhance a WAV file with the Wiener baseline",
                         {"wiener"}, run_wiener);
  bind_key(*wiener, defaults, "--in", "wiener.in");
  bind_key(*wiener, defaults, "--out", "wiener.out");
  bind_key(*wiener, defaults, "--alpha", "wiener.alpha");
  bind_key(*wiener, defaults, "--noise-frames", "wiener.noise_frames");
  bind_key(*wiener, defaults, "--gain-floor-db", "wiener.gain_floor_db");
  bind_key(*wiener, defaults, "--frame", "wiener.frame");
  bind_key(*wiener, defaults, "--hop", "wiener.hop");

  Command* eval = make(4, "eval", "Score test audio against clean references", {"eval"}, run_eval);
  bind_key(*eval, defaults, "--clean", "eval.clean");
  bind_key(*eval, defaults, "--test", "eval.test");
  bind_key(*eval, defaults, "--metric", "eval.metric");
  bind_key(*eval, defaults, "--report", "eval.report");

  Command* grad = make(5, "gradcheck", "Finite-difference check of every differentiable op",
                       {"gradcheck"}, run_gradcheck);
  bind_key(*grad, defaults, "--eps", "gradcheck.eps");
  bind_key(*grad, defaults, "--samples", "gradcheck.samples");
  bind_key(*grad, defaults, "--seed", "gradcheck.seed");
  bind_key(*grad, defaults, "--tolerance", "gradcheck.tolerance");

  Command* shapes = make(6, "shapes", "Print the generator's encoder shape ledger",
                         {"model", "shapes"}, run_shapes);
  bind_model(*shapes, defaults);
  bind_key(*shapes, defaults, "--full", "shapes.full");

  Command* mos = make(7, "mos", "Summarize listening-test ratings", {"mos"}, run_mos);
  bind_key(*mos, defaults, "--ratings", "mos.ratings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (Command& cmd : commands) {
    if (!cmd.app->parsed()) continue;
    RunConfig cfg = defaults;
    try {
      if (!cmd.config_file.empty()) cfg.load_file(cmd.config_file);
      for (const auto& b : cmd.bindings)
        if (b.option->count() > 0) cfg.set_flag(b.key, cmd.values[b.key]);
      std::cerr << "# resolved config\n";
      cfg.dump(std::cerr, cmd.sections);
      return cmd.run(cfg);
    } catch (const ConfigError& e) {
      std::cerr << "error: " << e.what() << "\n\n" << cmd.app->help();
      return kExitUsage;
    } catch (const RuntimeFailure& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitRuntime;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitRuntime;
    }
  }
  return kExitUsage;
}
