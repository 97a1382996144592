// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "segan/segan.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <ostream>
#include <sstream>
#include <streambuf>
#include <string>

#include "audio/audio_io.hpp"
#include "common/error.hpp"
#include "dataset/dataset.hpp"
#include "engine/gradcheck.hpp"
#include "metrics/metrics.hpp"
#include "model/segan_model.hpp"
#include "train/trainer.hpp"
#include "wiener/wiener.hpp"

using namespace segan;

static_assert(static_cast<int>(ErrorCode::kInvalidArgument) == SEGAN_ERR_INVALID_ARGUMENT);
static_assert(static_cast<int>(ErrorCode::kCorruptCheckpoint) == SEGAN_ERR_CORRUPT_CHECKPOINT);
static_assert(static_cast<int>(ErrorCode::kInternal) == SEGAN_ERR_INTERNAL);

struct segan_model {
  model::SeganModel m;
};

struct segan_dataset {
  std::vector<dataset::TrainingPair> pairs;
};

struct segan_report {
  metrics::MetricReport r;
};

namespace {

thread_local std::string g_last_error;

segan_status record(segan_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
segan_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    return SEGAN_OK;
  } catch (const Error& e) {
    return record(static_cast<segan_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return record(SEGAN_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(SEGAN_ERR_INTERNAL, e.what());
  } catch (...) {
    return record(SEGAN_ERR_INTERNAL, "unknown exception");
  }
}

void require(bool ok, const char* what) {
  if (!ok) fail(ErrorCode::kInvalidArgument, what);
}

model::GeneratorConfig to_cpp(const segan_model_config& c) {
  require(c.layers <= SEGAN_MAX_LAYERS, "too many encoder layers");
  model::GeneratorConfig g;
  g.window = c.window;
  g.filter_width = c.filter_width;
  g.stride = c.stride;
  g.enc_channels.assign(c.enc_channels, c.enc_channels + c.layers);
  g.z_channels = c.z_channels;
  g.validate();
  return g;
}

void from_cpp(const model::GeneratorConfig& g, segan_model_config* c) {
  *c = segan_model_config{};
  c->window = g.window;
  c->filter_width = g.filter_width;
  c->stride = g.stride;
  c->layers = g.enc_channels.size();
  std::copy(g.enc_channels.begin(), g.enc_channels.end(), c->enc_channels);
  c->z_channels = g.z_channels;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

dataset::SynthSpec to_cpp(const segan_synth_config& c) {
  require(c.n_snrs >= 1 && c.n_snrs <= 16, "n_snrs must be in 1..16");
  dataset::SynthSpec s;
  s.utterances = c.utterances;
  s.duration_s = c.duration_s;
  s.seed = c.seed;
  s.noise_kinds.clear();
  for (std::size_t i = 0; i < std::size(dataset::kAllNoiseKinds); ++i)
    if (c.noise_mask & (1u << i)) s.noise_kinds.push_back(dataset::kAllNoiseKinds[i]);
  require(!s.noise_kinds.empty(), "noise_mask selects no noise kind");
  s.snrs_db.assign(c.snrs_db, c.snrs_db + c.n_snrs);
  return s;
}

train::TrainConfig to_cpp(const segan_train_config& c) {
  train::TrainConfig t;
  t.epochs = c.epochs;
  t.lr = c.lr;
  t.batch_size = c.batch_size;
  t.micro_batch = c.micro_batch;
  t.lambda_l1 = c.lambda_l1;
  t.seed = c.seed;
  t.checkpoint_every = c.checkpoint_every;
  t.max_steps = c.max_steps;
  t.adversarial = c.adversarial != 0;
  t.shuffle = c.shuffle != 0;
  t.validate();
  return t;
}

wiener::WienerOptions to_cpp(const segan_wiener_options* o) {
  wiener::WienerOptions w;
  if (o != nullptr) {
    w.alpha = o->alpha;
    w.noise_frames = o->noise_frames;
    w.gain_floor_db = o->gain_floor_db;
    w.frame = o->frame;
    w.hop = o->hop;
  }
  return w;
}

train::ZMode z_mode(segan_z_mode mode, std::uint64_t seed) {
  require(mode == SEGAN_Z_SEEDED || mode == SEGAN_Z_ZERO, "unknown z mode");
  return {mode == SEGAN_Z_ZERO ? train::ZMode::Kind::kZero : train::ZMode::Kind::kSeeded, seed};
}

// Forwards complete lines to a C callback.
class CallbackBuf : public std::streambuf {
 public:
  CallbackBuf(segan_log_fn fn, void* user) : fn_(fn), user_(user) {}
  ~CallbackBuf() override { flush_line(); }

 protected:
  int_type overflow(int_type ch) override {
    if (ch == traits_type::eof()) return traits_type::not_eof(ch);
    if (ch == '\n') {
      flush_line();
    } else {
      line_.push_back(static_cast<char>(ch));
    }
    return ch;
  }

 private:
  void flush_line() {
    if (!line_.empty()) fn_(line_.c_str(), user_);
    line_.clear();
  }
  segan_log_fn fn_;
  void* user_;
  std::string line_;
};

}  // namespace

extern "C" {

const char* segan_version(void) { return "0.1.0"; }

const char* segan_status_name(segan_status status) {
  if (status == SEGAN_OK) return "Ok";
  if (status < SEGAN_ERR_INVALID_ARGUMENT || status > SEGAN_ERR_INTERNAL) return "Unknown";
  return to_string(static_cast<ErrorCode>(status));
}

const char* segan_last_error(void) { return g_last_error.c_str(); }

void segan_string_free(char* s) { std::free(s); }

void segan_model_config_default(segan_model_config* cfg) {
  if (cfg != nullptr) from_cpp(model::GeneratorConfig{}, cfg);
}

segan_status segan_encoder_ledger(const segan_model_config* cfg, char** out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "null argument");
    std::string text;
    for (const auto& e : model::encoder_ledger(to_cpp(*cfg)))
      text += std::to_string(e.length) + "x" + std::to_string(e.channels) + "\n";
    *out = dup_string(text);
  });
}

segan_status segan_full_ledger(const segan_model_config* cfg, char** out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "null argument");
    std::string text;
    for (const auto& e : model::shape_ledger(to_cpp(*cfg))) {
      text += e.stage + " " + std::to_string(e.layer) + " " + std::to_string(e.length) + "x" +
              std::to_string(e.channels) + "\n";
    }
    *out = dup_string(text);
  });
}

segan_status segan_model_create(const segan_model_config* cfg, uint64_t seed, segan_model** out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "null argument");
    *out = new segan_model{model::SeganModel(to_cpp(*cfg), seed)};
  });
}

segan_status segan_model_load(const char* checkpoint, segan_model** out) {
  return guarded([&] {
    require(checkpoint != nullptr && out != nullptr, "null argument");
    *out = new segan_model{model::load_checkpoint(checkpoint)};
  });
}

segan_status segan_model_save(const segan_model* model, const char* checkpoint) {
  return guarded([&] {
    require(model != nullptr && checkpoint != nullptr, "null argument");
    model::save_checkpoint(model->m, checkpoint);
  });
}

segan_status segan_model_get_config(const segan_model* model, segan_model_config* out) {
  return guarded([&] {
    require(model != nullptr && out != nullptr, "null argument");
    from_cpp(model->m.config(), out);
  });
}

void segan_model_destroy(segan_model* model) { delete model; }

segan_status segan_model_enhance(segan_model* model, const double* samples, size_t n,
                                 int sample_rate, segan_z_mode mode, uint64_t z_seed, double* out,
                                 size_t out_capacity, size_t* out_n) {
  return guarded([&] {
    require(model != nullptr && (samples != nullptr || n == 0) && out_n != nullptr, "null argument");
    const audio::Waveform in{std::vector<double>(samples, samples + n), sample_rate};
    const auto y = train::enhance_waveform(model->m.generator, in, z_mode(mode, z_seed));
    *out_n = y.size();
    if (y.size() > out_capacity || out == nullptr) {
      fail(ErrorCode::kInvalidArgument, "output buffer holds " + std::to_string(out_capacity) +
                                            " samples, need " + std::to_string(y.size()));
    }
    std::copy(y.samples.begin(), y.samples.end(), out);
  });
}

segan_status segan_enhance_file(const char* checkpoint, const char* in_wav, const char* out_wav,
                                segan_z_mode mode, uint64_t z_seed) {
  return guarded([&] {
    require(checkpoint != nullptr && in_wav != nullptr && out_wav != nullptr, "null argument");
    train::enhance_file(checkpoint, in_wav, out_wav, z_mode(mode, z_seed));
  });
}

void segan_synth_config_default(segan_synth_config* cfg) {
  if (cfg == nullptr) return;
  const dataset::SynthSpec s;
  *cfg = segan_synth_config{};
  cfg->utterances = s.utterances;
  cfg->duration_s = s.duration_s;
  cfg->seed = s.seed;
  cfg->noise_mask = (1u << std::size(dataset::kAllNoiseKinds)) - 1;
  cfg->n_snrs = s.snrs_db.size();
  std::copy(s.snrs_db.begin(), s.snrs_db.end(), cfg->snrs_db);
}

segan_status segan_synth_export(const segan_synth_config* cfg, const char* out_dir,
                                size_t test_count) {
  return guarded([&] {
    require(cfg != nullptr && out_dir != nullptr, "null argument");
    dataset::export_synth_corpus(to_cpp(*cfg), out_dir, test_count);
  });
}

segan_status segan_dataset_from_manifest(const char* manifest, int test_split, uint64_t seed,
                                         size_t window, size_t hop, segan_dataset** out) {
  return guarded([&] {
    require(manifest != nullptr && out != nullptr, "null argument");
    const auto utts = dataset::load_manifest(
        manifest, test_split ? dataset::Split::kTest : dataset::Split::kTrain, seed);
    *out = new segan_dataset{dataset::build_pairs(utts, window, hop)};
  });
}

segan_status segan_dataset_synth(const segan_synth_config* cfg, size_t window, size_t hop,
                                 segan_dataset** out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "null argument");
    *out = new segan_dataset{dataset::build_pairs(dataset::synth_corpus(to_cpp(*cfg)), window, hop)};
  });
}

size_t segan_dataset_size(const segan_dataset* ds) { return ds == nullptr ? 0 : ds->pairs.size(); }

void segan_dataset_destroy(segan_dataset* ds) { delete ds; }

void segan_train_config_default(segan_train_config* cfg) {
  if (cfg == nullptr) return;
  const train::TrainConfig t;
  *cfg = segan_train_config{t.epochs,    t.lr,         t.batch_size,    t.micro_batch,
                            t.lambda_l1, t.seed,       t.checkpoint_every, t.max_steps,
                            t.adversarial ? 1 : 0, t.shuffle ? 1 : 0};
}

segan_status segan_train(segan_model* model, const segan_dataset* data,
                         const segan_train_config* cfg, const char* out_dir, segan_log_fn log,
                         void* user, segan_train_summary* summary) {
  return guarded([&] {
    require(model != nullptr && data != nullptr && cfg != nullptr && out_dir != nullptr,
            "null argument");
    const auto t = to_cpp(*cfg);
    if (!data->pairs.empty() && data->pairs.front().noisy.size() != model->m.config().window) {
      fail(ErrorCode::kShapeMismatch, "dataset window " +
                                          std::to_string(data->pairs.front().noisy.size()) +
                                          " differs from the model window " +
                                          std::to_string(model->m.config().window));
    }
    std::unique_ptr<CallbackBuf> buf;
    std::unique_ptr<std::ostream> os;
    if (log != nullptr) {
      buf = std::make_unique<CallbackBuf>(log, user);
      os = std::make_unique<std::ostream>(buf.get());
    }
    const auto result = train::train(model->m, t, data->pairs, out_dir, os.get());
    if (summary != nullptr) {
      *summary = segan_train_summary{};
      summary->steps = result.reports.size();
      if (!result.reports.empty()) {
        const auto& last = result.reports.back();
        summary->first_g_l1 = result.reports.front().g_l1;
        summary->last_d_real = last.d_real;
        summary->last_d_fake = last.d_fake;
        summary->last_g_adv = last.g_adv;
        summary->last_g_l1 = last.g_l1;
      }
    }
  });
}

void segan_wiener_options_default(segan_wiener_options* o) {
  if (o == nullptr) return;
  const wiener::WienerOptions w;
  *o = segan_wiener_options{w.alpha, w.noise_frames, w.gain_floor_db, w.frame, w.hop};
}

segan_status segan_wiener_enhance(const double* samples, size_t n, const segan_wiener_options* o,
                                  double* out) {
  return guarded([&] {
    require(samples != nullptr && out != nullptr, "null argument");
    const audio::Waveform in{std::vector<double>(samples, samples + n), audio::kModelRate};
    const auto y = wiener::enhance_wiener(in, to_cpp(o));
    std::copy(y.samples.begin(), y.samples.end(), out);
  });
}

segan_status segan_wiener_file(const char* in_wav, const char* out_wav,
                               const segan_wiener_options* o) {
  return guarded([&] {
    require(in_wav != nullptr && out_wav != nullptr, "null argument");
    audio::write_wav(wiener::enhance_wiener(audio::read_wav(in_wav), to_cpp(o)), out_wav);
  });
}

segan_status segan_ssnr(const double* clean, const double* test, size_t n, double* out) {
  return guarded([&] {
    require(clean != nullptr && test != nullptr && out != nullptr, "null argument");
    *out = metrics::ssnr({std::vector<double>(clean, clean + n), audio::kModelRate},
                         {std::vector<double>(test, test + n), audio::kModelRate});
  });
}

segan_status segan_llr(const double* clean, const double* test, size_t n, double* out) {
  return guarded([&] {
    require(clean != nullptr && test != nullptr && out != nullptr, "null argument");
    *out = metrics::llr({std::vector<double>(clean, clean + n), audio::kModelRate},
                        {std::vector<double>(test, test + n), audio::kModelRate});
  });
}

segan_status segan_eval_files(const char* clean_wav, const char* test_wav, segan_metric metric,
                              double* out) {
  return guarded([&] {
    require(clean_wav != nullptr && test_wav != nullptr && out != nullptr, "null argument");
    const auto c = audio::read_wav(clean_wav);
    const auto t = audio::read_wav(test_wav);
    switch (metric) {
      case SEGAN_METRIC_SSNR:
        *out = metrics::ssnr(c, t);
        break;
      case SEGAN_METRIC_LLR:
        *out = metrics::llr(c, t);
        break;
      default:
        fail(ErrorCode::kInvalidArgument, "unknown metric");
    }
  });
}

segan_status segan_report_create(segan_report** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = new segan_report{};
  });
}

segan_status segan_report_add(segan_report* r, const char* file, const char* metric, double value) {
  return guarded([&] {
    require(r != nullptr && file != nullptr && metric != nullptr, "null argument");
    auto& files = r->r.files;
    auto it = std::find_if(files.begin(), files.end(), [&](const auto& f) { return f.file == file; });
    if (it == files.end()) it = files.insert(files.end(), metrics::FileScores{file, {}});
    it->values[metric] = value;
  });
}

segan_status segan_report_aggregate(const segan_report* r, const char* metric, double* out) {
  return guarded([&] {
    require(r != nullptr && metric != nullptr && out != nullptr, "null argument");
    const auto agg = r->r.aggregate();
    const auto it = agg.find(metric);
    if (it == agg.end()) fail(ErrorCode::kNotFound, std::string("no values for metric ") + metric);
    *out = it->second;
  });
}

segan_status segan_report_write(const segan_report* r, const char* path) {
  return guarded([&] {
    require(r != nullptr && path != nullptr, "null argument");
    metrics::write_report(r->r, path);
  });
}

void segan_report_destroy(segan_report* r) { delete r; }

segan_status segan_mos_file(const char* ratings_csv, segan_mos_summary* out) {
  return guarded([&] {
    require(ratings_csv != nullptr && out != nullptr, "null argument");
    const auto s = metrics::aggregate_mos(metrics::read_ratings(ratings_csv));
    *out = segan_mos_summary{};
    out->mos_noisy = s.mos.at("noisy");
    out->mos_wiener = s.mos.at("wiener");
    out->mos_segan = s.mos.at("segan");
    out->items = s.items;
    for (std::size_t i = 0; i < 3 && i < s.comparisons.size(); ++i) {
      const auto& c = s.comparisons[i];
      auto& d = out->comparisons[i];
      std::snprintf(d.a, sizeof d.a, "%s", c.a.c_str());
      std::snprintf(d.b, sizeof d.b, "%s", c.b.c_str());
      d.cmos = c.cmos;
      d.prefer_a = c.prefer_a;
      d.prefer_b = c.prefer_b;
      d.no_preference = c.no_preference;
    }
  });
}

segan_status segan_gradcheck(double eps, size_t samples, uint64_t seed,
                             segan_gradcheck_entry* entries, size_t capacity, size_t* count) {
  return guarded([&] {
    require(count != nullptr && (entries != nullptr || capacity == 0), "null argument");
    require(eps > 0.0 && samples > 0, "eps and samples must be positive");
    engine::GradCheckOptions o;
    o.eps = eps;
    o.samples = samples;
    o.seed = seed;
    const auto results = engine::run_gradcheck_suite(o);
    *count = results.size();
    for (std::size_t i = 0; i < results.size() && i < capacity; ++i) {
      entries[i] = segan_gradcheck_entry{};
      std::snprintf(entries[i].name, sizeof entries[i].name, "%s", results[i].name.c_str());
      entries[i].max_rel_error = results[i].max_rel_error;
      entries[i].coordinates = results[i].coordinates;
    }
  });
}

}  // extern "C"
