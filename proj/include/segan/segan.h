// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// C interface of the segan library. Every function that can fail returns a
// segan_status; on failure segan_last_error() describes the error for the
// calling thread until its next failing call. Objects are opaque handles
// owned by the caller and released with the matching *_destroy function.

#ifndef SEGAN_SEGAN_H_
#define SEGAN_SEGAN_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SEGAN_API __declspec(dllexport)
#else
#define SEGAN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum segan_status {
  SEGAN_OK = 0,
  SEGAN_ERR_INVALID_ARGUMENT = 1,
  SEGAN_ERR_NOT_FOUND,
  SEGAN_ERR_UNSUPPORTED_FORMAT,
  SEGAN_ERR_IO,
  SEGAN_ERR_WRONG_RATE,
  SEGAN_ERR_INVALID_WINDOW,
  SEGAN_ERR_OVERLAP_UNSUPPORTED,
  SEGAN_ERR_ZERO_POWER,
  SEGAN_ERR_MANIFEST,
  SEGAN_ERR_SHAPE_MISMATCH,
  SEGAN_ERR_NON_SCALAR_LOSS,
  SEGAN_ERR_MISSING_REF_BATCH,
  SEGAN_ERR_CONFIG,
  SEGAN_ERR_CORRUPT_CHECKPOINT,
  SEGAN_ERR_NON_FINITE_LOSS,
  SEGAN_ERR_LENGTH_MISMATCH,
  SEGAN_ERR_ALL_FRAMES_SILENT,
  SEGAN_ERR_NUMERICAL,
  SEGAN_ERR_INCOMPLETE_TRIPLET,
  SEGAN_ERR_TOO_SHORT,
  SEGAN_ERR_INCONSISTENT_SHAPE,
  SEGAN_ERR_INTERNAL,
} segan_status;

SEGAN_API const char* segan_version(void);
SEGAN_API const char* segan_status_name(segan_status status);
// Message of the calling thread's most recent failure ("" if none).
SEGAN_API const char* segan_last_error(void);

// Strings returned through char** out-parameters are released with this.
SEGAN_API void segan_string_free(char* s);

/* ------------------------------------------------------------- model */

#define SEGAN_MAX_LAYERS 32

typedef struct segan_model_config {
  size_t window;
  size_t filter_width;
  size_t stride;
  size_t layers;                          // entries used in enc_channels
  size_t enc_channels[SEGAN_MAX_LAYERS];  // encoder output channels
  size_t z_channels;
} segan_model_config;

// The published configuration: window 16384, width 31, stride 2, eleven
// encoder layers 16 ... 1024, z with 1024 channels.
SEGAN_API void segan_model_config_default(segan_model_config* cfg);

// Newline-separated "LxC" lines. The encoder ledger lists the input and each
// encoder output; the full ledger adds the bottleneck after z concatenation
// and the decoder outputs as "stage layer LxC".
SEGAN_API segan_status segan_encoder_ledger(const segan_model_config* cfg, char** out);
SEGAN_API segan_status segan_full_ledger(const segan_model_config* cfg, char** out);

typedef struct segan_model segan_model;

SEGAN_API segan_status segan_model_create(const segan_model_config* cfg, uint64_t seed,
                                          segan_model** out);
SEGAN_API segan_status segan_model_load(const char* checkpoint, segan_model** out);
SEGAN_API segan_status segan_model_save(const segan_model* model, const char* checkpoint);
SEGAN_API segan_status segan_model_get_config(const segan_model* model, segan_model_config* out);
SEGAN_API void segan_model_destroy(segan_model* model);

typedef enum segan_z_mode { SEGAN_Z_SEEDED = 0, SEGAN_Z_ZERO = 1 } segan_z_mode;

// Enhances a whole waveform at 16 or 48 kHz. `out` must hold at least the
// output length, which is n for 16 kHz input and ceil(n / 3) for 48 kHz;
// *out_n receives it.
SEGAN_API segan_status segan_model_enhance(segan_model* model, const double* samples, size_t n,
                                           int sample_rate, segan_z_mode z_mode, uint64_t z_seed,
                                           double* out, size_t out_capacity, size_t* out_n);

SEGAN_API segan_status segan_enhance_file(const char* checkpoint, const char* in_wav,
                                          const char* out_wav, segan_z_mode z_mode,
                                          uint64_t z_seed);

/* ----------------------------------------------------------- dataset */

typedef struct segan_synth_config {
  size_t utterances;
  double duration_s;
  uint64_t seed;
  // Bit i selects noise kind i: white, pink, tonal_hum, modulated_burst.
  unsigned noise_mask;
  size_t n_snrs;
  double snrs_db[16];
} segan_synth_config;

// 16 utterances of 1 s, seed 1, all noise kinds, SNRs 0/5/10/15 dB.
SEGAN_API void segan_synth_config_default(segan_synth_config* cfg);

// Writes clean/, noise/, noisy/ and manifest.tsv under out_dir; the last
// test_count utterances are marked as the test split.
SEGAN_API segan_status segan_synth_export(const segan_synth_config* cfg, const char* out_dir,
                                          size_t test_count);

typedef struct segan_dataset segan_dataset;

// Training pairs cut from a manifest's train or test split.
SEGAN_API segan_status segan_dataset_from_manifest(const char* manifest, int test_split,
                                                   uint64_t seed, size_t window, size_t hop,
                                                   segan_dataset** out);
SEGAN_API segan_status segan_dataset_synth(const segan_synth_config* cfg, size_t window,
                                           size_t hop, segan_dataset** out);
SEGAN_API size_t segan_dataset_size(const segan_dataset* ds);
SEGAN_API void segan_dataset_destroy(segan_dataset* ds);

/* ---------------------------------------------------------- training */

typedef struct segan_train_config {
  size_t epochs;
  double lr;
  size_t batch_size;
  size_t micro_batch;
  double lambda_l1;
  uint64_t seed;
  size_t checkpoint_every;
  size_t max_steps;
  int adversarial;
  int shuffle;
} segan_train_config;

SEGAN_API void segan_train_config_default(segan_train_config* cfg);

typedef struct segan_train_summary {
  size_t steps;
  double first_g_l1;
  double last_d_real;
  double last_d_fake;
  double last_g_adv;
  double last_g_l1;
} segan_train_summary;

// Receives progress lines without the trailing newline.
typedef void (*segan_log_fn)(const char* line, void* user);

// Trains `model` in place; writes loss.csv, step_<n>.sgn and final.sgn to
// out_dir. `log` may be NULL.
SEGAN_API segan_status segan_train(segan_model* model, const segan_dataset* data,
                                   const segan_train_config* cfg, const char* out_dir,
                                   segan_log_fn log, void* user, segan_train_summary* summary);

/* ------------------------------------------------------------ wiener */

typedef struct segan_wiener_options {
  double alpha;
  size_t noise_frames;
  double gain_floor_db;
  size_t frame;
  size_t hop;
} segan_wiener_options;

SEGAN_API void segan_wiener_options_default(segan_wiener_options* o);

// 16 kHz input; `out` holds n samples.
SEGAN_API segan_status segan_wiener_enhance(const double* samples, size_t n,
                                            const segan_wiener_options* o, double* out);
SEGAN_API segan_status segan_wiener_file(const char* in_wav, const char* out_wav,
                                         const segan_wiener_options* o);

/* ----------------------------------------------------------- metrics */

SEGAN_API segan_status segan_ssnr(const double* clean, const double* test, size_t n,
                                  double* out);
SEGAN_API segan_status segan_llr(const double* clean, const double* test, size_t n,
                                 double* out);

typedef enum segan_metric { SEGAN_METRIC_SSNR = 1, SEGAN_METRIC_LLR = 2 } segan_metric;

SEGAN_API segan_status segan_eval_files(const char* clean_wav, const char* test_wav,
                                        segan_metric metric, double* out);

// Per-file metric values collected into a CSV report with aggregate rows.
typedef struct segan_report segan_report;

SEGAN_API segan_status segan_report_create(segan_report** out);
SEGAN_API segan_status segan_report_add(segan_report* r, const char* file, const char* metric,
                                        double value);
SEGAN_API segan_status segan_report_aggregate(const segan_report* r, const char* metric,
                                              double* out);
SEGAN_API segan_status segan_report_write(const segan_report* r, const char* path);
SEGAN_API void segan_report_destroy(segan_report* r);

typedef struct segan_cmos {
  char a[16];
  char b[16];
  double cmos;
  double prefer_a;
  double prefer_b;
  double no_preference;
} segan_cmos;

typedef struct segan_mos_summary {
  double mos_noisy;
  double mos_wiener;
  double mos_segan;
  size_t items;
  segan_cmos comparisons[3];  // (segan, noisy), (segan, wiener), (wiener, noisy)
} segan_mos_summary;

SEGAN_API segan_status segan_mos_file(const char* ratings_csv, segan_mos_summary* out);

/* --------------------------------------------------------- gradcheck */

typedef struct segan_gradcheck_entry {
  char name[32];
  double max_rel_error;
  size_t coordinates;
} segan_gradcheck_entry;

// Runs the float64 finite-difference suite. Writes up to `capacity` entries
// and stores the suite size in *count.
SEGAN_API segan_status segan_gradcheck(double eps, size_t samples, uint64_t seed,
                                       segan_gradcheck_entry* entries, size_t capacity,
                                       size_t* count);

#ifdef __cplusplus
}  // extern "C"
#endif

#endif  // SEGAN_SEGAN_H_
