/* mmc.h - C interface to the multi-modal concordance library.
 *
 * Objects are opaque handles created by the library and released with the
 * matching *_free function. Every fallible call returns an mmc_status; on
 * failure, mmc_last_error() describes the problem (per thread, valid until
 * the next call on that thread). Strings returned through char** are owned
 * by the caller and released with mmc_string_free.
 */
#ifndef MMC_MMC_H
#define MMC_MMC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MMC_API __declspec(dllexport)
#else
#define MMC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mmc_status {
    MMC_OK = 0,
    MMC_ERR_CONFIG = 1,               /* invalid options or configuration */
    MMC_ERR_DATA = 2,                 /* malformed, empty or insufficient data */
    MMC_ERR_CALIBRATION_MISMATCH = 3, /* calibration does not match the reference */
    MMC_ERR_IO = 4,
    MMC_ERR_INTERNAL = 5
} mmc_status;

typedef enum mmc_log_level {
    MMC_LOG_DEBUG = 0,
    MMC_LOG_INFO = 1,
    MMC_LOG_WARN = 2,
    MMC_LOG_ERROR = 3,
    MMC_LOG_OFF = 4
} mmc_log_level;

typedef struct mmc_reference mmc_reference;
typedef struct mmc_calibration mmc_calibration;
typedef struct mmc_series mmc_series;

MMC_API const char* mmc_version(void);
MMC_API const char* mmc_last_error(void);
MMC_API void mmc_string_free(char* s);
/* Library diagnostics go to stderr. */
MMC_API void mmc_set_log_level(mmc_log_level level);

/* ---- simulation ---------------------------------------------------- */

typedef enum mmc_scenario {
    MMC_SCENARIO_BASELINE = 0,
    MMC_SCENARIO_HARD_MINING = 1,
    MMC_SCENARIO_METADATA_FILTER_FAILURE = 2,
    MMC_SCENARIO_NO_METADATA_OOD = 3
} mmc_scenario;

typedef struct mmc_simulate_options {
    const char* out;                /* stream path; the schema goes to <out>.schema.json */
    const char* population_config;  /* optional JSON file, NULL for defaults */
    uint64_t seed;
    int latent_dim;
    mmc_scenario scenario;
    const char* start;              /* YYYY-MM-DD */
    const char* end;
    const char* point_a;
    const char* point_b;
    double q;
    double lateral_ratio;
    double ood_ratio;
} mmc_simulate_options;

MMC_API void mmc_simulate_options_init(mmc_simulate_options* options);
MMC_API mmc_status mmc_scenario_parse(const char* name, mmc_scenario* out);
/* Writes the stream; *summary (optional) receives a one-line description. */
MMC_API mmc_status mmc_simulate(const mmc_simulate_options* options, char** summary);

/* ---- reference ----------------------------------------------------- */

/* schema_path may be NULL: the stream's sidecar schema, else the default. */
MMC_API mmc_status mmc_reference_load(const char* stream_path, const char* schema_path,
                                      mmc_reference** out);
MMC_API void mmc_reference_free(mmc_reference* reference);
MMC_API const char* mmc_reference_fingerprint(const mmc_reference* reference);
MMC_API size_t mmc_reference_exam_count(const mmc_reference* reference);

/* ---- calibration --------------------------------------------------- */

typedef struct mmc_window_options {
    int window_days;
    int stride_days;
    int min_exams;
    int bootstrap_k;
    int bootstrap_n;
    uint64_t seed;
} mmc_window_options;

typedef struct mmc_metric_groups {
    int metadata;
    int latent;
    int predictions;
} mmc_metric_groups;

typedef struct mmc_calibrate_options {
    mmc_window_options window;
    mmc_metric_groups groups;
    int unweighted;         /* nonzero: skip weight calibration */
    int raw_weights;        /* nonzero: do not normalize weights */
    int spearman;           /* nonzero: rank correlation for the weights */
    double hard_ratio;      /* hard-mined windows per reference window */
    int threads;            /* 0 = hardware concurrency */
} mmc_calibrate_options;

typedef struct mmc_metric_info {
    const char* metric_id;  /* owned by the calibration */
    double offset;
    double scale;
    double weight;
    int has_weight;
    int excluded;
} mmc_metric_info;

MMC_API void mmc_calibrate_options_init(mmc_calibrate_options* options);
MMC_API mmc_status mmc_calibrate(const mmc_reference* reference,
                                 const mmc_calibrate_options* options, mmc_calibration** out);
/* Newline-separated warnings from the last mmc_calibrate on this handle. */
MMC_API const char* mmc_calibration_warnings(const mmc_calibration* calibration);
MMC_API mmc_status mmc_calibration_save(const mmc_calibration* calibration, const char* path);
MMC_API mmc_status mmc_calibration_load(const char* path, mmc_calibration** out);
MMC_API void mmc_calibration_free(mmc_calibration* calibration);
MMC_API size_t mmc_calibration_metric_count(const mmc_calibration* calibration);
MMC_API mmc_status mmc_calibration_metric(const mmc_calibration* calibration, size_t index,
                                          mmc_metric_info* out);

/* ---- monitoring ---------------------------------------------------- */

typedef struct mmc_monitor_options {
    const char* stream;
    const char* schema;     /* NULL: sidecar or default */
    mmc_metric_groups groups;
    const char* start;      /* NULL: first full window */
    const char* end;        /* NULL: last date */
    const char* auroc_label;  /* NULL: micro-AUROC over all labels */
    int unweighted;         /* nonzero: leave MMC_w out of the series */
    int threads;
} mmc_monitor_options;

typedef struct mmc_series_row {
    char index_date[11];
    int n_exams;
    int skipped;
    int has_mmc0;
    double mmc0;
    int has_mmcw;
    double mmcw;
    int has_auroc;
    double auroc;
    const char* error;      /* empty when the row is complete; owned by the series */
} mmc_series_row;

MMC_API void mmc_monitor_options_init(mmc_monitor_options* options);
MMC_API mmc_status mmc_monitor(const mmc_reference* reference,
                               const mmc_calibration* calibration,
                               const mmc_monitor_options* options, mmc_series** out);
MMC_API mmc_status mmc_series_save(const mmc_series* series, const char* path);
MMC_API mmc_status mmc_series_load(const char* path, mmc_series** out);
MMC_API void mmc_series_free(mmc_series* series);
MMC_API size_t mmc_series_row_count(const mmc_series* series);
MMC_API mmc_status mmc_series_row_get(const mmc_series* series, size_t index,
                                      mmc_series_row* out);

/* ---- report -------------------------------------------------------- */

/* change_points: comma-separated dates or NULL. Produces the JSON report
 * and a plain-text rendering; either output pointer may be NULL. */
MMC_API mmc_status mmc_report(const mmc_series* series, const char* change_points,
                              int settle_days, char** json_out, char** text_out);

/* ---- mini VAE ------------------------------------------------------ */

typedef struct mmc_vae_options {
    int height;
    int width;
    int latent_dim;
    int hidden;             /* width of the single hidden layer */
    double kl_coeff;
    double learning_rate;
    double momentum;
    int batch_size;
    int epochs;
    uint64_t seed;
} mmc_vae_options;

MMC_API void mmc_vae_options_init(mmc_vae_options* options);
/* Trains on the image files (PGM or whitespace text), or, when count is 0,
 * on `synthetic` images drawn half from each synthetic population. Writes
 * the model to model_path; *history (optional) receives per-epoch losses. */
MMC_API mmc_status mmc_vae_train(const mmc_vae_options* options, const char* const* images,
                                 size_t count, int synthetic, const char* model_path,
                                 char** history);
/* Writes one CSV row of posterior means per image: path,mu_0,... */
MMC_API mmc_status mmc_vae_encode(const char* model_path, const char* const* images,
                                  size_t count, const char* out_path);

#ifdef __cplusplus
}
#endif

#endif /* MMC_MMC_H */
