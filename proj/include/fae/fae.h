/*
 * FAE — dilated-causal-convolution variational auto-encoder for univariate
 * time-series modeling and anomaly detection.
 *
 * C API over the shared library. All objects are opaque handles created and
 * destroyed through these functions; every fallible call returns a
 * fae_status and leaves a message readable via fae_last_error() on the
 * calling thread. Status values double as the CLI's exit codes.
 */

#ifndef FAE_FAE_H
#define FAE_FAE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FAE_API __declspec(dllexport)
#else
#define FAE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fae_status {
  FAE_OK = 0,
  FAE_ERR_INTERNAL = 1, /* unexpected failure */
  FAE_ERR_CONFIG = 2,   /* invalid configuration or hyperparameters */
  FAE_ERR_DATA = 3,     /* malformed or inconsistent input data */
  FAE_ERR_FORMAT = 4,   /* bad file magic/layout, corrupt model file */
  FAE_ERR_NUMERIC = 5,  /* domain error or non-finite numerics */
  FAE_ERR_IO = 6,       /* unreadable/unwritable paths */
  FAE_ERR_SHAPE = 7     /* array shape/length contract violation */
} fae_status;

FAE_API const char* fae_version(void);

/* Message for the most recent failure on this thread ("" if none). */
FAE_API const char* fae_last_error(void);

typedef struct fae_dataset fae_dataset;
typedef struct fae_model fae_model;
typedef struct fae_history fae_history;
typedef struct fae_leaderboard fae_leaderboard;
typedef struct fae_detection fae_detection;
typedef struct fae_eval_table fae_eval_table;
typedef struct fae_zs_report fae_zs_report;
typedef struct fae_latent_table fae_latent_table;

/* ------------------------------------------------------------------ */
/* Hyperparameters                                                     */

typedef struct fae_hyper {
  int64_t T;       /* window length */
  int64_t J;       /* latent dimension, J < T */
  int64_t U;       /* filters per hidden layer */
  int64_t F;       /* filter length, >= 2 */
  double gamma;    /* learning rate */
  int64_t m;       /* mini-batch size */
  double beta;     /* KL weight */
  double alpha;    /* default detection multiplier */
} fae_hyper;

/* Best calibration values: T=256, J=48, U=128, F=2, gamma=6e-5, m=32. */
FAE_API void fae_hyper_defaults(fae_hyper* hyper);

/* Smallest N >= 1 with T <= 2 * F^(N-1). */
FAE_API fae_status fae_derive_depth(int64_t T, int64_t F, int64_t* out_n);

/* Trainable-parameter count of the architecture for these hyperparameters. */
FAE_API fae_status fae_param_count(const fae_hyper* hyper, int64_t* out);

/* ------------------------------------------------------------------ */
/* Datasets                                                            */

FAE_API fae_status fae_dataset_create(fae_dataset** out);
FAE_API void fae_dataset_free(fae_dataset* dataset);

/* Appends every series found in a CSV file. label_col may be NULL or name a
 * column that is absent (series load unlabeled). interpolate_gaps != 0
 * linearly fills missing constant-step timestamps instead of rejecting. */
FAE_API fae_status fae_dataset_load_csv(fae_dataset* dataset, const char* path,
                                        const char* time_col,
                                        const char* id_col,
                                        const char* value_col,
                                        const char* label_col,
                                        int interpolate_gaps);

/* Appends one UCR anomaly-archive file
 * (`<name>_<train_end>_<anomaly_begin>_<anomaly_end>.txt`). */
FAE_API fae_status fae_dataset_load_ucr(fae_dataset* dataset, const char* path);

typedef struct fae_synth_opts {
  const char* id;
  int64_t length;
  double period;            /* samples per cycle ("day"), >= 2 */
  double amplitude;
  double weekend_scale;     /* multiplier on every 6th and 7th day */
  double trend_per_period;
  double noise_std;
  const int64_t* spike_positions; /* may be NULL when n_spikes == 0 */
  const double* spike_magnitudes;
  size_t n_spikes;
  uint64_t seed;
} fae_synth_opts;

FAE_API void fae_synth_opts_defaults(fae_synth_opts* opts);
FAE_API fae_status fae_dataset_add_synth(fae_dataset* dataset,
                                         const fae_synth_opts* opts);

/* Temporal train/val/test split for every series that has none yet; UCR
 * series get their validation carved from the back of the train range. */
FAE_API fae_status fae_dataset_split(fae_dataset* dataset, double train_frac,
                                     double val_frac);

FAE_API fae_status fae_dataset_count(const fae_dataset* dataset, size_t* out);
/* The id pointer stays valid until the dataset is mutated or freed. */
FAE_API fae_status fae_dataset_id(const fae_dataset* dataset, size_t index,
                                  const char** out);
FAE_API fae_status fae_dataset_series_length(const fae_dataset* dataset,
                                             const char* id, size_t* out);

/* Columns: timestamp,id,value,label. */
FAE_API fae_status fae_dataset_save_csv(const fae_dataset* dataset,
                                        const char* path);

/* ------------------------------------------------------------------ */
/* Models                                                              */

FAE_API fae_status fae_model_build(const fae_hyper* hyper, uint64_t seed,
                                   fae_model** out);
FAE_API void fae_model_free(fae_model* model);

FAE_API fae_status fae_model_save(const fae_model* model, const char* path);
FAE_API fae_status fae_model_load(const char* path, fae_model** out);

typedef struct fae_model_info {
  int64_t T, J, U, F, N;
  double beta;
  int64_t params;
  size_t n_normalizers;
} fae_model_info;

FAE_API fae_status fae_model_get_info(const fae_model* model,
                                      fae_model_info* out);

/* window: T normalized samples; mu_z/logsigma_z: caller buffers of length J. */
FAE_API fae_status fae_model_encode(const fae_model* model,
                                    const double* window, size_t window_len,
                                    double* mu_z, double* logsigma_z);

/* z: J values; mu_x/sigma_x: caller buffers of length T. */
FAE_API fae_status fae_model_decode(const fae_model* model, const double* z,
                                    size_t z_len, double* mu_x,
                                    double* sigma_x);

/* ------------------------------------------------------------------ */
/* Training                                                            */

typedef struct fae_train_opts {
  double gamma;
  int64_t m;
  int64_t max_epochs;
  int64_t patience;
  uint64_t seed;
  double beta;
  int64_t stride;
} fae_train_opts;

FAE_API void fae_train_opts_defaults(fae_train_opts* opts);

/* Trains in place; dataset series must be split. On success *out_history
 * (optional, may be NULL) receives the per-epoch loss curves. */
FAE_API fae_status fae_train(fae_model* model, const fae_dataset* dataset,
                             const fae_train_opts* opts,
                             fae_history** out_history);

FAE_API void fae_history_free(fae_history* history);
FAE_API fae_status fae_history_count(const fae_history* history, size_t* out);
FAE_API fae_status fae_history_entry(const fae_history* history, size_t epoch,
                                     double* train_loss, double* val_loss);
/* Columns: epoch,train_loss,val_loss. */
FAE_API fae_status fae_history_save_csv(const fae_history* history,
                                        const char* path);

/* ------------------------------------------------------------------ */
/* Hyperparameter search                                               */

typedef struct fae_search_opts {
  int64_t budget;
  int64_t trial_epochs;
  int64_t patience;
  int64_t stride;
  double beta;
  uint64_t seed;
  int64_t t_min, t_max, t_step;
  int64_t j_min, j_step; /* J's upper bound is tied to T/4 */
  double gamma_min, gamma_max;
  int64_t m_min, m_max, m_step;
  int64_t u_min, u_max, u_step;
} fae_search_opts;

FAE_API void fae_search_opts_defaults(fae_search_opts* opts);
FAE_API fae_status fae_search(const fae_dataset* dataset,
                              const fae_search_opts* opts,
                              fae_leaderboard** out);
FAE_API void fae_leaderboard_free(fae_leaderboard* leaderboard);
FAE_API fae_status fae_leaderboard_count(const fae_leaderboard* leaderboard,
                                         size_t* out);
FAE_API fae_status fae_leaderboard_entry(const fae_leaderboard* leaderboard,
                                         size_t index, fae_hyper* hyper,
                                         double* val_loss, int64_t* params);
/* Columns: rank,T,J,gamma,m,U,val_loss,params. */
FAE_API fae_status fae_leaderboard_save_csv(const fae_leaderboard* leaderboard,
                                            const char* path);

/* ------------------------------------------------------------------ */
/* Detection and evaluation                                            */

/* Scores one series online: one (mu, sigma, score, flag) row per t from
 * T-1 to the end, in original units. */
FAE_API fae_status fae_detect(const fae_model* model,
                              const fae_dataset* dataset,
                              const char* series_id, double alpha,
                              fae_detection** out);

typedef struct fae_detection_row {
  int64_t t;
  int64_t timestamp;
  double x, mu, sigma, score;
  int flag;
} fae_detection_row;

FAE_API void fae_detection_free(fae_detection* detection);
FAE_API fae_status fae_detection_count(const fae_detection* detection,
                                       size_t* out);
FAE_API fae_status fae_detection_entry(const fae_detection* detection,
                                       size_t index, fae_detection_row* out);
/* Columns: series_id,t,timestamp,x,mu,sigma,score,flag. */
FAE_API fae_status fae_detection_save_csv(const fae_detection* detection,
                                          const char* path);

/* Best point-wise-F1 alpha on the validation partition; ties prefer the
 * larger alpha. *out_calibrated is 0 when the series has no positive
 * validation labels and alpha_default was returned. */
FAE_API fae_status fae_calibrate_alpha(const fae_model* model,
                                       const fae_dataset* dataset,
                                       const char* series_id,
                                       const double* grid, size_t n_grid,
                                       double alpha_default, double* out_alpha,
                                       int* out_calibrated);

/* Point-wise confusion metrics on every labeled series' test partition, plus
 * a pooled "ALL" row. n_grid > 0 calibrates alpha per series on validation;
 * otherwise fixed_alpha is used everywhere. */
FAE_API fae_status fae_evaluate(const fae_model* model,
                                const fae_dataset* dataset,
                                const double* alpha_grid, size_t n_grid,
                                double fixed_alpha, fae_eval_table** out);

typedef struct fae_eval_row {
  const char* series_id; /* valid until the table is freed */
  double alpha;
  int64_t tp, fp, fn, tn;
  double precision, recall, f1;
} fae_eval_row;

FAE_API void fae_eval_table_free(fae_eval_table* table);
FAE_API fae_status fae_eval_table_count(const fae_eval_table* table,
                                        size_t* out);
FAE_API fae_status fae_eval_table_entry(const fae_eval_table* table,
                                        size_t index, fae_eval_row* out);
/* Columns: series_id,alpha,tp,fp,fn,tn,precision,recall,f1. */
FAE_API fae_status fae_eval_table_save_csv(const fae_eval_table* table,
                                           const char* path);

/* ------------------------------------------------------------------ */
/* Zero-shot experiments                                               */

/* Trains on the dataset minus leave_out (n_leave ids), scores every series'
 * test partition. Held-out series are normalized from their own
 * train-partition statistics. */
FAE_API fae_status fae_zeroshot(const fae_dataset* dataset,
                                const char* const* leave_out, size_t n_leave,
                                const fae_hyper* hyper,
                                const fae_train_opts* train_opts, double alpha,
                                fae_zs_report** out);

typedef struct fae_zs_row {
  const char* series_id; /* valid until the report is freed */
  int held_out;
  double test_nll;
  double coverage3;
  double alpha;
  double f1; /* NaN when the test region has no positive labels */
} fae_zs_row;

FAE_API void fae_zs_report_free(fae_zs_report* report);
FAE_API fae_status fae_zs_report_count(const fae_zs_report* report,
                                       size_t* out);
FAE_API fae_status fae_zs_report_entry(const fae_zs_report* report,
                                       size_t index, fae_zs_row* out);
/* Columns: series_id,held_out,test_nll,coverage3,alpha,f1. */
FAE_API fae_status fae_zs_report_save_csv(const fae_zs_report* report,
                                          const char* path);

/* ------------------------------------------------------------------ */
/* Latent-space analysis                                               */

/* Encodes every window (epsilon-free), fits PCA once over the whole set,
 * and annotates projections with hour bucket, weekend flag and day. Series
 * with epoch-second timestamps use the UTC calendar; index-only series use
 * samples_per_day/days_per_week. */
FAE_API fae_status fae_latent_project(const fae_model* model,
                                      const fae_dataset* dataset, int64_t k,
                                      int64_t stride, int64_t samples_per_day,
                                      int64_t days_per_week,
                                      fae_latent_table** out);

typedef struct fae_latent_row {
  const char* series_id; /* valid until the table is freed */
  int64_t t;
  int64_t timestamp;
  double pc1, pc2, pc3;
  int hour_bucket;
  int weekend;
  int day;
  double radius;
} fae_latent_row;

FAE_API void fae_latent_table_free(fae_latent_table* table);
FAE_API fae_status fae_latent_table_count(const fae_latent_table* table,
                                          size_t* out);
FAE_API fae_status fae_latent_table_entry(const fae_latent_table* table,
                                          size_t index, fae_latent_row* out);
/* Columns: series_id,t,timestamp,pc1,pc2,pc3,hour_bucket,weekend,day,radius. */
FAE_API fae_status fae_latent_table_save_csv(const fae_latent_table* table,
                                             const char* path);

#ifdef __cplusplus
}
#endif

#endif /* FAE_FAE_H */
