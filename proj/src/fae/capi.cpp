#include "fae/fae.h"

#include <cstring>
#include <string>
#include <vector>

#include "fae/csvio.hpp"
#include "fae/data.hpp"
#include "fae/detector.hpp"
#include "fae/errors.hpp"
#include "fae/latent.hpp"
#include "fae/model.hpp"
#include "fae/trainer.hpp"

// Opaque handle definitions.
struct fae_dataset {
  std::vector<fae::SeriesRecord> records;
};
struct fae_model {
  fae::FaeModel impl;
};
struct fae_history {
  fae::TrainHistory impl;
};
struct fae_leaderboard {
  std::vector<fae::TrialResult> impl;
};
struct fae_detection {
  fae::DetectionResult impl;
};
struct fae_eval_table {
  std::vector<fae::EvalRow> impl;
};
struct fae_zs_report {
  fae::ZeroShotReport impl;
};
struct fae_latent_table {
  std::vector<fae::AnnotatedRow> impl;
};

namespace {

thread_local std::string g_last_error;

fae_status to_status(fae::ErrorFamily family) {
  return static_cast<fae_status>(static_cast<int>(family));
}

template <typename Fn>
fae_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return FAE_OK;
  } catch (const fae::Error& e) {
    g_last_error = e.what();
    return to_status(e.family());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FAE_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return FAE_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw fae::ConfigError(std::string("null or invalid argument: ") + what);
}

std::size_t positive_size(int64_t v, const char* name) {
  if (v < 1) {
    throw fae::ConfigError(std::string(name) + " must be >= 1");
  }
  return static_cast<std::size_t>(v);
}

fae::FaeHyperparams to_hyper(const fae_hyper& h) {
  fae::FaeHyperparams hyper;
  hyper.T = positive_size(h.T, "T");
  hyper.J = positive_size(h.J, "J");
  hyper.U = positive_size(h.U, "U");
  hyper.F = positive_size(h.F, "F");
  hyper.gamma = h.gamma;
  hyper.m = positive_size(h.m, "m");
  hyper.beta = h.beta;
  hyper.alpha_default = static_cast<int>(h.alpha);
  hyper.validate();
  return hyper;
}

fae::TrainConfig to_train_config(const fae_train_opts& o) {
  fae::TrainConfig config;
  config.gamma = o.gamma;
  config.m = positive_size(o.m, "m");
  config.max_epochs = positive_size(o.max_epochs, "max_epochs");
  config.patience = positive_size(o.patience, "patience");
  config.seed = o.seed;
  config.beta = o.beta;
  config.stride_train = positive_size(o.stride, "stride");
  config.validate();
  return config;
}

const fae::SeriesRecord& find_series(const fae_dataset& dataset,
                                     const char* id) {
  for (const fae::SeriesRecord& record : dataset.records) {
    if (record.id == id) return record;
  }
  throw fae::ConfigError(std::string("series '") + id + "' not in dataset");
}

}  // namespace

extern "C" {

const char* fae_version(void) { return "0.1.0"; }

const char* fae_last_error(void) { return g_last_error.c_str(); }

/* ------------------------------------------------------------------ */

void fae_hyper_defaults(fae_hyper* hyper) {
  if (!hyper) return;
  hyper->T = 256;
  hyper->J = 48;
  hyper->U = 128;
  hyper->F = 2;
  hyper->gamma = 6e-5;
  hyper->m = 32;
  hyper->beta = 1.0;
  hyper->alpha = 3.0;
}

fae_status fae_derive_depth(int64_t T, int64_t F, int64_t* out_n) {
  return guarded([&] {
    require(out_n, "out_n");
    *out_n = static_cast<int64_t>(
        fae::derive_depth(positive_size(T, "T"), positive_size(F, "F")));
  });
}

fae_status fae_param_count(const fae_hyper* hyper, int64_t* out) {
  return guarded([&] {
    require(hyper && out, "hyper/out");
    *out = static_cast<int64_t>(fae::param_count(to_hyper(*hyper)));
  });
}

/* ------------------------------------------------------------------ */

fae_status fae_dataset_create(fae_dataset** out) {
  return guarded([&] {
    require(out, "out");
    *out = new fae_dataset();
  });
}

void fae_dataset_free(fae_dataset* dataset) { delete dataset; }

fae_status fae_dataset_load_csv(fae_dataset* dataset, const char* path,
                                const char* time_col, const char* id_col,
                                const char* value_col, const char* label_col,
                                int interpolate_gaps) {
  return guarded([&] {
    require(dataset && path && time_col && id_col && value_col,
            "dataset/path/columns");
    fae::CsvSchema schema;
    schema.time_col = time_col;
    schema.id_col = id_col;
    schema.value_col = value_col;
    schema.label_col = label_col ? label_col : "";
    schema.gap_policy =
        interpolate_gaps ? fae::GapPolicy::interpolate : fae::GapPolicy::reject;
    std::vector<fae::SeriesRecord> records =
        fae::load_series_csv(path, schema);
    for (fae::SeriesRecord& record : records) {
      dataset->records.push_back(std::move(record));
    }
  });
}

fae_status fae_dataset_load_ucr(fae_dataset* dataset, const char* path) {
  return guarded([&] {
    require(dataset && path, "dataset/path");
    dataset->records.push_back(fae::load_ucr_file(path));
  });
}

void fae_synth_opts_defaults(fae_synth_opts* opts) {
  if (!opts) return;
  opts->id = "synth";
  opts->length = 0;
  opts->period = 32.0;
  opts->amplitude = 1.0;
  opts->weekend_scale = 1.0;
  opts->trend_per_period = 0.0;
  opts->noise_std = 0.0;
  opts->spike_positions = nullptr;
  opts->spike_magnitudes = nullptr;
  opts->n_spikes = 0;
  opts->seed = 0;
}

fae_status fae_dataset_add_synth(fae_dataset* dataset,
                                 const fae_synth_opts* opts) {
  return guarded([&] {
    require(dataset && opts, "dataset/opts");
    require(opts->n_spikes == 0 ||
                (opts->spike_positions && opts->spike_magnitudes),
            "spike arrays");
    fae::SynthSpec spec;
    spec.id = opts->id ? opts->id : "synth";
    spec.length = positive_size(opts->length, "length");
    spec.period = opts->period;
    spec.amplitude = opts->amplitude;
    spec.weekend_scale = opts->weekend_scale;
    spec.trend_per_period = opts->trend_per_period;
    spec.noise_std = opts->noise_std;
    spec.seed = opts->seed;
    for (std::size_t i = 0; i < opts->n_spikes; ++i) {
      if (opts->spike_positions[i] < 0) {
        throw fae::ConfigError("spike position must be >= 0");
      }
      spec.spikes.push_back(
          {static_cast<std::size_t>(opts->spike_positions[i]),
           opts->spike_magnitudes[i]});
    }
    dataset->records.push_back(fae::synth_generate(spec));
  });
}

fae_status fae_dataset_split(fae_dataset* dataset, double train_frac,
                             double val_frac) {
  return guarded([&] {
    require(dataset, "dataset");
    for (fae::SeriesRecord& record : dataset->records) {
      if (!record.split) {
        fae::temporal_split(record, train_frac, val_frac);
      } else {
        fae::carve_validation(record);
      }
    }
  });
}

fae_status fae_dataset_count(const fae_dataset* dataset, size_t* out) {
  return guarded([&] {
    require(dataset && out, "dataset/out");
    *out = dataset->records.size();
  });
}

fae_status fae_dataset_id(const fae_dataset* dataset, size_t index,
                          const char** out) {
  return guarded([&] {
    require(dataset && out, "dataset/out");
    if (index >= dataset->records.size()) {
      throw fae::ConfigError("dataset index out of range");
    }
    *out = dataset->records[index].id.c_str();
  });
}

fae_status fae_dataset_series_length(const fae_dataset* dataset,
                                     const char* id, size_t* out) {
  return guarded([&] {
    require(dataset && id && out, "dataset/id/out");
    *out = find_series(*dataset, id).length();
  });
}

fae_status fae_dataset_save_csv(const fae_dataset* dataset, const char* path) {
  return guarded([&] {
    require(dataset && path, "dataset/path");
    fae::save_series_csv(dataset->records, path);
  });
}

/* ------------------------------------------------------------------ */

fae_status fae_model_build(const fae_hyper* hyper, uint64_t seed,
                           fae_model** out) {
  return guarded([&] {
    require(hyper && out, "hyper/out");
    *out = new fae_model{fae::build_model(to_hyper(*hyper), seed)};
  });
}

void fae_model_free(fae_model* model) { delete model; }

fae_status fae_model_save(const fae_model* model, const char* path) {
  return guarded([&] {
    require(model && path, "model/path");
    fae::save_model(model->impl, path);
  });
}

fae_status fae_model_load(const char* path, fae_model** out) {
  return guarded([&] {
    require(path && out, "path/out");
    *out = new fae_model{fae::load_model(path)};
  });
}

fae_status fae_model_get_info(const fae_model* model, fae_model_info* out) {
  return guarded([&] {
    require(model && out, "model/out");
    const fae::FaeHyperparams& h = model->impl.hyper;
    out->T = static_cast<int64_t>(h.T);
    out->J = static_cast<int64_t>(h.J);
    out->U = static_cast<int64_t>(h.U);
    out->F = static_cast<int64_t>(h.F);
    out->N = static_cast<int64_t>(model->impl.encoder_layers.size());
    out->beta = h.beta;
    out->params = static_cast<int64_t>(fae::param_count(model->impl));
    out->n_normalizers = model->impl.normalizers.size();
  });
}

fae_status fae_model_encode(const fae_model* model, const double* window,
                            size_t window_len, double* mu_z,
                            double* logsigma_z) {
  return guarded([&] {
    require(model && window && mu_z && logsigma_z, "model/window/outputs");
    fae::Tensor2 x(1, window_len);
    std::memcpy(x.data.data(), window, window_len * sizeof(double));
    const fae::Encoding enc = fae::encode(model->impl, x);
    std::memcpy(mu_z, enc.mu_z.data(), enc.mu_z.size() * sizeof(double));
    std::memcpy(logsigma_z, enc.logsigma_z.data(),
                enc.logsigma_z.size() * sizeof(double));
  });
}

fae_status fae_model_decode(const fae_model* model, const double* z,
                            size_t z_len, double* mu_x, double* sigma_x) {
  return guarded([&] {
    require(model && z && mu_x && sigma_x, "model/z/outputs");
    const std::vector<double> latent(z, z + z_len);
    const fae::Decoding dec = fae::decode(model->impl, latent);
    std::memcpy(mu_x, dec.mu_x.data.data(),
                dec.mu_x.data.size() * sizeof(double));
    std::memcpy(sigma_x, dec.sigma_x.data.data(),
                dec.sigma_x.data.size() * sizeof(double));
  });
}

/* ------------------------------------------------------------------ */

void fae_train_opts_defaults(fae_train_opts* opts) {
  if (!opts) return;
  opts->gamma = 6e-5;
  opts->m = 32;
  opts->max_epochs = 100;
  opts->patience = 10;
  opts->seed = 1;
  opts->beta = 1.0;
  opts->stride = 1;
}

fae_status fae_train(fae_model* model, const fae_dataset* dataset,
                     const fae_train_opts* opts, fae_history** out_history) {
  return guarded([&] {
    require(model && dataset && opts, "model/dataset/opts");
    fae::TrainHistory history =
        fae::train(model->impl, dataset->records, to_train_config(*opts));
    if (out_history) *out_history = new fae_history{std::move(history)};
  });
}

void fae_history_free(fae_history* history) { delete history; }

fae_status fae_history_count(const fae_history* history, size_t* out) {
  return guarded([&] {
    require(history && out, "history/out");
    *out = history->impl.epochs.size();
  });
}

fae_status fae_history_entry(const fae_history* history, size_t epoch,
                             double* train_loss, double* val_loss) {
  return guarded([&] {
    require(history && train_loss && val_loss, "history/outputs");
    if (epoch >= history->impl.epochs.size()) {
      throw fae::ConfigError("epoch index out of range");
    }
    *train_loss = history->impl.epochs[epoch].train_loss;
    *val_loss = history->impl.epochs[epoch].val_loss;
  });
}

fae_status fae_history_save_csv(const fae_history* history, const char* path) {
  return guarded([&] {
    require(history && path, "history/path");
    fae::write_history_csv(history->impl, path);
  });
}

/* ------------------------------------------------------------------ */

void fae_search_opts_defaults(fae_search_opts* opts) {
  if (!opts) return;
  opts->budget = 50;
  opts->trial_epochs = 10;
  opts->patience = 3;
  opts->stride = 1;
  opts->beta = 1.0;
  opts->seed = 1;
  opts->t_min = 128;
  opts->t_max = 512;
  opts->t_step = 32;
  opts->j_min = 16;
  opts->j_step = 16;
  opts->gamma_min = 1e-5;
  opts->gamma_max = 5e-4;
  opts->m_min = 16;
  opts->m_max = 96;
  opts->m_step = 16;
  opts->u_min = 16;
  opts->u_max = 128;
  opts->u_step = 16;
}

fae_status fae_search(const fae_dataset* dataset, const fae_search_opts* opts,
                      fae_leaderboard** out) {
  return guarded([&] {
    require(dataset && opts && out, "dataset/opts/out");
    fae::SearchConfig config;
    config.budget = positive_size(opts->budget, "budget");
    config.trial_epochs = positive_size(opts->trial_epochs, "trial_epochs");
    config.patience = positive_size(opts->patience, "patience");
    config.stride_train = positive_size(opts->stride, "stride");
    config.beta = opts->beta;
    config.seed = opts->seed;
    config.space.T_min = positive_size(opts->t_min, "t_min");
    config.space.T_max = positive_size(opts->t_max, "t_max");
    config.space.T_step = positive_size(opts->t_step, "t_step");
    config.space.J_min = positive_size(opts->j_min, "j_min");
    config.space.J_step = positive_size(opts->j_step, "j_step");
    config.space.gamma_min = opts->gamma_min;
    config.space.gamma_max = opts->gamma_max;
    config.space.m_min = positive_size(opts->m_min, "m_min");
    config.space.m_max = positive_size(opts->m_max, "m_max");
    config.space.m_step = positive_size(opts->m_step, "m_step");
    config.space.U_min = positive_size(opts->u_min, "u_min");
    config.space.U_max = positive_size(opts->u_max, "u_max");
    config.space.U_step = positive_size(opts->u_step, "u_step");
    *out = new fae_leaderboard{
        fae::hyperparameter_search(dataset->records, config)};
  });
}

void fae_leaderboard_free(fae_leaderboard* leaderboard) { delete leaderboard; }

fae_status fae_leaderboard_count(const fae_leaderboard* leaderboard,
                                 size_t* out) {
  return guarded([&] {
    require(leaderboard && out, "leaderboard/out");
    *out = leaderboard->impl.size();
  });
}

fae_status fae_leaderboard_entry(const fae_leaderboard* leaderboard,
                                 size_t index, fae_hyper* hyper,
                                 double* val_loss, int64_t* params) {
  return guarded([&] {
    require(leaderboard, "leaderboard");
    if (index >= leaderboard->impl.size()) {
      throw fae::ConfigError("leaderboard index out of range");
    }
    const fae::TrialResult& r = leaderboard->impl[index];
    if (hyper) {
      fae_hyper_defaults(hyper);
      hyper->T = static_cast<int64_t>(r.hyper.T);
      hyper->J = static_cast<int64_t>(r.hyper.J);
      hyper->U = static_cast<int64_t>(r.hyper.U);
      hyper->F = static_cast<int64_t>(r.hyper.F);
      hyper->gamma = r.hyper.gamma;
      hyper->m = static_cast<int64_t>(r.hyper.m);
      hyper->beta = r.hyper.beta;
    }
    if (val_loss) *val_loss = r.val_loss;
    if (params) *params = static_cast<int64_t>(r.params);
  });
}

fae_status fae_leaderboard_save_csv(const fae_leaderboard* leaderboard,
                                    const char* path) {
  return guarded([&] {
    require(leaderboard && path, "leaderboard/path");
    fae::write_leaderboard_csv(leaderboard->impl, path);
  });
}

/* ------------------------------------------------------------------ */

fae_status fae_detect(const fae_model* model, const fae_dataset* dataset,
                      const char* series_id, double alpha,
                      fae_detection** out) {
  return guarded([&] {
    require(model && dataset && series_id && out, "model/dataset/id/out");
    const fae::SeriesRecord& series = find_series(*dataset, series_id);
    *out = new fae_detection{fae::score_online(model->impl, series, alpha)};
  });
}

void fae_detection_free(fae_detection* detection) { delete detection; }

fae_status fae_detection_count(const fae_detection* detection, size_t* out) {
  return guarded([&] {
    require(detection && out, "detection/out");
    *out = detection->impl.size();
  });
}

fae_status fae_detection_entry(const fae_detection* detection, size_t index,
                               fae_detection_row* out) {
  return guarded([&] {
    require(detection && out, "detection/out");
    if (index >= detection->impl.size()) {
      throw fae::ConfigError("detection index out of range");
    }
    const fae::DetectionResult& r = detection->impl;
    out->t = static_cast<int64_t>(r.t[index]);
    out->timestamp = r.timestamps[index];
    out->x = r.x[index];
    out->mu = r.mu[index];
    out->sigma = r.sigma[index];
    out->score = r.score[index];
    out->flag = r.flag[index];
  });
}

fae_status fae_detection_save_csv(const fae_detection* detection,
                                  const char* path) {
  return guarded([&] {
    require(detection && path, "detection/path");
    fae::write_detection_csv(detection->impl, path);
  });
}

fae_status fae_calibrate_alpha(const fae_model* model,
                               const fae_dataset* dataset,
                               const char* series_id, const double* grid,
                               size_t n_grid, double alpha_default,
                               double* out_alpha, int* out_calibrated) {
  return guarded([&] {
    require(model && dataset && series_id && out_alpha,
            "model/dataset/id/out_alpha");
    require(n_grid == 0 || grid, "grid");
    const fae::SeriesRecord& series = find_series(*dataset, series_id);
    const std::vector<double> grid_vec(grid, grid + n_grid);
    const fae::AlphaCalibration cal =
        fae::calibrate_alpha(model->impl, series, grid_vec, alpha_default);
    *out_alpha = cal.alpha;
    if (out_calibrated) *out_calibrated = cal.calibrated ? 1 : 0;
  });
}

fae_status fae_evaluate(const fae_model* model, const fae_dataset* dataset,
                        const double* alpha_grid, size_t n_grid,
                        double fixed_alpha, fae_eval_table** out) {
  return guarded([&] {
    require(model && dataset && out, "model/dataset/out");
    require(n_grid == 0 || alpha_grid, "alpha_grid");
    const std::vector<double> grid(alpha_grid, alpha_grid + n_grid);
    *out = new fae_eval_table{
        fae::evaluate_dataset(model->impl, dataset->records, grid, fixed_alpha)};
  });
}

void fae_eval_table_free(fae_eval_table* table) { delete table; }

fae_status fae_eval_table_count(const fae_eval_table* table, size_t* out) {
  return guarded([&] {
    require(table && out, "table/out");
    *out = table->impl.size();
  });
}

fae_status fae_eval_table_entry(const fae_eval_table* table, size_t index,
                                fae_eval_row* out) {
  return guarded([&] {
    require(table && out, "table/out");
    if (index >= table->impl.size()) {
      throw fae::ConfigError("eval table index out of range");
    }
    const fae::EvalRow& r = table->impl[index];
    out->series_id = r.series_id.c_str();
    out->alpha = r.alpha;
    out->tp = static_cast<int64_t>(r.report.tp);
    out->fp = static_cast<int64_t>(r.report.fp);
    out->fn = static_cast<int64_t>(r.report.fn);
    out->tn = static_cast<int64_t>(r.report.tn);
    out->precision = r.report.precision;
    out->recall = r.report.recall;
    out->f1 = r.report.f1;
  });
}

fae_status fae_eval_table_save_csv(const fae_eval_table* table,
                                   const char* path) {
  return guarded([&] {
    require(table && path, "table/path");
    fae::write_eval_csv(table->impl, path);
  });
}

/* ------------------------------------------------------------------ */

fae_status fae_zeroshot(const fae_dataset* dataset,
                        const char* const* leave_out, size_t n_leave,
                        const fae_hyper* hyper,
                        const fae_train_opts* train_opts, double alpha,
                        fae_zs_report** out) {
  return guarded([&] {
    require(dataset && hyper && train_opts && out, "dataset/hyper/opts/out");
    require(n_leave == 0 || leave_out, "leave_out");
    std::vector<std::string> excluded;
    for (size_t i = 0; i < n_leave; ++i) {
      require(leave_out[i], "leave_out entry");
      excluded.emplace_back(leave_out[i]);
    }
    *out = new fae_zs_report{
        fae::zero_shot_run(dataset->records, excluded, to_hyper(*hyper),
                           to_train_config(*train_opts), alpha)};
  });
}

void fae_zs_report_free(fae_zs_report* report) { delete report; }

fae_status fae_zs_report_count(const fae_zs_report* report, size_t* out) {
  return guarded([&] {
    require(report && out, "report/out");
    *out = report->impl.series.size();
  });
}

fae_status fae_zs_report_entry(const fae_zs_report* report, size_t index,
                               fae_zs_row* out) {
  return guarded([&] {
    require(report && out, "report/out");
    if (index >= report->impl.series.size()) {
      throw fae::ConfigError("zero-shot report index out of range");
    }
    const fae::ZeroShotSeriesReport& r = report->impl.series[index];
    out->series_id = r.series_id.c_str();
    out->held_out = r.held_out ? 1 : 0;
    out->test_nll = r.test_nll;
    out->coverage3 = r.coverage3;
    out->alpha = r.alpha;
    out->f1 = r.f1;
  });
}

fae_status fae_zs_report_save_csv(const fae_zs_report* report,
                                  const char* path) {
  return guarded([&] {
    require(report && path, "report/path");
    fae::write_zeroshot_csv(report->impl.series, path);
  });
}

/* ------------------------------------------------------------------ */

fae_status fae_latent_project(const fae_model* model,
                              const fae_dataset* dataset, int64_t k,
                              int64_t stride, int64_t samples_per_day,
                              int64_t days_per_week, fae_latent_table** out) {
  return guarded([&] {
    require(model && dataset && out, "model/dataset/out");
    const fae::LatentMatrix matrix = fae::encode_dataset(
        model->impl, dataset->records, positive_size(stride, "stride"));
    const fae::PcaProjection projection =
        fae::pca_project(matrix, positive_size(k, "k"));
    fae::Clock clock;
    clock.samples_per_day = positive_size(samples_per_day, "samples_per_day");
    clock.days_per_week = positive_size(days_per_week, "days_per_week");
    *out = new fae_latent_table{
        fae::annotate_projections(projection, matrix, clock)};
  });
}

void fae_latent_table_free(fae_latent_table* table) { delete table; }

fae_status fae_latent_table_count(const fae_latent_table* table, size_t* out) {
  return guarded([&] {
    require(table && out, "table/out");
    *out = table->impl.size();
  });
}

fae_status fae_latent_table_entry(const fae_latent_table* table, size_t index,
                                  fae_latent_row* out) {
  return guarded([&] {
    require(table && out, "table/out");
    if (index >= table->impl.size()) {
      throw fae::ConfigError("latent table index out of range");
    }
    const fae::AnnotatedRow& r = table->impl[index];
    out->series_id = r.series_id.c_str();
    out->t = static_cast<int64_t>(r.t);
    out->timestamp = r.timestamp;
    out->pc1 = r.pc1;
    out->pc2 = r.pc2;
    out->pc3 = r.pc3;
    out->hour_bucket = r.hour_bucket;
    out->weekend = r.weekend;
    out->day = r.day;
    out->radius = r.radius;
  });
}

fae_status fae_latent_table_save_csv(const fae_latent_table* table,
                                     const char* path) {
  return guarded([&] {
    require(table && path, "table/path");
    fae::write_latent_csv(table->impl, path);
  });
}

}  // extern "C"
