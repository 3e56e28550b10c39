#include "fae/fae.h"

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"

namespace {

fae_dataset* make_labeled_dataset(int64_t length = 200, uint64_t seed = 3) {
  fae_dataset* ds = nullptr;
  REQUIRE(fae_dataset_create(&ds) == FAE_OK);
  fae_synth_opts synth;
  fae_synth_opts_defaults(&synth);
  synth.id = "wave";
  synth.length = length;
  synth.period = 16;
  synth.noise_std = 0.05;
  synth.seed = seed;
  REQUIRE(fae_dataset_add_synth(ds, &synth) == FAE_OK);
  REQUIRE(fae_dataset_split(ds, 0.5, 0.25) == FAE_OK);
  return ds;
}

}  // namespace

TEST_CASE("capi: version and architecture arithmetic") {
  CHECK(std::string(fae_version()) == "0.1.0");

  int64_t n = 0;
  CHECK(fae_derive_depth(256, 2, &n) == FAE_OK);
  CHECK(n == 8);
  CHECK(fae_derive_depth(8, 2, &n) == FAE_OK);
  CHECK(n == 3);

  fae_hyper hyper;
  fae_hyper_defaults(&hyper);
  CHECK(hyper.T == 256);
  CHECK(hyper.J == 48);
  CHECK(hyper.U == 128);
  CHECK(hyper.gamma == 6e-5);
  CHECK(hyper.m == 32);
  int64_t params = 0;
  CHECK(fae_param_count(&hyper, &params) == FAE_OK);
  CHECK(params == 483840);
}

TEST_CASE("capi: error reporting via status codes and fae_last_error") {
  CHECK(fae_derive_depth(8, 2, nullptr) == FAE_ERR_CONFIG);
  CHECK(std::string(fae_last_error()).find("null") != std::string::npos);

  fae_hyper bad;
  fae_hyper_defaults(&bad);
  bad.J = 300;  // J >= T
  int64_t params = 0;
  CHECK(fae_param_count(&bad, &params) == FAE_ERR_CONFIG);

  fae_model* model = nullptr;
  CHECK(fae_model_load("/no/such/file.fae", &model) == FAE_ERR_IO);

  // Success clears the message.
  int64_t n = 0;
  CHECK(fae_derive_depth(8, 2, &n) == FAE_OK);
  CHECK(std::string(fae_last_error()).empty());
}

TEST_CASE("capi: dataset lifecycle") {
  testutil::TempDir dir("capi_ds");
  fae_dataset* ds = make_labeled_dataset();

  size_t count = 0;
  CHECK(fae_dataset_count(ds, &count) == FAE_OK);
  CHECK(count == 1);
  const char* id = nullptr;
  CHECK(fae_dataset_id(ds, 0, &id) == FAE_OK);
  CHECK(std::string(id) == "wave");
  size_t length = 0;
  CHECK(fae_dataset_series_length(ds, "wave", &length) == FAE_OK);
  CHECK(length == 200);
  CHECK(fae_dataset_series_length(ds, "nope", &length) == FAE_ERR_CONFIG);

  const std::string csv = dir.file("series.csv");
  CHECK(fae_dataset_save_csv(ds, csv.c_str()) == FAE_OK);

  fae_dataset* reloaded = nullptr;
  CHECK(fae_dataset_create(&reloaded) == FAE_OK);
  CHECK(fae_dataset_load_csv(reloaded, csv.c_str(), "timestamp", "id", "value",
                             "label", 0) == FAE_OK);
  CHECK(fae_dataset_count(reloaded, &count) == FAE_OK);
  CHECK(count == 1);
  fae_dataset_free(reloaded);
  fae_dataset_free(ds);
}

TEST_CASE("capi: ucr loading") {
  testutil::TempDir dir("capi_ucr");
  std::string body;
  for (int i = 0; i < 60; ++i) body += std::to_string(i * 0.1) + "\n";
  const std::string path = dir.file("probe_30_40_45.txt");
  testutil::write_text(path, body);

  fae_dataset* ds = nullptr;
  REQUIRE(fae_dataset_create(&ds) == FAE_OK);
  CHECK(fae_dataset_load_ucr(ds, path.c_str()) == FAE_OK);
  size_t length = 0;
  CHECK(fae_dataset_series_length(ds, "probe", &length) == FAE_OK);
  CHECK(length == 60);
  CHECK(fae_dataset_load_ucr(ds, dir.file("missing_10_20_30.txt").c_str()) ==
        FAE_ERR_IO);
  CHECK(fae_dataset_load_ucr(ds, dir.file("badname.txt").c_str()) ==
        FAE_ERR_FORMAT);
  fae_dataset_free(ds);
}

TEST_CASE("capi: model build, info, persistence, encode/decode") {
  testutil::TempDir dir("capi_model");
  fae_hyper hyper;
  fae_hyper_defaults(&hyper);
  hyper.T = 16;
  hyper.J = 4;
  hyper.U = 4;

  fae_model* model = nullptr;
  REQUIRE(fae_model_build(&hyper, 7, &model) == FAE_OK);

  fae_model_info info;
  CHECK(fae_model_get_info(model, &info) == FAE_OK);
  CHECK(info.T == 16);
  CHECK(info.N == 4);
  CHECK(info.params > 0);
  CHECK(info.n_normalizers == 0);

  std::vector<double> window(16, 0.5);
  std::vector<double> mu_z(4), logsigma_z(4);
  CHECK(fae_model_encode(model, window.data(), window.size(), mu_z.data(),
                         logsigma_z.data()) == FAE_OK);
  CHECK(fae_model_encode(model, window.data(), 15, mu_z.data(),
                         logsigma_z.data()) == FAE_ERR_SHAPE);

  std::vector<double> mu_x(16), sigma_x(16);
  CHECK(fae_model_decode(model, mu_z.data(), mu_z.size(), mu_x.data(),
                         sigma_x.data()) == FAE_OK);
  for (const double s : sigma_x) CHECK(s > 0.0);
  CHECK(fae_model_decode(model, mu_z.data(), 3, mu_x.data(), sigma_x.data()) ==
        FAE_ERR_SHAPE);

  const std::string path = dir.file("m.fae");
  CHECK(fae_model_save(model, path.c_str()) == FAE_OK);
  fae_model* loaded = nullptr;
  CHECK(fae_model_load(path.c_str(), &loaded) == FAE_OK);
  std::vector<double> mu_z2(4), logsigma_z2(4);
  CHECK(fae_model_encode(loaded, window.data(), window.size(), mu_z2.data(),
                         logsigma_z2.data()) == FAE_OK);
  CHECK(mu_z == mu_z2);

  // Truncation is detected as corruption.
  std::string bytes = testutil::read_text(path);
  bytes.resize(bytes.size() - 8);
  testutil::write_text(path, bytes);
  fae_model* corrupt = nullptr;
  CHECK(fae_model_load(path.c_str(), &corrupt) == FAE_ERR_FORMAT);

  fae_model_free(loaded);
  fae_model_free(model);
}

TEST_CASE("capi: train, detect, evaluate, latent, zeroshot") {
  testutil::TempDir dir("capi_flow");
  fae_dataset* ds = make_labeled_dataset(240, 5);

  fae_hyper hyper;
  fae_hyper_defaults(&hyper);
  hyper.T = 16;
  hyper.J = 4;
  hyper.U = 4;

  fae_model* model = nullptr;
  REQUIRE(fae_model_build(&hyper, 11, &model) == FAE_OK);

  fae_train_opts opts;
  fae_train_opts_defaults(&opts);
  opts.gamma = 1e-3;
  opts.m = 16;
  opts.max_epochs = 4;
  opts.patience = 4;
  opts.seed = 2;

  fae_history* history = nullptr;
  REQUIRE(fae_train(model, ds, &opts, &history) == FAE_OK);
  size_t epochs = 0;
  CHECK(fae_history_count(history, &epochs) == FAE_OK);
  CHECK(epochs >= 1);
  double tl = 0.0, vl = 0.0;
  CHECK(fae_history_entry(history, 0, &tl, &vl) == FAE_OK);
  CHECK(std::isfinite(tl));
  CHECK(fae_history_save_csv(history, dir.file("history.csv").c_str()) ==
        FAE_OK);

  fae_model_info info;
  CHECK(fae_model_get_info(model, &info) == FAE_OK);
  CHECK(info.n_normalizers == 1);

  // Detection covers L - T + 1 arrivals.
  fae_detection* detection = nullptr;
  REQUIRE(fae_detect(model, ds, "wave", 3.0, &detection) == FAE_OK);
  size_t rows = 0;
  CHECK(fae_detection_count(detection, &rows) == FAE_OK);
  CHECK(rows == 240 - 16 + 1);
  fae_detection_row row;
  CHECK(fae_detection_entry(detection, 0, &row) == FAE_OK);
  CHECK(row.t == 15);
  CHECK(row.sigma > 0.0);
  CHECK(fae_detection_save_csv(detection, dir.file("scores.csv").c_str()) ==
        FAE_OK);
  fae_detection_free(detection);

  double alpha = 0.0;
  int calibrated = -1;
  const double grid[] = {1, 2, 3, 4, 5, 6};
  CHECK(fae_calibrate_alpha(model, ds, "wave", grid, 6, 3.0, &alpha,
                            &calibrated) == FAE_OK);
  CHECK(calibrated == 0);  // clean series: no positive validation labels
  CHECK(alpha == 3.0);

  fae_eval_table* eval = nullptr;
  REQUIRE(fae_evaluate(model, ds, nullptr, 0, 3.0, &eval) == FAE_OK);
  size_t eval_rows = 0;
  CHECK(fae_eval_table_count(eval, &eval_rows) == FAE_OK);
  CHECK(eval_rows == 2);  // series + pooled
  fae_eval_row erow;
  CHECK(fae_eval_table_entry(eval, 1, &erow) == FAE_OK);
  CHECK(std::string(erow.series_id) == "ALL");
  CHECK(fae_eval_table_save_csv(eval, dir.file("metrics.csv").c_str()) ==
        FAE_OK);
  fae_eval_table_free(eval);

  fae_latent_table* latent = nullptr;
  REQUIRE(fae_latent_project(model, ds, 3, 4, 16, 7, &latent) == FAE_OK);
  size_t latent_rows = 0;
  CHECK(fae_latent_table_count(latent, &latent_rows) == FAE_OK);
  CHECK(latent_rows > 0);
  fae_latent_row lrow;
  CHECK(fae_latent_table_entry(latent, 0, &lrow) == FAE_OK);
  CHECK(lrow.radius >= 0.0);
  CHECK(fae_latent_table_save_csv(latent, dir.file("latent.csv").c_str()) ==
        FAE_OK);
  fae_latent_table_free(latent);

  fae_history_free(history);
  fae_model_free(model);

  // Zero-shot over two series.
  fae_synth_opts synth;
  fae_synth_opts_defaults(&synth);
  synth.id = "wave2";
  synth.length = 240;
  synth.period = 16;
  synth.noise_std = 0.05;
  synth.seed = 9;
  REQUIRE(fae_dataset_add_synth(ds, &synth) == FAE_OK);
  REQUIRE(fae_dataset_split(ds, 0.5, 0.25) == FAE_OK);

  const char* leave[] = {"wave2"};
  fae_zs_report* report = nullptr;
  REQUIRE(fae_zeroshot(ds, leave, 1, &hyper, &opts, 3.0, &report) == FAE_OK);
  size_t zs_rows = 0;
  CHECK(fae_zs_report_count(report, &zs_rows) == FAE_OK);
  CHECK(zs_rows == 2);
  fae_zs_row zrow;
  CHECK(fae_zs_report_entry(report, 1, &zrow) == FAE_OK);
  CHECK(std::string(zrow.series_id) == "wave2");
  CHECK(zrow.held_out == 1);
  CHECK(std::isfinite(zrow.test_nll));
  CHECK(fae_zs_report_save_csv(report, dir.file("zeroshot.csv").c_str()) ==
        FAE_OK);
  fae_zs_report_free(report);
  fae_dataset_free(ds);
}
