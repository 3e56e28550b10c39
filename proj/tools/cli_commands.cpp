#include "cli_commands.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <vector>

#include "fae/fae.h"

namespace faecli {

namespace {

void check(fae_status status) {
  if (status != FAE_OK) {
    throw CliError(static_cast<int>(status), fae_last_error());
  }
}

struct DatasetDeleter {
  void operator()(fae_dataset* p) const { fae_dataset_free(p); }
};
struct ModelDeleter {
  void operator()(fae_model* p) const { fae_model_free(p); }
};
struct HistoryDeleter {
  void operator()(fae_history* p) const { fae_history_free(p); }
};
struct LeaderboardDeleter {
  void operator()(fae_leaderboard* p) const { fae_leaderboard_free(p); }
};
struct DetectionDeleter {
  void operator()(fae_detection* p) const { fae_detection_free(p); }
};
struct EvalDeleter {
  void operator()(fae_eval_table* p) const { fae_eval_table_free(p); }
};
struct ZsDeleter {
  void operator()(fae_zs_report* p) const { fae_zs_report_free(p); }
};
struct LatentDeleter {
  void operator()(fae_latent_table* p) const { fae_latent_table_free(p); }
};

using DatasetPtr = std::unique_ptr<fae_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<fae_model, ModelDeleter>;
using HistoryPtr = std::unique_ptr<fae_history, HistoryDeleter>;
using LeaderboardPtr = std::unique_ptr<fae_leaderboard, LeaderboardDeleter>;
using DetectionPtr = std::unique_ptr<fae_detection, DetectionDeleter>;
using EvalPtr = std::unique_ptr<fae_eval_table, EvalDeleter>;
using ZsPtr = std::unique_ptr<fae_zs_report, ZsDeleter>;
using LatentPtr = std::unique_ptr<fae_latent_table, LatentDeleter>;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string token;
  while (std::getline(ss, token, sep)) out.push_back(token);
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

std::string out_path(const RunConfig& config, const std::string& name) {
  const std::string dir = config.get_string("out_dir");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw CliError(6, "cannot create output directory: " + dir);
  return (std::filesystem::path(dir) / name).string();
}

std::string model_path(const RunConfig& config) {
  const std::string explicit_path = config.get_string("model");
  if (!explicit_path.empty()) return explicit_path;
  return out_path(config, "model.fae");
}

std::string sanitize_id(const std::string& id) {
  std::string out = id;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

fae_hyper hyper_from(const RunConfig& config) {
  fae_hyper hyper;
  fae_hyper_defaults(&hyper);
  hyper.T = config.get_int("T");
  hyper.J = config.get_int("J");
  hyper.U = config.get_int("U");
  hyper.F = config.get_int("F");
  hyper.gamma = config.get_double("gamma");
  hyper.m = config.get_int("m");
  hyper.beta = config.get_double("beta");
  hyper.alpha = config.get_double("alpha");
  return hyper;
}

fae_train_opts train_opts_from(const RunConfig& config) {
  fae_train_opts opts;
  fae_train_opts_defaults(&opts);
  opts.gamma = config.get_double("gamma");
  opts.m = config.get_int("m");
  opts.max_epochs = config.get_int("max_epochs");
  opts.patience = config.get_int("patience");
  opts.seed = static_cast<uint64_t>(config.get_int("seed"));
  opts.beta = config.get_double("beta");
  opts.stride = config.get_int("stride");
  return opts;
}

DatasetPtr load_dataset(const RunConfig& config) {
  fae_dataset* raw = nullptr;
  check(fae_dataset_create(&raw));
  DatasetPtr dataset(raw);

  bool loaded = false;
  const std::string csv = config.get_string("data.csv");
  if (!csv.empty()) {
    const std::string label_col = config.get_string("csv.label_col");
    const std::string gap_policy = config.get_string("csv.gap_policy");
    if (gap_policy != "reject" && gap_policy != "interpolate") {
      throw CliError(2, "csv.gap_policy must be 'reject' or 'interpolate'");
    }
    check(fae_dataset_load_csv(
        dataset.get(), csv.c_str(), config.get_string("csv.time_col").c_str(),
        config.get_string("csv.id_col").c_str(),
        config.get_string("csv.value_col").c_str(),
        label_col.empty() ? nullptr : label_col.c_str(),
        gap_policy == "interpolate" ? 1 : 0));
    loaded = true;
  }
  const std::string ucr = config.get_string("data.ucr");
  if (!ucr.empty()) {
    for (const std::string& path : split(ucr, ';')) {
      if (path.empty()) continue;
      check(fae_dataset_load_ucr(dataset.get(), path.c_str()));
      loaded = true;
    }
  }
  if (!loaded) {
    throw CliError(2, "no input data configured (set data.csv or data.ucr)");
  }
  check(fae_dataset_split(dataset.get(), config.get_double("train_frac"),
                          config.get_double("val_frac")));
  return dataset;
}

ModelPtr load_model(const RunConfig& config) {
  fae_model* raw = nullptr;
  check(fae_model_load(model_path(config).c_str(), &raw));
  return ModelPtr(raw);
}

std::vector<std::string> dataset_ids(const fae_dataset* dataset) {
  size_t count = 0;
  check(fae_dataset_count(dataset, &count));
  std::vector<std::string> ids;
  for (size_t i = 0; i < count; ++i) {
    const char* id = nullptr;
    check(fae_dataset_id(dataset, i, &id));
    ids.emplace_back(id);
  }
  return ids;
}

// ---------------------------------------------------------------------

int cmd_synth(const RunConfig& config) {
  const auto groups = config.synth_groups();
  if (groups.empty()) {
    throw CliError(2, "synth needs at least one series.<n>.length key");
  }
  fae_dataset* raw = nullptr;
  check(fae_dataset_create(&raw));
  DatasetPtr dataset(raw);
  for (const auto& fields : groups) {
    fae_synth_opts opts;
    fae_synth_opts_defaults(&opts);
    const std::string id = fields.at("id");
    opts.id = id.c_str();
    opts.length = std::strtoll(fields.at("length").c_str(), nullptr, 10);
    opts.period = std::strtod(fields.at("period").c_str(), nullptr);
    opts.amplitude = std::strtod(fields.at("amplitude").c_str(), nullptr);
    opts.weekend_scale =
        std::strtod(fields.at("weekend_scale").c_str(), nullptr);
    opts.trend_per_period =
        std::strtod(fields.at("trend_per_period").c_str(), nullptr);
    opts.noise_std = std::strtod(fields.at("noise_std").c_str(), nullptr);
    opts.seed =
        static_cast<uint64_t>(std::strtoll(fields.at("seed").c_str(), nullptr, 10));

    // spikes: `pos:mag;pos:mag`
    std::vector<int64_t> positions;
    std::vector<double> magnitudes;
    for (const std::string& term : split(fields.at("spikes"), ';')) {
      if (term.empty()) continue;
      const std::size_t colon = term.find(':');
      if (colon == std::string::npos) {
        throw CliError(2, "spike term '" + term + "': expected pos:magnitude");
      }
      positions.push_back(std::strtoll(term.substr(0, colon).c_str(), nullptr, 10));
      magnitudes.push_back(std::strtod(term.substr(colon + 1).c_str(), nullptr));
    }
    opts.spike_positions = positions.empty() ? nullptr : positions.data();
    opts.spike_magnitudes = magnitudes.empty() ? nullptr : magnitudes.data();
    opts.n_spikes = positions.size();
    check(fae_dataset_add_synth(dataset.get(), &opts));
  }
  check(fae_dataset_save_csv(dataset.get(), out_path(config, "series.csv").c_str()));
  return 0;
}

int cmd_train(const RunConfig& config) {
  DatasetPtr dataset = load_dataset(config);
  const fae_hyper hyper = hyper_from(config);
  fae_model* raw_model = nullptr;
  check(fae_model_build(&hyper, static_cast<uint64_t>(config.get_int("seed")),
                        &raw_model));
  ModelPtr model(raw_model);
  const fae_train_opts opts = train_opts_from(config);
  fae_history* raw_history = nullptr;
  check(fae_train(model.get(), dataset.get(), &opts, &raw_history));
  HistoryPtr history(raw_history);
  check(fae_model_save(model.get(), model_path(config).c_str()));
  check(fae_history_save_csv(history.get(),
                             out_path(config, "history.csv").c_str()));
  return 0;
}

int cmd_search(const RunConfig& config) {
  DatasetPtr dataset = load_dataset(config);
  fae_search_opts opts;
  fae_search_opts_defaults(&opts);
  opts.budget = config.get_int("search.budget");
  opts.trial_epochs = config.get_int("search.epochs");
  opts.patience = config.get_int("search.patience");
  opts.stride = config.get_int("stride");
  opts.beta = config.get_double("beta");
  opts.seed = static_cast<uint64_t>(config.get_int("seed"));
  opts.t_min = config.get_int("search.t_min");
  opts.t_max = config.get_int("search.t_max");
  opts.t_step = config.get_int("search.t_step");
  opts.j_min = config.get_int("search.j_min");
  opts.j_step = config.get_int("search.j_step");
  opts.gamma_min = config.get_double("search.gamma_min");
  opts.gamma_max = config.get_double("search.gamma_max");
  opts.m_min = config.get_int("search.m_min");
  opts.m_max = config.get_int("search.m_max");
  opts.m_step = config.get_int("search.m_step");
  opts.u_min = config.get_int("search.u_min");
  opts.u_max = config.get_int("search.u_max");
  opts.u_step = config.get_int("search.u_step");
  fae_leaderboard* raw = nullptr;
  check(fae_search(dataset.get(), &opts, &raw));
  LeaderboardPtr leaderboard(raw);
  check(fae_leaderboard_save_csv(leaderboard.get(),
                                 out_path(config, "leaderboard.csv").c_str()));
  return 0;
}

int cmd_detect(const RunConfig& config) {
  ModelPtr model = load_model(config);
  DatasetPtr dataset = load_dataset(config);
  const double alpha = config.get_double("alpha");
  for (const std::string& id : dataset_ids(dataset.get())) {
    fae_detection* raw = nullptr;
    check(fae_detect(model.get(), dataset.get(), id.c_str(), alpha, &raw));
    DetectionPtr detection(raw);
    check(fae_detection_save_csv(
        detection.get(),
        out_path(config, "scores_" + sanitize_id(id) + ".csv").c_str()));
  }
  return 0;
}

int cmd_eval(const RunConfig& config) {
  ModelPtr model = load_model(config);
  DatasetPtr dataset = load_dataset(config);
  std::vector<double> grid;
  if (config.get_bool("eval.calibrate")) {
    grid = config.get_double_list("alpha_grid");
  }
  fae_eval_table* raw = nullptr;
  check(fae_evaluate(model.get(), dataset.get(),
                     grid.empty() ? nullptr : grid.data(), grid.size(),
                     config.get_double("alpha"), &raw));
  EvalPtr table(raw);
  check(fae_eval_table_save_csv(table.get(),
                                out_path(config, "metrics.csv").c_str()));
  return 0;
}

int cmd_latent(const RunConfig& config) {
  ModelPtr model = load_model(config);
  DatasetPtr dataset = load_dataset(config);
  fae_latent_table* raw = nullptr;
  check(fae_latent_project(model.get(), dataset.get(),
                           config.get_int("latent.k"),
                           config.get_int("latent.stride"),
                           config.get_int("clock.samples_per_day"),
                           config.get_int("clock.days_per_week"), &raw));
  LatentPtr table(raw);
  check(fae_latent_table_save_csv(table.get(),
                                  out_path(config, "latent.csv").c_str()));
  return 0;
}

int cmd_zeroshot(const RunConfig& config) {
  DatasetPtr dataset = load_dataset(config);
  const fae_hyper hyper = hyper_from(config);
  const fae_train_opts opts = train_opts_from(config);
  const double alpha = config.get_double("alpha");

  // `zeroshot.runs` = semicolon-separated runs, each a comma-separated
  // leave-out list; an empty run leaves nothing out.
  std::vector<std::vector<std::string>> runs;
  const std::string raw_runs = config.get_string("zeroshot.runs");
  if (raw_runs.empty()) {
    runs.push_back({});
  } else {
    for (const std::string& run : split(raw_runs, ';')) {
      std::vector<std::string> ids;
      for (const std::string& id : split(run, ',')) {
        if (!id.empty()) ids.push_back(id);
      }
      runs.push_back(std::move(ids));
    }
  }

  for (std::size_t k = 0; k < runs.size(); ++k) {
    std::vector<const char*> leave;
    leave.reserve(runs[k].size());
    for (const std::string& id : runs[k]) leave.push_back(id.c_str());
    fae_zs_report* raw = nullptr;
    check(fae_zeroshot(dataset.get(), leave.empty() ? nullptr : leave.data(),
                       leave.size(), &hyper, &opts, alpha, &raw));
    ZsPtr report(raw);
    check(fae_zs_report_save_csv(
        report.get(),
        out_path(config, "zeroshot_" + std::to_string(k + 1) + ".csv").c_str()));
  }
  return 0;
}

int cmd_info(const RunConfig& config) {
  if (config.is_set("model")) {
    ModelPtr model = load_model(config);
    fae_model_info info;
    check(fae_model_get_info(model.get(), &info));
    std::cout << "T=" << info.T << "\nJ=" << info.J << "\nU=" << info.U
              << "\nF=" << info.F << "\nbeta=" << info.beta
              << "\nnormalizers=" << info.n_normalizers << "\n"
              << "N=" << info.N << " params=" << info.params << "\n";
    return 0;
  }
  const fae_hyper hyper = hyper_from(config);
  int64_t depth = 0;
  check(fae_derive_depth(hyper.T, hyper.F, &depth));
  int64_t params = 0;
  check(fae_param_count(&hyper, &params));
  std::cout << "N=" << depth << " params=" << params << "\n";
  return 0;
}

}  // namespace

int dispatch(const std::string& command, const RunConfig& config) {
  try {
    if (command == "synth") return cmd_synth(config);
    if (command == "train") return cmd_train(config);
    if (command == "search") return cmd_search(config);
    if (command == "detect") return cmd_detect(config);
    if (command == "eval") return cmd_eval(config);
    if (command == "latent") return cmd_latent(config);
    if (command == "zeroshot") return cmd_zeroshot(config);
    if (command == "info") return cmd_info(config);
    throw CliError(2, "unknown command '" + command + "'");
  } catch (const CliError& e) {
    std::cerr << "error: " << family_name(e.exit_code()) << ": " << e.what()
              << std::endl;
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << std::endl;
    return 1;
  }
}

}  // namespace faecli
