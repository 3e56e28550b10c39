#pragma once

#include <string>
#include <vector>

#include "fae/data.hpp"
#include "fae/model.hpp"
#include "fae/trainer.hpp"

namespace fae {

// Applied to sigma in normalized units before any division.
constexpr double kSigmaFloor = 1e-3;

// Per-timestep scoring table for one series; entries cover the scored region
// only. mu and sigma are reported in original units.
struct DetectionResult {
  std::string series_id;
  double alpha = 0.0;
  bool fallback_normalizer = false;
  std::vector<std::size_t> t;
  std::vector<std::int64_t> timestamps;
  std::vector<double> x;
  std::vector<double> mu;
  std::vector<double> sigma;
  std::vector<double> score;
  std::vector<std::uint8_t> flag;

  std::size_t size() const { return t.size(); }
};

// One score per arrival: the window ending at t is encoded with epsilon = 0
// and position T-1 of the decoded band gives (mu_t, sigma_t).
DetectionResult score_online(const FaeModel& model, const SeriesRecord& series,
                             double alpha);

// Same, restricted to t in [begin_t, end_t); windows may read earlier history.
DetectionResult score_range(const FaeModel& model, const SeriesRecord& series,
                            double alpha, std::size_t begin_t,
                            std::size_t end_t);

struct EvalReport {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

EvalReport evaluate_pointwise(const std::vector<std::uint8_t>& flags,
                              const std::vector<std::uint8_t>& labels);

EvalReport eval_from_counts(std::size_t tp, std::size_t fp, std::size_t fn,
                            std::size_t tn);

struct AlphaCalibration {
  double alpha = 0.0;
  bool calibrated = false;
  double f1 = 0.0;
};

// Best-F1 alpha from precomputed scores; ties go to the larger alpha.
AlphaCalibration calibrate_alpha_from_scores(
    const std::vector<double>& scores, const std::vector<std::uint8_t>& labels,
    std::vector<double> grid, double alpha_default);

// Calibrates on the series' validation partition.
AlphaCalibration calibrate_alpha(const FaeModel& model,
                                 const SeriesRecord& series,
                                 const std::vector<double>& grid,
                                 double alpha_default);

struct EvalRow {
  std::string series_id;
  double alpha = 0.0;
  EvalReport report;
};

// Test-partition confusion metrics for every labeled series plus a pooled
// "ALL" row (alpha NaN there). A nonempty grid calibrates alpha per series
// on validation; otherwise fixed_alpha applies everywhere.
std::vector<EvalRow> evaluate_dataset(const FaeModel& model,
                                      const std::vector<SeriesRecord>& dataset,
                                      const std::vector<double>& grid,
                                      double fixed_alpha);

struct ZeroShotSeriesReport {
  std::string series_id;
  bool held_out = false;
  double test_nll = 0.0;   // mean per-timestep Gaussian NLL, normalized units
  double coverage3 = 0.0;  // fraction of test samples inside mu +/- 3 sigma
  double alpha = 0.0;
  double f1 = 0.0;  // NaN when the test region has no positive labels
};

struct ZeroShotReport {
  std::vector<ZeroShotSeriesReport> series;
  TrainHistory history;
};

// Trains on the dataset minus leave_out, then scores every series' test
// partition. Held-out series are normalized from their own train-partition
// statistics; model weights never see them.
ZeroShotReport zero_shot_run(const std::vector<SeriesRecord>& dataset,
                             const std::vector<std::string>& leave_out,
                             const FaeHyperparams& hyper,
                             const TrainConfig& config, double alpha);

}  // namespace fae
