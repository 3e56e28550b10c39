#include "fae/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "fae/errors.hpp"

namespace fae {

namespace {

struct ResolvedStats {
  SeriesStats stats;
  bool fallback = false;
};

ResolvedStats resolve_stats(const FaeModel& model, const SeriesRecord& series) {
  ResolvedStats out;
  const auto it = model.normalizers.find(series.id);
  if (it != model.normalizers.end()) {
    out.stats = it->second;
    return out;
  }
  out.fallback = true;
  if (series.split && series.split->train_end > 0) {
    out.stats = fit_stats(series.values, 0, series.split->train_end);
  } else {
    out.stats = fit_stats(series.values, 0, series.length());
  }
  return out;
}

// Normalized-unit scoring columns for t in [begin_t, end_t).
struct NormalizedScores {
  std::vector<std::size_t> t;
  std::vector<double> x_n, mu_n, sigma_n;  // sigma already floored
  ResolvedStats resolved;
};

NormalizedScores score_normalized(const FaeModel& model,
                                  const SeriesRecord& series,
                                  std::size_t begin_t, std::size_t end_t) {
  const std::size_t T = model.hyper.T;
  const std::size_t L = series.length();
  if (L < T) {
    throw DataError("series '" + series.id + "' has " + std::to_string(L) +
                    " samples, shorter than the window length " +
                    std::to_string(T));
  }
  NormalizedScores out;
  out.resolved = resolve_stats(model, series);
  const std::vector<double> normalized =
      apply_stats(out.resolved.stats, series.values);

  begin_t = std::max(begin_t, T - 1);
  end_t = std::min(end_t, L);
  Tensor2 window(1, T);
  for (std::size_t t = begin_t; t < end_t; ++t) {
    std::copy(normalized.begin() + static_cast<std::ptrdiff_t>(t - T + 1),
              normalized.begin() + static_cast<std::ptrdiff_t>(t + 1),
              window.data.begin());
    const Encoding enc = encode(model, window);
    const Decoding dec = decode(model, enc.mu_z);  // epsilon = 0
    out.t.push_back(t);
    out.x_n.push_back(normalized[t]);
    out.mu_n.push_back(dec.mu_x.at(0, T - 1));
    out.sigma_n.push_back(std::max(dec.sigma_x.at(0, T - 1), kSigmaFloor));
  }
  return out;
}

}  // namespace

DetectionResult score_range(const FaeModel& model, const SeriesRecord& series,
                            double alpha, std::size_t begin_t,
                            std::size_t end_t) {
  const NormalizedScores n = score_normalized(model, series, begin_t, end_t);
  DetectionResult result;
  result.series_id = series.id;
  result.alpha = alpha;
  result.fallback_normalizer = n.resolved.fallback;
  const SeriesStats& stats = n.resolved.stats;
  result.t = n.t;
  for (std::size_t i = 0; i < n.t.size(); ++i) {
    const double score = std::abs(n.x_n[i] - n.mu_n[i]) / n.sigma_n[i];
    result.timestamps.push_back(series.time_at(n.t[i]));
    result.x.push_back(series.values[n.t[i]]);
    result.mu.push_back(invert_stats(stats, n.mu_n[i]));
    result.sigma.push_back(n.sigma_n[i] * stats.std);
    result.score.push_back(score);
    result.flag.push_back(score > alpha ? 1 : 0);
  }
  return result;
}

DetectionResult score_online(const FaeModel& model, const SeriesRecord& series,
                             double alpha) {
  return score_range(model, series, alpha, 0, series.length());
}

EvalReport eval_from_counts(std::size_t tp, std::size_t fp, std::size_t fn,
                            std::size_t tn) {
  EvalReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.tn = tn;
  r.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  r.f1 = r.precision + r.recall > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

EvalReport evaluate_pointwise(const std::vector<std::uint8_t>& flags,
                              const std::vector<std::uint8_t>& labels) {
  if (flags.size() != labels.size()) {
    throw ShapeError("evaluate_pointwise: flags and labels lengths differ");
  }
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i] && labels[i]) {
      ++tp;
    } else if (flags[i] && !labels[i]) {
      ++fp;
    } else if (!flags[i] && labels[i]) {
      ++fn;
    } else {
      ++tn;
    }
  }
  return eval_from_counts(tp, fp, fn, tn);
}

AlphaCalibration calibrate_alpha_from_scores(
    const std::vector<double>& scores, const std::vector<std::uint8_t>& labels,
    std::vector<double> grid, double alpha_default) {
  if (scores.size() != labels.size()) {
    throw ShapeError("calibrate_alpha: scores and labels lengths differ");
  }
  if (grid.empty()) throw ConfigError("calibrate_alpha: empty alpha grid");
  AlphaCalibration out;
  out.alpha = alpha_default;
  const bool any_positive =
      std::any_of(labels.begin(), labels.end(), [](std::uint8_t l) { return l != 0; });
  if (!any_positive) return out;  // not calibrated

  std::sort(grid.begin(), grid.end());
  out.calibrated = true;
  double best_f1 = -1.0;
  for (const double alpha : grid) {
    std::vector<std::uint8_t> flags(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
      flags[i] = scores[i] > alpha ? 1 : 0;
    }
    const EvalReport report = evaluate_pointwise(flags, labels);
    if (report.f1 >= best_f1) {  // ties go to the larger alpha
      best_f1 = report.f1;
      out.alpha = alpha;
      out.f1 = report.f1;
    }
  }
  return out;
}

AlphaCalibration calibrate_alpha(const FaeModel& model,
                                 const SeriesRecord& series,
                                 const std::vector<double>& grid,
                                 double alpha_default) {
  AlphaCalibration fallback;
  fallback.alpha = alpha_default;
  if (series.labels.empty()) return fallback;

  const IndexRange val = val_range(series);
  const DetectionResult scored =
      score_range(model, series, alpha_default, val.begin, val.end);
  std::vector<std::uint8_t> labels;
  labels.reserve(scored.size());
  for (const std::size_t t : scored.t) labels.push_back(series.labels[t]);
  return calibrate_alpha_from_scores(scored.score, labels, grid, alpha_default);
}

std::vector<EvalRow> evaluate_dataset(const FaeModel& model,
                                      const std::vector<SeriesRecord>& dataset,
                                      const std::vector<double>& grid,
                                      double fixed_alpha) {
  std::vector<EvalRow> rows;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (const SeriesRecord& record : dataset) {
    if (record.labels.empty()) continue;
    double alpha = fixed_alpha;
    if (!grid.empty()) {
      alpha = calibrate_alpha(model, record, grid, fixed_alpha).alpha;
    }
    const IndexRange test = test_range(record);
    const DetectionResult scored =
        score_range(model, record, alpha, test.begin, test.end);
    std::vector<std::uint8_t> labels;
    labels.reserve(scored.size());
    for (const std::size_t t : scored.t) labels.push_back(record.labels[t]);
    EvalRow row;
    row.series_id = record.id;
    row.alpha = alpha;
    row.report = evaluate_pointwise(scored.flag, labels);
    tp += row.report.tp;
    fp += row.report.fp;
    fn += row.report.fn;
    tn += row.report.tn;
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw ConfigError("evaluate: no labeled series in the dataset");
  }
  EvalRow pooled;
  pooled.series_id = "ALL";
  pooled.alpha = std::numeric_limits<double>::quiet_NaN();
  pooled.report = eval_from_counts(tp, fp, fn, tn);
  rows.push_back(std::move(pooled));
  return rows;
}

ZeroShotReport zero_shot_run(const std::vector<SeriesRecord>& dataset,
                             const std::vector<std::string>& leave_out,
                             const FaeHyperparams& hyper,
                             const TrainConfig& config, double alpha) {
  std::set<std::string> known;
  for (const SeriesRecord& record : dataset) known.insert(record.id);
  std::set<std::string> excluded;
  for (const std::string& id : leave_out) {
    if (!known.count(id)) {
      throw ConfigError("zero-shot: leave-out id '" + id +
                        "' not in the dataset");
    }
    excluded.insert(id);
  }

  std::vector<SeriesRecord> training;
  for (const SeriesRecord& record : dataset) {
    if (!excluded.count(record.id)) training.push_back(record);
  }
  if (training.empty()) {
    throw ConfigError("zero-shot: every series was left out");
  }

  FaeModel model = build_model(hyper, config.seed);
  ZeroShotReport report;
  report.history = train(model, training, config);

  for (const SeriesRecord& record : dataset) {
    ZeroShotSeriesReport row;
    row.series_id = record.id;
    row.held_out = excluded.count(record.id) > 0;
    row.alpha = alpha;

    const IndexRange test = test_range(record);
    const NormalizedScores n =
        score_normalized(model, record, test.begin, test.end);
    double nll = 0.0;
    std::size_t covered = 0;
    std::vector<std::uint8_t> flags(n.t.size()), labels(n.t.size());
    for (std::size_t i = 0; i < n.t.size(); ++i) {
      const double r = n.x_n[i] - n.mu_n[i];
      const double s = n.sigma_n[i];
      nll += 0.5 * std::log(2.0 * M_PI * s * s) + r * r / (2.0 * s * s);
      if (std::abs(r) <= 3.0 * s) ++covered;
      flags[i] = std::abs(r) / s > alpha ? 1 : 0;
      labels[i] = record.labels.empty() ? 0 : record.labels[n.t[i]];
    }
    const auto count = static_cast<double>(n.t.size());
    row.test_nll = count > 0 ? nll / count : 0.0;
    row.coverage3 = count > 0 ? static_cast<double>(covered) / count : 0.0;
    const bool any_positive =
        std::any_of(labels.begin(), labels.end(), [](std::uint8_t l) { return l != 0; });
    row.f1 = any_positive ? evaluate_pointwise(flags, labels).f1
                          : std::numeric_limits<double>::quiet_NaN();
    report.series.push_back(std::move(row));
  }
  return report;
}

}  // namespace fae
