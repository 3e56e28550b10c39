#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fae/series_stats.hpp"

namespace fae {

struct SplitIndices {
  std::size_t train_end = 0;  // train = [0, train_end)
  std::size_t val_end = 0;    // val = [train_end, val_end), test = rest
};

struct AnomalySpan {
  std::size_t begin = 0;
  std::size_t end = 0;  // inclusive, UCR convention
};

// One univariate series. Timestamps, labels, split and anomaly span are all
// optional; values are required and nonempty.
struct SeriesRecord {
  std::string id;
  std::vector<std::int64_t> timestamps;  // empty = implicit sample index
  std::vector<double> values;
  std::vector<std::uint8_t> labels;  // empty = unlabeled
  std::optional<SplitIndices> split;
  std::optional<AnomalySpan> anomaly_span;

  std::size_t length() const { return values.size(); }
  std::int64_t time_at(std::size_t t) const {
    return timestamps.empty() ? static_cast<std::int64_t>(t) : timestamps[t];
  }
};

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

IndexRange train_range(const SeriesRecord& series);
IndexRange val_range(const SeriesRecord& series);
IndexRange test_range(const SeriesRecord& series);

// --------------------------------------------------------------------------
// CSV ingestion

enum class GapPolicy { reject, interpolate };

struct CsvSchema {
  std::string time_col = "timestamp";
  std::string id_col = "id";
  std::string value_col = "value";
  std::string label_col = "label";  // empty or absent column = unlabeled
  GapPolicy gap_policy = GapPolicy::reject;
};

// One record per distinct id (order of first appearance), rows sorted by
// timestamp, constant step enforced with the schema's gap policy.
std::vector<SeriesRecord> load_series_csv(const std::string& path,
                                          const CsvSchema& schema);

// Columns timestamp,id,value,label; implicit timestamps written as indices.
void save_series_csv(const std::vector<SeriesRecord>& series,
                     const std::string& path);

// --------------------------------------------------------------------------
// UCR anomaly-archive files: whitespace-separated floats, metadata in the
// filename suffix `_<train_end>_<anomaly_begin>_<anomaly_end>`.

SeriesRecord load_ucr_file(const std::string& path);

// Writes `<dir>/<id>_<boundary>_<abegin>_<aend>.txt` and returns the path.
std::string save_ucr_file(const SeriesRecord& series, const std::string& dir);

// --------------------------------------------------------------------------
// Normalization (per-series z-score, train partition only)

SeriesStats fit_stats(const std::vector<double>& values, std::size_t begin,
                      std::size_t end);

std::map<std::string, SeriesStats> fit_normalizer(
    const std::vector<SeriesRecord>& series);

double apply_stats(const SeriesStats& stats, double x);
double invert_stats(const SeriesStats& stats, double x);
std::vector<double> apply_stats(const SeriesStats& stats,
                                const std::vector<double>& values);

// --------------------------------------------------------------------------
// Windowing

struct WindowSample {
  std::string series_id;
  std::size_t end_index = 0;
  std::vector<double> window;  // length T
};

struct WindowSet {
  std::vector<WindowSample> windows;
  bool too_short = false;
};

WindowSet make_windows(const std::string& series_id,
                       const std::vector<double>& values, std::size_t T,
                       std::size_t stride);
WindowSet make_windows(const SeriesRecord& series, std::size_t T,
                       std::size_t stride);

// Windows ending inside [end_begin, end_end), phase anchored at T-1; the
// window itself may read history from before end_begin.
WindowSet make_windows_in_range(const std::string& series_id,
                                const std::vector<double>& values,
                                std::size_t T, std::size_t stride,
                                std::size_t end_begin, std::size_t end_end);

// --------------------------------------------------------------------------
// Temporal splits

void temporal_split(SeriesRecord& series, double train_frac, double val_frac);
void set_split(SeriesRecord& series, std::size_t train_end,
               std::size_t val_end);

// UCR files carry only a train boundary; carve the last 20% of the train
// partition as validation. No-op when validation is already nonempty.
void carve_validation(SeriesRecord& series);

// Contiguous copy of [begin, end) with metadata sliced to match.
SeriesRecord slice(const SeriesRecord& series, std::size_t begin,
                   std::size_t end);

// --------------------------------------------------------------------------
// Synthetic generation

struct SynthSpike {
  std::size_t position = 0;
  double magnitude = 0.0;
};

struct SynthSpec {
  std::string id = "synth";
  std::size_t length = 0;
  double period = 32.0;
  double amplitude = 1.0;
  double weekend_scale = 1.0;  // applied on every 6th and 7th "day"
  double trend_per_period = 0.0;
  double noise_std = 0.0;
  std::vector<SynthSpike> spikes;
  std::uint64_t seed = 0;
};

// value(t) = amplitude*scale(t)*sin(2*pi*t/period) + trend_per_period*(t/period)
//          + gaussian(0, noise_std) + spikes; labels mark spike positions.
SeriesRecord synth_generate(const SynthSpec& spec);

}  // namespace fae
