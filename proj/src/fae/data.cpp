#include "fae/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "fae/errors.hpp"
#include "fae/ioutil.hpp"
#include "fae/rng.hpp"

namespace fae {

IndexRange train_range(const SeriesRecord& series) {
  if (!series.split) throw ConfigError("series '" + series.id + "' has no split");
  return {0, series.split->train_end};
}

IndexRange val_range(const SeriesRecord& series) {
  if (!series.split) throw ConfigError("series '" + series.id + "' has no split");
  return {series.split->train_end, series.split->val_end};
}

IndexRange test_range(const SeriesRecord& series) {
  if (!series.split) throw ConfigError("series '" + series.id + "' has no split");
  return {series.split->val_end, series.length()};
}

// --------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split_line(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::vector<std::string> read_lines(const std::string& contents) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < contents.size()) {
    std::size_t pos = contents.find('\n', start);
    if (pos == std::string::npos) pos = contents.size();
    std::string line = contents.substr(start, pos - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = pos + 1;
  }
  return lines;
}

struct CsvRow {
  std::size_t line_no;
  std::int64_t timestamp;
  double value;
  int label;  // -1 = no label column
};

std::size_t find_column(const std::vector<std::string>& header,
                        const std::string& name, const std::string& path) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw DataError("column '" + name + "' missing from header of " + path);
  }
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::vector<SeriesRecord> load_series_csv(const std::string& path,
                                          const CsvSchema& schema) {
  const std::vector<std::string> lines = read_lines(read_file(path));
  if (lines.empty()) throw DataError("empty CSV file: " + path);

  const std::vector<std::string> header = split_line(lines[0], ',');
  const std::size_t time_idx = find_column(header, schema.time_col, path);
  const std::size_t id_idx = find_column(header, schema.id_col, path);
  const std::size_t value_idx = find_column(header, schema.value_col, path);
  std::optional<std::size_t> label_idx;
  if (!schema.label_col.empty()) {
    const auto it = std::find(header.begin(), header.end(), schema.label_col);
    if (it != header.end()) {
      label_idx = static_cast<std::size_t>(it - header.begin());
    }
  }

  std::vector<std::string> id_order;
  std::map<std::string, std::vector<CsvRow>> rows_by_id;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const std::size_t line_no = n + 1;
    const std::vector<std::string> fields = split_line(lines[n], ',');
    if (fields.size() != header.size()) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": field count differs from header");
    }
    CsvRow row{};
    row.line_no = line_no;
    try {
      row.timestamp = parse_int(fields[time_idx]);
      row.value = parse_double(fields[value_idx]);
      if (label_idx) {
        const std::int64_t l = parse_int(fields[*label_idx]);
        if (l != 0 && l != 1) throw DataError("label must be 0 or 1");
        row.label = static_cast<int>(l);
      } else {
        row.label = -1;
      }
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    const std::string& id = fields[id_idx];
    if (!rows_by_id.count(id)) id_order.push_back(id);
    rows_by_id[id].push_back(row);
  }
  if (id_order.empty()) throw DataError("no data rows in " + path);

  std::vector<SeriesRecord> records;
  for (const std::string& id : id_order) {
    auto& rows = rows_by_id[id];
    std::stable_sort(rows.begin(), rows.end(),
                     [](const CsvRow& a, const CsvRow& b) {
                       return a.timestamp < b.timestamp;
                     });
    SeriesRecord record;
    record.id = id;
    const bool labeled = label_idx.has_value();

    std::int64_t step = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r > 0) {
        const std::int64_t delta = rows[r].timestamp - rows[r - 1].timestamp;
        if (delta == 0) {
          throw DataError(path + ":" + std::to_string(rows[r].line_no) +
                          ": duplicate timestamp for series '" + id + "'");
        }
        if (r == 1) {
          step = delta;
        } else if (delta != step) {
          if (delta % step != 0 || delta < step) {
            throw DataError(path + ":" + std::to_string(rows[r].line_no) +
                            ": irregular timestamp step for series '" + id +
                            "' (expected multiple of " + std::to_string(step) +
                            ", got " + std::to_string(delta) + ")");
          }
          if (schema.gap_policy == GapPolicy::reject) {
            throw DataError(path + ":" + std::to_string(rows[r].line_no) +
                            ": timestamp gap for series '" + id + "' (" +
                            std::to_string(delta / step - 1) +
                            " missing samples)");
          }
          // Linear gap fill, label 0.
          const std::int64_t missing = delta / step - 1;
          const double v0 = rows[r - 1].value, v1 = rows[r].value;
          for (std::int64_t k = 1; k <= missing; ++k) {
            const double frac =
                static_cast<double>(k) / static_cast<double>(missing + 1);
            record.timestamps.push_back(rows[r - 1].timestamp + k * step);
            record.values.push_back(v0 + frac * (v1 - v0));
            if (labeled) record.labels.push_back(0);
          }
        }
      }
      record.timestamps.push_back(rows[r].timestamp);
      record.values.push_back(rows[r].value);
      if (labeled) {
        record.labels.push_back(static_cast<std::uint8_t>(rows[r].label));
      }
    }
    records.push_back(std::move(record));
  }
  return records;
}

void save_series_csv(const std::vector<SeriesRecord>& series,
                     const std::string& path) {
  std::ostringstream out;
  out << "timestamp,id,value,label\n";
  for (const SeriesRecord& record : series) {
    for (std::size_t t = 0; t < record.length(); ++t) {
      const int label = record.labels.empty() ? 0 : record.labels[t];
      out << record.time_at(t) << "," << record.id << ","
          << format_double(record.values[t]) << "," << label << "\n";
    }
  }
  atomic_write_file(path, out.str());
}

// --------------------------------------------------------------------------
// UCR archive files

SeriesRecord load_ucr_file(const std::string& path) {
  const std::string stem = std::filesystem::path(path).stem().string();
  std::vector<std::string> tokens = split_line(stem, '_');
  if (tokens.size() < 4) {
    throw FormatError("UCR filename lacks `_<train>_<abegin>_<aend>` suffix: " +
                      path);
  }
  std::int64_t nums[3];
  for (int k = 0; k < 3; ++k) {
    try {
      nums[k] = parse_int(tokens[tokens.size() - 3 + k]);
    } catch (const DataError&) {
      throw FormatError("UCR filename lacks three trailing integers: " + path);
    }
    if (nums[k] < 0) {
      throw FormatError("UCR filename has negative index: " + path);
    }
  }
  tokens.resize(tokens.size() - 3);
  std::string id = tokens[0];
  for (std::size_t k = 1; k < tokens.size(); ++k) id += "_" + tokens[k];

  SeriesRecord record;
  record.id = id;
  const std::vector<std::string> lines = read_lines(read_file(path));
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::istringstream ss(lines[n]);
    std::string token;
    while (ss >> token) {
      try {
        record.values.push_back(parse_double(token));
      } catch (const DataError& e) {
        throw DataError(path + ":" + std::to_string(n + 1) + ": " + e.what());
      }
    }
  }
  if (record.values.empty()) throw DataError("no values in " + path);

  const std::size_t L = record.length();
  const auto train_end = static_cast<std::size_t>(nums[0]);
  const auto abegin = static_cast<std::size_t>(nums[1]);
  const auto aend = static_cast<std::size_t>(nums[2]);
  if (train_end > L) {
    throw DataError("train boundary " + std::to_string(train_end) +
                    " beyond series length " + std::to_string(L) + ": " + path);
  }
  if (abegin > aend || aend >= L) {
    throw DataError("anomaly span [" + std::to_string(abegin) + ", " +
                    std::to_string(aend) + "] outside series of length " +
                    std::to_string(L) + ": " + path);
  }
  record.split = SplitIndices{train_end, train_end};
  record.anomaly_span = AnomalySpan{abegin, aend};
  record.labels.assign(L, 0);
  for (std::size_t t = abegin; t <= aend; ++t) record.labels[t] = 1;
  return record;
}

std::string save_ucr_file(const SeriesRecord& series, const std::string& dir) {
  if (!series.split || !series.anomaly_span) {
    throw ConfigError("UCR output needs split and anomaly span on series '" +
                      series.id + "'");
  }
  // The filename boundary is the end of the full pre-test region.
  const std::size_t boundary = series.split->val_end;
  std::ostringstream name;
  name << series.id << "_" << boundary << "_" << series.anomaly_span->begin
       << "_" << series.anomaly_span->end << ".txt";
  const std::string path =
      (std::filesystem::path(dir) / name.str()).string();
  std::ostringstream out;
  for (const double v : series.values) out << format_double(v) << "\n";
  atomic_write_file(path, out.str());
  return path;
}

// --------------------------------------------------------------------------
// Normalization

SeriesStats fit_stats(const std::vector<double>& values, std::size_t begin,
                      std::size_t end) {
  if (begin >= end || end > values.size()) {
    throw ShapeError("fit_stats: empty or out-of-range partition");
  }
  const auto n = static_cast<double>(end - begin);
  double mean = 0.0;
  for (std::size_t t = begin; t < end; ++t) mean += values[t];
  mean /= n;
  double var = 0.0;
  for (std::size_t t = begin; t < end; ++t) {
    const double d = values[t] - mean;
    var += d * d;
  }
  var /= n;  // population variance
  SeriesStats stats;
  stats.mean = mean;
  stats.std = std::sqrt(var);
  if (stats.std < 1e-8) {
    stats.std = 1e-8;
    stats.floored = true;
  }
  return stats;
}

std::map<std::string, SeriesStats> fit_normalizer(
    const std::vector<SeriesRecord>& series) {
  std::map<std::string, SeriesStats> stats;
  for (const SeriesRecord& record : series) {
    const IndexRange train = train_range(record);
    if (train.size() == 0) {
      throw ConfigError("series '" + record.id + "' has an empty train partition");
    }
    stats[record.id] = fit_stats(record.values, train.begin, train.end);
  }
  return stats;
}

double apply_stats(const SeriesStats& stats, double x) {
  return (x - stats.mean) / stats.std;
}

double invert_stats(const SeriesStats& stats, double x) {
  return x * stats.std + stats.mean;
}

std::vector<double> apply_stats(const SeriesStats& stats,
                                const std::vector<double>& values) {
  std::vector<double> out(values.size());
  for (std::size_t t = 0; t < values.size(); ++t) {
    out[t] = apply_stats(stats, values[t]);
  }
  return out;
}

// --------------------------------------------------------------------------
// Windowing

WindowSet make_windows_in_range(const std::string& series_id,
                                const std::vector<double>& values,
                                std::size_t T, std::size_t stride,
                                std::size_t end_begin, std::size_t end_end) {
  if (T < 1 || stride < 1) throw ConfigError("make_windows: T and stride must be >= 1");
  WindowSet set;
  if (values.size() < T) {
    set.too_short = true;
    return set;
  }
  end_end = std::min(end_end, values.size());
  std::size_t end = T - 1;
  if (end_begin > end) {
    // First phase-aligned end index at or after end_begin.
    const std::size_t k = (end_begin - (T - 1) + stride - 1) / stride;
    end = T - 1 + k * stride;
  }
  for (; end < end_end; end += stride) {
    WindowSample sample;
    sample.series_id = series_id;
    sample.end_index = end;
    sample.window.assign(values.begin() + static_cast<std::ptrdiff_t>(end - T + 1),
                         values.begin() + static_cast<std::ptrdiff_t>(end + 1));
    set.windows.push_back(std::move(sample));
  }
  return set;
}

WindowSet make_windows(const std::string& series_id,
                       const std::vector<double>& values, std::size_t T,
                       std::size_t stride) {
  return make_windows_in_range(series_id, values, T, stride, 0, values.size());
}

WindowSet make_windows(const SeriesRecord& series, std::size_t T,
                       std::size_t stride) {
  return make_windows(series.id, series.values, T, stride);
}

// --------------------------------------------------------------------------
// Splits

void set_split(SeriesRecord& series, std::size_t train_end,
               std::size_t val_end) {
  if (train_end > val_end || val_end > series.length()) {
    throw ConfigError("invalid split indices for series '" + series.id + "'");
  }
  series.split = SplitIndices{train_end, val_end};
}

void temporal_split(SeriesRecord& series, double train_frac, double val_frac) {
  if (!(train_frac > 0.0) || !(val_frac > 0.0) || train_frac + val_frac >= 1.0) {
    throw ConfigError("split fractions must lie in (0,1) and sum below 1");
  }
  const auto L = static_cast<double>(series.length());
  const auto train_end = static_cast<std::size_t>(L * train_frac);
  const auto val_end = static_cast<std::size_t>(L * (train_frac + val_frac));
  set_split(series, train_end, val_end);
}

void carve_validation(SeriesRecord& series) {
  if (!series.split) throw ConfigError("series '" + series.id + "' has no split");
  if (series.split->val_end > series.split->train_end) return;
  const std::size_t carve = series.split->train_end / 5;
  series.split->val_end = series.split->train_end;
  series.split->train_end -= carve;
}

SeriesRecord slice(const SeriesRecord& series, std::size_t begin,
                   std::size_t end) {
  if (begin > end || end > series.length()) {
    throw ShapeError("slice: range outside series '" + series.id + "'");
  }
  SeriesRecord out;
  out.id = series.id;
  out.values.assign(series.values.begin() + static_cast<std::ptrdiff_t>(begin),
                    series.values.begin() + static_cast<std::ptrdiff_t>(end));
  if (!series.timestamps.empty()) {
    out.timestamps.assign(
        series.timestamps.begin() + static_cast<std::ptrdiff_t>(begin),
        series.timestamps.begin() + static_cast<std::ptrdiff_t>(end));
  }
  if (!series.labels.empty()) {
    out.labels.assign(series.labels.begin() + static_cast<std::ptrdiff_t>(begin),
                      series.labels.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

// --------------------------------------------------------------------------
// Synthetic series

SeriesRecord synth_generate(const SynthSpec& spec) {
  if (spec.period < 2.0) throw ConfigError("synth: period must be >= 2");
  if (spec.length < 1) throw ConfigError("synth: length must be >= 1");
  for (const SynthSpike& spike : spec.spikes) {
    if (spike.position >= spec.length) {
      throw ConfigError("synth: spike position " +
                        std::to_string(spike.position) +
                        " outside series of length " +
                        std::to_string(spec.length));
    }
  }

  SeriesRecord record;
  record.id = spec.id;
  record.values.resize(spec.length);
  record.labels.assign(spec.length, 0);
  Rng rng(spec.seed);
  const auto day_samples = static_cast<std::size_t>(spec.period);
  for (std::size_t t = 0; t < spec.length; ++t) {
    const std::size_t day = t / day_samples;
    const bool weekend = day % 7 >= 5;
    const double scale = weekend ? spec.weekend_scale : 1.0;
    const double phase = 2.0 * M_PI * static_cast<double>(t) / spec.period;
    double v = spec.amplitude * scale * std::sin(phase) +
               spec.trend_per_period * (static_cast<double>(t) / spec.period);
    if (spec.noise_std > 0.0) v += spec.noise_std * rng.gaussian();
    record.values[t] = v;
  }
  for (const SynthSpike& spike : spec.spikes) {
    record.values[spike.position] += spike.magnitude;
    record.labels[spike.position] = 1;
  }
  return record;
}

}  // namespace fae
