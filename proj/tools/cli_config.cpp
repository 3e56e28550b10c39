#include "cli_config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace faecli {

const char* family_name(int exit_code) {
  switch (exit_code) {
    case 2: return "config";
    case 3: return "data";
    case 4: return "format";
    case 5: return "numeric";
    case 6: return "io";
    case 7: return "shape";
    default: return "internal";
  }
}

namespace {

enum class ValueType { string, integer, real, boolean };

struct SchemaEntry {
  ValueType type;
  const char* default_value;
};

const std::map<std::string, SchemaEntry>& schema() {
  static const std::map<std::string, SchemaEntry> table = {
      {"out_dir", {ValueType::string, "out"}},
      {"seed", {ValueType::integer, "1"}},
      {"T", {ValueType::integer, "256"}},
      {"J", {ValueType::integer, "48"}},
      {"U", {ValueType::integer, "128"}},
      {"F", {ValueType::integer, "2"}},
      {"beta", {ValueType::real, "1"}},
      {"alpha", {ValueType::real, "3"}},
      {"gamma", {ValueType::real, "6e-5"}},
      {"m", {ValueType::integer, "32"}},
      {"max_epochs", {ValueType::integer, "100"}},
      {"patience", {ValueType::integer, "10"}},
      {"stride", {ValueType::integer, "1"}},
      {"train_frac", {ValueType::real, "0.42857142857142855"}},
      {"val_frac", {ValueType::real, "0.14285714285714285"}},
      {"data.csv", {ValueType::string, ""}},
      {"data.ucr", {ValueType::string, ""}},
      {"csv.time_col", {ValueType::string, "timestamp"}},
      {"csv.id_col", {ValueType::string, "id"}},
      {"csv.value_col", {ValueType::string, "value"}},
      {"csv.label_col", {ValueType::string, "label"}},
      {"csv.gap_policy", {ValueType::string, "reject"}},
      {"model", {ValueType::string, ""}},
      {"alpha_grid", {ValueType::string, "1,2,3,4,5,6"}},
      {"eval.calibrate", {ValueType::boolean, "true"}},
      {"latent.k", {ValueType::integer, "3"}},
      {"latent.stride", {ValueType::integer, "1"}},
      {"clock.samples_per_day", {ValueType::integer, "288"}},
      {"clock.days_per_week", {ValueType::integer, "7"}},
      {"search.budget", {ValueType::integer, "50"}},
      {"search.epochs", {ValueType::integer, "10"}},
      {"search.patience", {ValueType::integer, "3"}},
      {"search.t_min", {ValueType::integer, "128"}},
      {"search.t_max", {ValueType::integer, "512"}},
      {"search.t_step", {ValueType::integer, "32"}},
      {"search.j_min", {ValueType::integer, "16"}},
      {"search.j_step", {ValueType::integer, "16"}},
      {"search.gamma_min", {ValueType::real, "1e-5"}},
      {"search.gamma_max", {ValueType::real, "5e-4"}},
      {"search.m_min", {ValueType::integer, "16"}},
      {"search.m_max", {ValueType::integer, "96"}},
      {"search.m_step", {ValueType::integer, "16"}},
      {"search.u_min", {ValueType::integer, "16"}},
      {"search.u_max", {ValueType::integer, "128"}},
      {"search.u_step", {ValueType::integer, "16"}},
      {"zeroshot.runs", {ValueType::string, ""}},
  };
  return table;
}

const std::set<std::string>& series_fields() {
  static const std::set<std::string> fields = {
      "id",           "length",           "period",
      "amplitude",    "weekend_scale",    "trend_per_period",
      "noise_std",    "spikes",           "seed"};
  return fields;
}

// Matches `series.<n>.<field>`; fills n and field on success.
bool parse_series_key(const std::string& key, std::int64_t& n,
                      std::string& field) {
  if (key.rfind("series.", 0) != 0) return false;
  const std::size_t second_dot = key.find('.', 7);
  if (second_dot == std::string::npos || second_dot == 7) return false;
  const std::string index = key.substr(7, second_dot - 7);
  if (!std::all_of(index.begin(), index.end(),
                   [](char c) { return c >= '0' && c <= '9'; })) {
    return false;
  }
  n = std::strtoll(index.c_str(), nullptr, 10);
  field = key.substr(second_dot + 1);
  return true;
}

ValueType series_field_type(const std::string& field) {
  if (field == "id" || field == "spikes") return ValueType::string;
  if (field == "length" || field == "seed") return ValueType::integer;
  return ValueType::real;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

bool parses_as_int(const std::string& v) {
  if (v.empty()) return false;
  errno = 0;
  char* end = nullptr;
  (void)std::strtoll(v.c_str(), &end, 10);
  return end == v.c_str() + v.size() && errno != ERANGE;
}

bool parses_as_double(const std::string& v) {
  if (v.empty()) return false;
  errno = 0;
  char* end = nullptr;
  (void)std::strtod(v.c_str(), &end);
  return end == v.c_str() + v.size() && errno != ERANGE;
}

void check_type(const std::string& key, const std::string& value,
                ValueType type) {
  switch (type) {
    case ValueType::string:
      return;
    case ValueType::integer:
      if (!parses_as_int(value)) {
        throw CliError(2, "key '" + key + "': expected integer, got '" +
                              value + "'");
      }
      return;
    case ValueType::real:
      if (!parses_as_double(value)) {
        throw CliError(2, "key '" + key + "': expected number, got '" + value +
                              "'");
      }
      return;
    case ValueType::boolean:
      if (value != "true" && value != "false") {
        throw CliError(2, "key '" + key + "': expected true/false, got '" +
                              value + "'");
      }
      return;
  }
}

void validate_key_value(const std::string& key, const std::string& value) {
  const auto it = schema().find(key);
  if (it != schema().end()) {
    check_type(key, value, it->second.type);
    return;
  }
  std::int64_t n = 0;
  std::string field;
  if (parse_series_key(key, n, field)) {
    if (!series_fields().count(field)) {
      throw CliError(2, "unknown series field in key '" + key + "'");
    }
    check_type(key, value, series_field_type(field));
    return;
  }
  throw CliError(2, "unknown config key '" + key + "'");
}

}  // namespace

RunConfig RunConfig::load(const std::string& config_path,
                          const std::vector<std::string>& overrides) {
  RunConfig config;
  for (const auto& [key, entry] : schema()) {
    config.values_[key] = entry.default_value;
  }

  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw CliError(6, "cannot read config file: " + config_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      line = trim(line);
      if (line.empty()) continue;
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) {
        throw CliError(2, config_path + ":" + std::to_string(line_no) +
                              ": expected key=value");
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      validate_key_value(key, value);
      config.values_[key] = value;
      config.explicit_[key] = value;
    }
  }

  for (const std::string& assignment : overrides) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos) {
      throw CliError(2, "override '" + assignment + "': expected key=value");
    }
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    validate_key_value(key, value);
    config.values_[key] = value;
    config.explicit_[key] = value;
  }
  return config;
}

std::string RunConfig::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw CliError(2, "unknown config key '" + key + "'");
  return it->second;
}

std::int64_t RunConfig::get_int(const std::string& key) const {
  return std::strtoll(get_string(key).c_str(), nullptr, 10);
}

double RunConfig::get_double(const std::string& key) const {
  return std::strtod(get_string(key).c_str(), nullptr);
}

bool RunConfig::get_bool(const std::string& key) const {
  return get_string(key) == "true";
}

bool RunConfig::is_set(const std::string& key) const {
  return explicit_.count(key) > 0;
}

std::vector<double> RunConfig::get_double_list(const std::string& key) const {
  const std::string raw = get_string(key);
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string token;
  while (std::getline(ss, token, ',')) {
    token = trim(token);
    if (token.empty()) continue;
    if (!parses_as_double(token)) {
      throw CliError(2, "key '" + key + "': '" + token + "' is not a number");
    }
    out.push_back(std::strtod(token.c_str(), nullptr));
  }
  return out;
}

std::vector<std::map<std::string, std::string>> RunConfig::synth_groups()
    const {
  std::map<std::int64_t, std::map<std::string, std::string>> groups;
  for (const auto& [key, value] : explicit_) {
    std::int64_t n = 0;
    std::string field;
    if (parse_series_key(key, n, field)) groups[n][field] = value;
  }

  std::vector<std::map<std::string, std::string>> out;
  for (auto& [n, fields] : groups) {
    if (!fields.count("length")) {
      throw CliError(2, "series." + std::to_string(n) + ".length is required");
    }
    if (!fields.count("id")) fields["id"] = "s" + std::to_string(n);
    fields.try_emplace("period", "32");
    fields.try_emplace("amplitude", "1");
    fields.try_emplace("weekend_scale", "1");
    fields.try_emplace("trend_per_period", "0");
    fields.try_emplace("noise_std", "0");
    fields.try_emplace("spikes", "");
    fields.try_emplace("seed", std::to_string(get_int("seed") + n));
    out.push_back(fields);
  }
  return out;
}

}  // namespace faecli
