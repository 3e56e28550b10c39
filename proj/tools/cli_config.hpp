#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace faecli {

// CLI-side failure carrying the process exit code (mirrors fae_status).
class CliError : public std::runtime_error {
 public:
  CliError(int exit_code, const std::string& msg)
      : std::runtime_error(msg), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

const char* family_name(int exit_code);

// Flat key=value configuration: defaults < config file < command-line
// overrides. Every key must belong to the documented schema; values are
// type-checked up front.
class RunConfig {
 public:
  static RunConfig load(const std::string& config_path,
                        const std::vector<std::string>& overrides);

  std::string get_string(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  // True when the key was set explicitly (file or override), not defaulted.
  bool is_set(const std::string& key) const;

  // Numbered `series.<n>.*` groups in ascending n, with per-field defaults
  // applied. Field map keys: id,length,period,amplitude,weekend_scale,
  // trend_per_period,noise_std,spikes,seed.
  std::vector<std::map<std::string, std::string>> synth_groups() const;

  // Comma-separated doubles, e.g. alpha grids.
  std::vector<double> get_double_list(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> explicit_;
};

}  // namespace faecli
