#pragma once

// Key-value config files:
//
//   # comment
//   key = value        # trailing comments allowed
//
// Scenario keys: p, q, angles, sigma2, snr_db, bandwidth, seed.
// Experiment keys: scenario, n, y, trials, master_seed, out, moments,
// min_noise_fraction, coverage_margin, histogram_bins.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmtdetect/arraysim.hpp"

namespace rmtdetect {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& field, const std::string& what)
      : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) +
                           (field.empty() ? std::string() : ": '" + field + "'") + ": " + what),
        line_(line),
        field_(field) {}

  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

struct ConfigEntry {
  std::string value;
  int line = 0;
};

struct KeyValueFile {
  std::string source;
  std::filesystem::path directory;  // for resolving relative paths
  std::map<std::string, ConfigEntry> entries;

  bool has(const std::string& key) const { return entries.count(key) != 0; }
};

KeyValueFile parse_key_values(std::istream& in, const std::string& source);
KeyValueFile load_key_values(const std::filesystem::path& path);

struct SnrRange {
  double lo_db;
  double hi_db;
};

struct ScenarioConfig {
  int p = 0;
  int q = 0;
  std::vector<double> angles_deg;
  double sigma2 = 1.0;
  std::vector<double> snr_db;      // explicit per-source values, or
  std::optional<SnrRange> snr_range;  // powers drawn uniformly between the dB limits
  int bandwidth = 2;
  std::uint64_t seed = 1;

  /// Per-source SNRs; draws from the scenario seed when given as a range.
  std::vector<double> resolved_snr_db() const;
  Scenario<double> build() const;
};

ScenarioConfig parse_scenario(const KeyValueFile& kv);

/// Writes a config that reads back to the same scenario (explicit lists).
void write_scenario_config(std::ostream& out, const ScenarioConfig& sc);

struct ExperimentConfig {
  ScenarioConfig scenario;
  std::vector<int> sample_sizes;
  int trials = 10;
  std::uint64_t master_seed = 1;
  std::string out_dir = "out";
  int moment_order = 4;
  double min_noise_fraction = 0.1;
  double coverage_margin = 0.1;  // absolute padding of [x1, x2] for the noise-coverage check
  int histogram_bins = 40;
};

/// Scenario keys may be inline or in a file named by `scenario = path`.
ExperimentConfig parse_experiment(const KeyValueFile& kv);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace rmtdetect
