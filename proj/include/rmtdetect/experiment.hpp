#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rmtdetect/config.hpp"
#include "rmtdetect/detect.hpp"
#include "rmtdetect/moments.hpp"
#include "rmtdetect/support.hpp"

namespace rmtdetect {

struct TrialRecord {
  int n = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  std::vector<double> spectrum;  // ascending; empty when the trial failed
  std::optional<DetectionResult<double>> blind;
  std::optional<DetectionResult<double>> model_based;
  bool noise_covered = false;
  MomentSequence<double> moments;
  std::string error;

  bool ok() const { return error.empty(); }
};

struct SampleSizeReport {
  int n = 0;
  double y = 0;
  SupportLayout<double> layout;
  bool noise_separated = false;  // split_exists: the leftmost component is pure noise
  MomentSequence<double> theory_moments;
  std::vector<TrialRecord> trials;

  double blind_rate = 0;  // fraction of trials with q_hat == q
  double model_rate = 0;  // NaN unless noise_separated
  double coverage = 0;    // NaN unless noise_separated
};

struct ExperimentReport {
  ExperimentConfig config;
  Scenario<double> scenario;
  NoiseSignalModel<double> model = NoiseSignalModel<double>::pure_noise(1.0);
  SupportLayout<double> population;
  double critical_y = 0;
  std::vector<SampleSizeReport> settings;

  int failures() const;
};

/// Seed of trial `trial` at sample size n.
std::uint64_t trial_seed(std::uint64_t master, int n, int trial);

/// Runs every (n, trial) pair on `jobs` threads. Results do not depend on
/// the thread count. Trial-level exceptions are recorded, not rethrown.
ExperimentReport run_experiment(const ExperimentConfig& cfg, int jobs = 1);

/// Log-spaced histogram edges covering the pooled eigenvalues, with a first
/// bin [0, smallest positive) when zeros are present.
std::vector<double> histogram_edges(const std::vector<double>& values, int bins);

/// Density sample points: Chebyshev-spaced inside every support component.
std::vector<double> density_grid(const SupportLayout<double>& layout, int points_per_component);

struct DensitySamples {
  std::vector<double> x;
  std::vector<double> density;
};

/// Limiting density inside each support component (smoothing width scaled
/// to the component) plus `gap_points` evenly spaced points in every gap.
DensitySamples sample_density(const SupportLayout<double>& layout, const NoiseSignalModel<double>& model,
                              int points_per_component, int gap_points = 8);

void write_summary(std::ostream& out, const ExperimentReport& report);

/// Writes all output files into `dir` (created if needed).
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace rmtdetect
