#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "phasefb/config.hpp"

namespace phasefb {

/// Counter-based seed for one trial: a pure function of (master, trial,
/// stream), so results do not depend on scheduling or worker count.
std::uint64_t derive_trial_seed(std::uint64_t master, std::uint64_t trial,
                                std::uint64_t stream = 0);

struct SweepPoint {
  int antennas = 0;
  int users = 0;
  int paths = 0;
  int bits = 0;
  double power_dbm = 0.0;
};

struct ExperimentRecord {
  std::string experiment;
  SweepPoint point;
  std::string metric;
  double mean = 0.0;
  double std_error = 0.0;
  int trials = 0;
};

struct Summary {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Sample mean and standard error (sample std with n - 1, over sqrt(n)).
Summary summarize(std::span<const double> samples);

/// Sweep points in CSV order: antennas, then paths, then bits, then power.
std::vector<SweepPoint> sweep_points(const ScenarioConfig& cfg);

/// Runs fn(trial) for trial in [0, trials) on `workers` threads (0 = all
/// cores). Each result lands in its trial's slot.
std::vector<std::vector<double>> run_trials(int trials, int workers,
                                            const std::function<std::vector<double>(int)>& fn);

/// Reconstruction MSE per bit budget under greedy, uniform and zero-bit
/// allocation; closed-form and Monte Carlo columns.
std::vector<ExperimentRecord> run_mse_experiment(const ScenarioConfig& cfg);

/// Outer-product approximation error ||Delta||_F^2 / N^2 with its
/// large-array companion.
std::vector<ExperimentRecord> run_delta_experiment(const ScenarioConfig& cfg);

/// Ergodic sum spectral efficiency for each method in cfg.methods.
std::vector<ExperimentRecord> run_se_experiment(const ScenarioConfig& cfg);

/// Metric names produced by run_se_experiment for one method.
std::vector<std::string> se_metric_names(const std::string& method);

struct DropRecord {
  int drop = 0;
  SweepPoint point;
  std::string method;
  std::string reconstruction;
  double se_true = 0.0;
  double se_lower_bound = 0.0;
  int iterations = 0;
};

/// One record per drop and sweep point for a single precoder choice,
/// using the configured reconstruction mode and allocator.
std::vector<DropRecord> run_precode(const ScenarioConfig& cfg, PrecoderKind method);

void emit_csv(const std::vector<ExperimentRecord>& records, std::ostream& out);
void emit_csv(const std::vector<ExperimentRecord>& records, const std::string& path);
void emit_csv(const std::vector<DropRecord>& records, std::ostream& out);
void emit_csv(const std::vector<DropRecord>& records, const std::string& path);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace phasefb
