#pragma once

#include "vehoff/baselines.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vehoff {

enum class PolicyId { Proposed, DA, PAO, PAS3, PP };

std::string policy_name(PolicyId p);
std::optional<PolicyId> parse_policy(const std::string& name);

PolicyTrace run_policy(PolicyId p, const Scenario& s, const TrialPaths& paths, const RunOptions& opt);

/// Bad experiment configuration (maps to exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepSpec {
  std::string param;  // task_size | arrival | gamma | omega1 | vehicles
  std::vector<double> values;
};

struct ExperimentConfig {
  Scenario scenario;
  std::vector<PolicyId> policies{PolicyId::Proposed};
  int trials = 500;
  std::uint64_t master_seed = 42;
  std::optional<SweepSpec> sweep;
  int threads = 0;  // 0: one per hardware thread
  SolverSettings solver;
  ExecutionOptions execution;
};

/// Scenario with one sweep parameter overridden. `arrival` moves the first
/// vehicle's arrival slot; `vehicles` keeps the first k vehicles.
Scenario apply_sweep(const Scenario& s, const std::string& param, double value);

struct PointResult {
  PolicyId policy = PolicyId::Proposed;
  std::string sweep_param = "none";
  double sweep_value = 0.0;
  std::vector<TrialMetrics> trials;  // indexed by trial
};

struct MetricsRow {
  std::string policy;
  std::string sweep_param;
  double sweep_value = 0.0;
  double mean_cost = 0.0;
  double se_cost = 0.0;
  double mean_tx_slots = 0.0;
  double mean_energy_j = 0.0;
  double mean_residual_bits = 0.0;

  bool operator==(const MetricsRow&) const = default;
};

struct ExperimentResult {
  std::vector<PointResult> points;

  const PointResult* find(PolicyId p, double sweep_value) const;
};

/// Every policy sees the same trajectories for a given trial index. Output is
/// independent of the thread count.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// One row per super-slot length; each must divide the horizon.
ExperimentResult sweep_super_slot(const ExperimentConfig& config, const std::vector<int>& gammas);

MetricsRow aggregate(const PointResult& p);
std::vector<MetricsRow> aggregate(const ExperimentResult& r);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};
MeanSe mean_se(const std::vector<double>& x);
/// Mean and standard error of a[i] - b[i].
MeanSe paired_difference(const PointResult& a, const PointResult& b);

std::string results_csv(const std::vector<MetricsRow>& rows);
std::string results_summary(const std::vector<MetricsRow>& rows);
/// Writes the CSV and, when `summary_path` is non-empty, the text summary.
void emit_results(const std::vector<MetricsRow>& rows, const std::string& csv_path,
                  const std::string& summary_path = {});
std::vector<MetricsRow> parse_results_csv(const std::string& text);
std::vector<MetricsRow> read_results_csv(const std::string& path);

}  // namespace vehoff
