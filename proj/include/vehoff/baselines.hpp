#pragma once

#include "vehoff/online.hpp"

#include <stdexcept>
#include <vector>

namespace vehoff {

/// Executes the first pre-allocation open loop for the whole period.
PolicyTrace run_da(const Scenario& s, const TrialPaths& paths, const RunOptions& opt = {});
/// Re-plans on average trajectories at every super slot, open loop within it.
PolicyTrace run_pao(const Scenario& s, const TrialPaths& paths, const RunOptions& opt = {});
/// The proposed policy with a single super slot spanning the period.
PolicyTrace run_pas3(const Scenario& s, const TrialPaths& paths, const RunOptions& opt = {});
/// Plans once against the true trajectory, known in advance.
PolicyTrace run_pp(const Scenario& s, const TrialPaths& paths, const RunOptions& opt = {});

PolicyTrace run_da(const Scenario& s, Rng& rng, const RunOptions& opt = {});
PolicyTrace run_pao(const Scenario& s, Rng& rng, const RunOptions& opt = {});
PolicyTrace run_pas3(const Scenario& s, Rng& rng, const RunOptions& opt = {});
PolicyTrace run_pp(const Scenario& s, Rng& rng, const RunOptions& opt = {});

// ---------------------------------------------------------------------------
// Exact DP on a quantized buffer grid.

struct ActionGrid {
  std::vector<double> time_shares{0.0, 0.25, 0.5, 0.75, 1.0};
};

struct DpAction {
  int bs = 0;
  int tau_index = 0;
  int levels = 0;  // grid levels sent this slot
};

class BudgetExceeded : public std::runtime_error {
 public:
  explicit BudgetExceeded(long long states)
      : std::runtime_error("state space of " + std::to_string(states) + " exceeds the DP budget"),
        states_(states) {}
  long long states() const { return states_; }

 private:
  long long states_;
};

struct DpResult {
  double value = 0.0;  // optimal expected cost from the initial state
  long long state_count = 0;
  Quantizer quantizer;
  ActionGrid grid;
  std::vector<int> stride;       // joint state index = sum stride[n] * (q * W_n + w)
  std::vector<int> waypoints;    // W_n
  std::vector<Vector> values;    // values[t-1] over joint states, t = 1..T+1
  std::vector<std::vector<DpAction>> policy;  // policy[t-1][state * N + n]

  int state_index(const std::vector<int>& levels, const std::vector<int>& positions) const;
  double value_at(int t, const std::vector<int>& levels, const std::vector<int>& positions) const;
};

/// Backward induction over (buffer level, waypoint) per vehicle. Throws
/// BudgetExceeded when (prod_n levels * W_n) * T exceeds `budget`.
DpResult exact_dp(const Scenario& s, const Quantizer& q, const ActionGrid& grid = {},
                  long long budget = 5'000'000);

/// Executes the DP's greedy policy; execution should use the same quantizer.
PolicyTrace run_dp_policy(const Scenario& s, const DpResult& dp, const TrialPaths& paths,
                          const RunOptions& opt = {});

}  // namespace vehoff
