#pragma once

#include "vehoff/mobility.hpp"
#include "vehoff/radio.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace vehoff {

struct TaskSpec {
  int arrival_slot = 1;
  double size_bits = 0.0;
};

struct CostWeights {
  double energy_weight = 0.0;
  double residual_weight = 0.0;
  // residual_weight is charged per this many bits; 1 means per bit.
  double residual_unit_bits = 1.0;

  double residual_per_bit() const { return residual_weight / residual_unit_bits; }
};

struct TimeGrid {
  int horizon_slots = 1;
  int super_slot_len = 1;

  int n_super_slots() const { return horizon_slots / super_slot_len; }
  /// 1-based super slot containing slot t.
  int super_slot_of(int t) const { return (t - 1) / super_slot_len + 1; }
  int first_slot(int iota) const { return (iota - 1) * super_slot_len + 1; }
};

struct Scenario {
  std::vector<Point> bs_positions;
  std::vector<Route> routes;
  std::vector<TransitionMatrix> transitions;
  RadioParams radio;
  std::vector<TaskSpec> tasks;
  CostWeights weights;
  TimeGrid time;

  int n_vehicles() const { return static_cast<int>(routes.size()); }
  int n_bs() const { return static_cast<int>(bs_positions.size()); }
  int horizon() const { return time.horizon_slots; }
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Empty iff the scenario is well formed. Messages name the offending field.
std::vector<std::string> validate_scenario(const Scenario& s);

/// JSON text <-> Scenario. Parsing validates nothing; load_scenario does.
Scenario parse_scenario(const std::string& json_text);
std::string dump_scenario(const Scenario& s);

/// Throws ScenarioError on parse failure or any validation message.
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& s, const std::string& path);

/// Frequency estimate from observed waypoint sequences. Waypoints never left
/// in the traces become absorbing.
TransitionMatrix estimate_transition_matrix(const std::vector<std::vector<int>>& traces,
                                            const Route& route);

/// Reads `trial,vehicle,slot,waypoint_index` rows and groups them into one
/// sequence per (vehicle, trial), ordered by slot. Result is indexed by vehicle.
std::vector<std::vector<std::vector<int>>> read_trace_csv(const std::string& path);

}  // namespace vehoff
