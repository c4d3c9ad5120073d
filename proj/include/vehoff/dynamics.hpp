#pragma once

#include "vehoff/rng.hpp"
#include "vehoff/scenario.hpp"

#include <optional>
#include <string>
#include <vector>

namespace vehoff {

// Buffers hold the bits available for upload at the start of `slot`. A task
// arriving at slot T_a is already counted in the state of slot T_a, so the
// pending indicator is charged from T_a onward.
struct SystemState {
  Vector buffers;
  std::vector<int> positions;
  int slot = 1;

  int n_vehicles() const { return static_cast<int>(buffers.size()); }
};

struct Action {
  BinaryMatrix association;  // N x M, one-hot rows
  Vector time_shares;
  Vector rates;  // bits in this slot

  static Action zero(int n_vehicles, int n_bs);
  /// Index of the associated BS of vehicle n (first nonzero in its row).
  int bs(int n) const;
};

/// One sampled trajectory per vehicle; positions[n].positions[t-1] is the
/// waypoint at slot t.
struct TrialPaths {
  std::vector<Trajectory> vehicles;

  int position(int n, int t) const { return vehicles[n].positions[static_cast<std::size_t>(t - 1)]; }
  std::vector<int> positions_at(int t) const;
};

/// Draws every vehicle's full trajectory, vehicle by vehicle, from `rng`.
TrialPaths sample_paths(const Scenario& s, Rng& rng);

SystemState initial_state(const Scenario& s, const std::vector<int>& positions);
SystemState initial_state(const Scenario& s);

double step_queue(double d, double r, const TaskSpec& spec, int t);

/// Bits still to deliver for vehicle n and the first slot it may use. Before
/// the arrival slot the whole task is outstanding but unusable.
double outstanding_bits(const Scenario& s, const SystemState& st, int n);
int first_usable_slot(const Scenario& s, const SystemState& st, int n);

/// Names every violated constraint (C1 one BS per vehicle, C2 nonnegative
/// shares, C3 cell time budget, C4 peak power) at the state's positions.
std::vector<std::string> action_violations(const Action& a, const SystemState& st, const Scenario& s,
                                           double tol = 1e-9);

struct SlotCost {
  Vector per_vehicle;
  double total = 0.0;
};

/// 1(d>0) + w1 P tau per vehicle, plus the residual penalty at t = T. Throws
/// InfeasibleError naming the first violated constraint.
SlotCost slot_cost(const SystemState& st, const Action& a, const Scenario& s);

/// Buffer grid used by the quantized DP and quantized execution.
struct Quantizer {
  int levels = 21;
  double max_bits = 0.0;

  double step() const { return max_bits / (levels - 1); }
  /// Smallest grid level >= bits.
  double round_up(double bits) const;
  int level_of(double bits) const;
};

struct ExecutionOptions {
  std::optional<Quantizer> quantizer;
  // A planned rate within this many bits of the buffer flushes the buffer.
  double snap_bits = 64.0;
};

struct SlotOutcome {
  SystemState next;
  Vector cost;
  Vector delivered;
  Vector power;
  Vector energy_j;  // P tau T_s
  Vector energy_term;  // P tau, the quantity weighted by w1
  Vector pending;      // 1(d > 0)
  Vector residual;     // d_{T+1} on the last slot, else 0
};

/// Realizes one slot: rates are rounded to whole bits, clipped to the peak
/// power cap at the actual position and to the buffer; unsent bits stay
/// queued. The next positions are supplied by the caller.
SlotOutcome execute_slot(const SystemState& st, const Action& a, const Scenario& s,
                         const std::vector<int>& next_positions, const ExecutionOptions& opt = {});

/// Same, sampling the next positions from `rng` in vehicle order.
SlotOutcome execute_slot(const SystemState& st, const Action& a, const Scenario& s, Rng& rng,
                         const ExecutionOptions& opt = {});

struct TrialMetrics {
  double total_cost = 0.0;
  Eigen::VectorXi transmission_slots;  // slots with delivered > 0
  Eigen::VectorXi pending_slots;       // slots with d > 0
  double energy_j = 0.0;
  double energy_term = 0.0;
  double residual_bits = 0.0;
  Vector delivered_bits;

  void reset(int n_vehicles);
  void add(const SlotOutcome& o);
  double mean_tx_slots() const;
  /// pending + w1 * energy_term + w2 * residual, summed in a fixed order.
  double decomposed_cost(const CostWeights& w) const;
};

}  // namespace vehoff
