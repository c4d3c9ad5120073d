#pragma once

#include "vehoff/channel.hpp"
#include "vehoff/dynamics.hpp"

#include <vector>

namespace vehoff {

struct SolverSettings {
  int max_alternations = 8;
  double gradient_tolerance = 1e-6;
  double bisection_tolerance = 1e-13;
  int max_gradient_iters = 200;
  // Alternation stops once an iteration gains less than this (relative).
  double improvement_tolerance = 1e-6;
};

// ---------------------------------------------------------------------------
// Per-vehicle throughput over a sequence of slots with fixed shares and Phi.
// Slot j carries at most max_rate(taus[j], phis[j]); slots with tau = 0 are
// unusable. The energy of a slot is tau Phi 2^{r/(tau T_s B)} when r > 0.

struct ThroughputPlan {
  Vector rates;
  double cost = 0.0;
};

Vector rate_caps(const Vector& taus, const Vector& phis, const RadioParams& radio);

/// Pending-slot count + w1 * energy + w2 * unsent bits when `rates` is
/// followed from `d` bits: each slot sends min(rate, remaining).
double plan_cost(double d, const Vector& taus, const Vector& phis, const Vector& rates,
                 const CostWeights& w, const RadioParams& radio);

/// Delivers exactly d within the first t_f slots at minimum energy
/// (water-filling). Throws InfeasibleError when the caps cannot hold d.
Vector solve_throughput_case1(double d, const Vector& taus, const Vector& phis, int t_f,
                              const CostWeights& w, const RadioParams& radio);

/// w1 * sum over the first t_f usable slots of tau Phi 2^{r/(tau T_s B)},
/// counting idle usable slots too; the objective water-filling minimizes.
double case1_objective(const Vector& taus, const Vector& phis, const Vector& rates, int t_f,
                       const CostWeights& w, const RadioParams& radio);

/// Per-slot marginal energy cost of one more bit, w1' Phi ln2 2^{r/(tau T_s B)}.
Vector marginal_costs(const Vector& taus, const Vector& phis, const Vector& rates,
                      const CostWeights& w, const RadioParams& radio);

/// Per-slot trade of energy against the residual penalty, capped at d in total.
Vector solve_throughput_case2(double d, const Vector& taus, const Vector& phis, const CostWeights& w,
                              const RadioParams& radio);

/// Best of Case 2 and Case 1 over every feasible completion slot.
ThroughputPlan solve_vehicle_throughput(double d, const Vector& taus, const Vector& phis,
                                        const CostWeights& w, const RadioParams& radio);

// ---------------------------------------------------------------------------
// Association and time shares within one slot.

struct CellAllocation {
  Vector taus;
  Vector spectral;  // y = r / (tau T_s B) per vehicle
  double energy = 0.0;
  double price = 0.0;  // multiplier of the cell time budget
};

/// Minimum-energy shares for the given bits in one cell. Vehicles with zero
/// bits get zero share. Throws InfeasibleError when the peak power cap makes
/// the bits impossible within one slot.
CellAllocation allocate_cell_time(const Vector& bits, const Vector& phis, const RadioParams& radio,
                                  double tolerance = 1e-13);

/// Cell shares when some vehicles may send less. Vehicles with value(k) = 0
/// must send bits(k); the others may send up to bits(k), each bit worth
/// value(k) joules. Minimizes energy minus the value of what is sent.
/// `rates` receives the bits sent.
CellAllocation allocate_cell_priced(const Vector& bits, const Vector& value, const Vector& phis,
                                    const RadioParams& radio, Vector& rates);

struct RelaxedBsTime {
  Matrix fractions;  // N x M, rows on the simplex
  Matrix pair_time;  // N x M shares
  double energy = 0.0;
  int iterations = 0;
};

/// Projected-gradient solve of the fractional association problem. `warm`
/// (optional) seeds the fractions.
RelaxedBsTime solve_bs_time_relaxed(const Vector& rates, const Matrix& phis,
                                    const SolverSettings& settings, const RadioParams& radio,
                                    const Matrix* warm = nullptr);

BinaryMatrix round_association(const Matrix& fractional);

Vector solve_time_given_association(const BinaryMatrix& E, const Vector& rates, const Matrix& phis,
                                    const SolverSettings& settings, const RadioParams& radio);

/// sum of tau Phi 2^{r/(tau T_s B)} over vehicles with r > 0.
double slot_energy_total(const BinaryMatrix& E, const Vector& taus, const Vector& rates,
                         const Matrix& phis, const RadioParams& radio);

// ---------------------------------------------------------------------------
// Open-loop plan for the remaining slots.

struct ReferenceSchedule {
  int start_slot = 1;
  std::vector<BinaryMatrix> association;  // one per slot start..T
  Matrix time_shares;                     // N x slots
  Matrix rates;                           // N x slots
  std::vector<std::vector<Point>> basis_positions;  // [slot][vehicle]
  double objective = 0.0;
  std::vector<double> objective_history;

  int n_slots() const { return static_cast<int>(rates.cols()); }
  int end_slot() const { return start_slot + n_slots() - 1; }
  int column(int t) const { return t - start_slot; }
  int bs(int n, int t) const;
  Action action_at(int t) const;
};

/// Phi for each remaining slot, N x M per slot, starting at state.slot.
using PhiTable = std::vector<Matrix>;

PhiTable average_basis(const ChannelModel& ch, const SystemState& st, int horizon);
PhiTable true_basis(const ChannelModel& ch, const TrialPaths& paths, int from_slot, int horizon);

/// Alternating pre-allocation against a fixed Phi table.
ReferenceSchedule solve_preallocation_on_basis(const Scenario& s, const SystemState& st,
                                               const PhiTable& phis, const SolverSettings& settings);

/// Pre-allocation on average trajectories conditioned on the realized state.
ReferenceSchedule solve_preallocation(const Scenario& s, const SystemState& st, int super_slot,
                                      const SolverSettings& settings, const ChannelModel& ch);

}  // namespace vehoff
