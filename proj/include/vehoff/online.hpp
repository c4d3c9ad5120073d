#pragma once

#include "vehoff/valueapprox.hpp"

#include <optional>
#include <vector>

namespace vehoff {

struct OnlineSolution {
  Action action;
  std::vector<RateTail> tails;
  double objective = 0.0;            // slot cost + approximate cost-to-go
  double reference_objective = 0.0;  // same for the reference action
  std::vector<double> history;       // objective after each alternation
};

/// Improves the reference action at the actual current state. The returned
/// objective never exceeds the reference action's.
OnlineSolution solve_online_slot(const Scenario& s, const ChannelModel& ch, const SystemState& st,
                                 const ReferenceSchedule& ref, const SolverSettings& settings);

/// Optimal shares and rates of one cell in the last slot, trading energy
/// against the residual penalty. `bits` are the outstanding buffers.
void terminal_cell_allocation(const Vector& bits, const Vector& phis, const CostWeights& w,
                              const RadioParams& radio, Vector& taus, Vector& rates);

enum class ReferenceChoice { Pre, Post };

/// The cheaper of the fresh and the carried-over plan, evaluated at `st`.
/// The first super slot always takes the fresh plan; ties keep the carried one.
ReferenceChoice update_reference(const Scenario& s, const ChannelModel& ch, const SystemState& st,
                                 const ReferenceSchedule& pre, const ReferenceSchedule* post);

/// Plan carried into the next super slot: the reference's association and
/// shares with rates replaced by the tails minimizing the expected cost-to-go
/// after `last_action` in `st`.
ReferenceSchedule revise_reference_post(const Scenario& s, const ChannelModel& ch,
                                        const ReferenceSchedule& ref, const SystemState& st,
                                        const Action& last_action);

struct BoundRecord {
  int slot = 0;
  double reference_objective = 0.0;
  double chosen_objective = 0.0;
};

struct PolicyTrace {
  std::vector<SystemState> states;  // state at the start of each slot
  std::vector<Action> actions;
  std::vector<ReferenceChoice> reference_choice;  // one per super slot
  std::vector<BoundRecord> bounds;
  std::vector<SlotOutcome> outcomes;
  TrialMetrics metrics;
};

struct RunOptions {
  SolverSettings solver;
  ExecutionOptions execution;
  const ChannelModel* channel = nullptr;  // built from the scenario when absent
  bool keep_outcomes = false;
};

/// Executes one slot and records it in `trace`.
SystemState advance(const Scenario& s, const SystemState& st, const Action& a, const TrialPaths& paths,
                    const RunOptions& opt, PolicyTrace& trace);

PolicyTrace run_proposed_policy(const Scenario& s, Rng& rng, const RunOptions& opt = {});
PolicyTrace run_proposed_policy(const Scenario& s, const TrialPaths& paths, const RunOptions& opt = {});

}  // namespace vehoff
