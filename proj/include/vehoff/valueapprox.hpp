#pragma once

#include "vehoff/preallocate.hpp"

#include <vector>

namespace vehoff {

/// Planned rates of one vehicle for slots first_slot..T.
struct RateTail {
  int first_slot = 1;
  Vector rates;
};

/// Shares and expected Phi of vehicle n for slots first..T under the
/// reference association, looking ahead from waypoint `anchor_pos` observed at
/// `anchor_slot`. Step 0 uses the exact Phi of the anchor waypoint.
void reference_channels(const ReferenceSchedule& ref, const ChannelModel& ch, int n, int anchor_pos,
                        int anchor_slot, int first, int last, Vector& taus, Vector& phis);

/// Achievable cost of following `tail` (slots t+1..T) from d bits when the
/// vehicle sits at `position` in slot t+1: pending slots + w1 * expected
/// energy + w2 * unsent bits.
double achievable_cost(const Scenario& s, const ChannelModel& ch, const ReferenceSchedule& ref, int n,
                       double d, int position, const RateTail& tail);

struct ExpectedValue {
  double value = 0.0;
  Vector per_vehicle;
  std::vector<RateTail> tails;
};

/// Approximate cost-to-go after taking `a` in `st`: next buffers follow the
/// queue, next positions are averaged over the chain, and each vehicle's tail
/// is the best of the optimized tail, the reference tail and any candidates.
ExpectedValue expected_value(const Scenario& s, const ChannelModel& ch, const SystemState& st,
                             const Action& a, const ReferenceSchedule& ref,
                             const std::vector<RateTail>* candidates = nullptr);

/// Open-loop expected cost of following `ref` from `st`, current slot included.
double evaluate_reference_cost(const Scenario& s, const ChannelModel& ch, const SystemState& st,
                               const ReferenceSchedule& ref);

}  // namespace vehoff
