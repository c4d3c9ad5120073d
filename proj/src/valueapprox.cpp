#include "vehoff/valueapprox.hpp"

#include <algorithm>

namespace vehoff {

void reference_channels(const ReferenceSchedule& ref, const ChannelModel& ch, int n, int anchor_pos,
                        int anchor_slot, int first, int last, Vector& taus, Vector& phis) {
  const int len = std::max(last - first + 1, 0);
  taus.resize(len);
  phis.resize(len);
  for (int k = 0; k < len; ++k) {
    const int t = first + k;
    taus(k) = ref.time_shares(n, ref.column(t));
    phis(k) = ch.expected_phi(n, anchor_pos, t - anchor_slot, ref.bs(n, t));
  }
}

double achievable_cost(const Scenario& s, const ChannelModel& ch, const ReferenceSchedule& ref, int n,
                       double d, int position, const RateTail& tail) {
  if (d <= 0.0) return 0.0;
  Vector taus, phis;
  reference_channels(ref, ch, n, position, tail.first_slot, tail.first_slot, s.horizon(), taus, phis);
  return plan_cost(d, taus, phis, tail.rates, s.weights, s.radio);
}

ExpectedValue expected_value(const Scenario& s, const ChannelModel& ch, const SystemState& st,
                             const Action& a, const ReferenceSchedule& ref,
                             const std::vector<RateTail>* candidates) {
  const int N = s.n_vehicles();
  const int t = st.slot;
  const int T = s.horizon();
  ExpectedValue out;
  out.per_vehicle = Vector::Zero(N);
  out.tails.resize(N);
  for (int n = 0; n < N; ++n) {
    RateTail& tail = out.tails[n];
    tail.first_slot = t + 1;
    tail.rates = Vector::Zero(std::max(T - t, 0));
    if (t >= T) continue;

    const TaskSpec& task = s.tasks[n];
    double next = step_queue(st.buffers(n), a.rates(n), task, t);
    if (t + 1 <= task.arrival_slot) next = task.size_bits;
    if (next <= 0.0) continue;
    const int first = std::max(t + 1, task.arrival_slot);
    const int off = first - (t + 1);

    Vector taus, phis;
    // Linear in Phi, so averaging over the next waypoint is the same as
    // looking one step further ahead from the current one.
    reference_channels(ref, ch, n, st.positions[n], t, first, T, taus, phis);
    const ThroughputPlan best = solve_vehicle_throughput(next, taus, phis, s.weights, s.radio);
    double value = best.cost;
    Vector rates = best.rates;

    auto try_tail = [&](const Vector& full) {
      const Vector r = full.segment(off, taus.size());
      const double c = plan_cost(next, taus, phis, r, s.weights, s.radio);
      if (c < value) {
        value = c;
        rates = r;
      }
    };
    Vector ref_tail(T - t);
    for (int k = t + 1; k <= T; ++k) ref_tail(k - t - 1) = ref.rates(n, ref.column(k));
    try_tail(ref_tail);
    if (candidates && n < static_cast<int>(candidates->size())) {
      const RateTail& c = (*candidates)[n];
      if (c.first_slot == t + 1 && c.rates.size() == T - t) try_tail(c.rates);
    }
    tail.rates.segment(off, rates.size()) = rates;
    out.per_vehicle(n) = value;
  }
  out.value = out.per_vehicle.sum();
  return out;
}

double evaluate_reference_cost(const Scenario& s, const ChannelModel& ch, const SystemState& st,
                               const ReferenceSchedule& ref) {
  double total = 0.0;
  const int T = s.horizon();
  for (int n = 0; n < s.n_vehicles(); ++n) {
    const double d = outstanding_bits(s, st, n);
    if (d <= 0.0) continue;
    const int first = first_usable_slot(s, st, n);
    Vector taus, phis;
    reference_channels(ref, ch, n, st.positions[n], st.slot, first, T, taus, phis);
    Vector rates(taus.size());
    for (int k = 0; k < taus.size(); ++k) rates(k) = ref.rates(n, ref.column(first + k));
    total += plan_cost(d, taus, phis, rates, s.weights, s.radio);
  }
  return total;
}

}  // namespace vehoff
