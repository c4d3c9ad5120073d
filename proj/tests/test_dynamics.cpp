#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace vehoff;
using vehoff::testing::line_scenario;

namespace {

Action single(double tau, double rate) {
  Action a = Action::zero(1, 1);
  a.time_shares(0) = tau;
  a.rates(0) = rate;
  return a;
}

double phi_at(const Scenario& s, int waypoint) {
  return phi_factor(s.routes[0].waypoints[static_cast<std::size_t>(waypoint)], s.bs_positions[0], s.radio);
}

}  // namespace

TEST_CASE("queue update") {
  const TaskSpec late{3, 10.0};
  CHECK(step_queue(0.0, 4.0, late, 1) == 0.0);
  CHECK(step_queue(0.0, 4.0, late, 2) == 0.0);
  const TaskSpec now{1, 5.0};
  CHECK(step_queue(5.0, 3.0, now, 2) == 2.0);
  CHECK(step_queue(2.0, 3.0, now, 2) == 0.0);
}

TEST_CASE("slot cost terms") {
  Scenario s = line_scenario(3, TransitionMatrix::identity(3), 4, 2, 1e6);
  s.weights = CostWeights{2.0, 5.0, 1.0};
  SystemState st = initial_state(s);
  const double phi = phi_at(s, 0);
  REQUIRE(phi < 1.0);
  const double c = s.radio.slot_bits();
  // P tau = 1 with tau = 1.
  const double r = c * std::log2(1.0 / phi);
  CHECK(slot_cost(st, single(1.0, r), s).total == doctest::Approx(3.0).epsilon(1e-12));

  st.buffers(0) = 0.0;
  CHECK(slot_cost(st, single(0.0, 0.0), s).total == 0.0);

  st.buffers(0) = 10.0;
  st.slot = 4;
  const double small = 6.0;
  const double energy = slot_energy(small, 1.0, phi, s.radio);
  CHECK(slot_cost(st, single(1.0, small), s).total == doctest::Approx(1.0 + 2.0 * energy + 5.0 * 4.0));
}

TEST_CASE("infeasible actions are rejected with the constraint named") {
  Scenario s = line_scenario(3, TransitionMatrix::identity(3), 4, 2, 1e6);
  s.routes.push_back(s.routes[0]);
  s.transitions.push_back(s.transitions[0]);
  s.tasks.push_back(s.tasks[0]);
  const SystemState st = initial_state(s);
  Action a = Action::zero(2, 1);
  a.time_shares << 0.7, 0.6;
  a.rates << 1.0, 1.0;
  const auto v = action_violations(a, st, s);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "C3: BS 0 time shares exceed 1");
  CHECK_THROWS_AS(slot_cost(st, a, s), InfeasibleError);

  a.time_shares << 0.5, 0.5;
  a.rates << 1e9, 0.0;
  CHECK(action_violations(a, st, s).at(0) == "C4: vehicle 0 exceeds peak power");
  a.association(1, 0) = 0;
  a.rates << 0.0, 0.0;
  CHECK(action_violations(a, st, s).at(0) == "C1: vehicle 1 must be associated with exactly one BS");
}

TEST_CASE("zero action keeps buffers and charges pending slots") {
  Scenario s = line_scenario(3, TransitionMatrix::identity(3), 4, 2, 1e6);
  const SystemState st = initial_state(s);
  const SlotOutcome o = execute_slot(st, single(0.0, 0.0), s, {0});
  CHECK(o.next.buffers(0) == 1e6);
  CHECK(o.cost.sum() == 1.0);
  CHECK(o.delivered(0) == 0.0);
}

TEST_CASE("late arrival lands in the state of its arrival slot") {
  Scenario s = line_scenario(3, TransitionMatrix::identity(3), 4, 2, 1e6);
  s.tasks[0].arrival_slot = 3;
  SystemState st = initial_state(s);
  CHECK(st.buffers(0) == 0.0);
  CHECK(outstanding_bits(s, st, 0) == 1e6);
  CHECK(first_usable_slot(s, st, 0) == 3);
  SlotOutcome o = execute_slot(st, single(0.0, 0.0), s, {0});
  CHECK(o.cost.sum() == 0.0);
  CHECK(o.next.buffers(0) == 0.0);
  o = execute_slot(o.next, single(0.0, 0.0), s, {0});
  CHECK(o.cost.sum() == 0.0);
  CHECK(o.next.buffers(0) == 1e6);  // present in the state of slot 3
  CHECK(o.next.slot == 3);
  o = execute_slot(o.next, single(0.0, 0.0), s, {0});
  CHECK(o.cost.sum() == 1.0);
}

TEST_CASE("rates above the local cap are clipped to peak power") {
  Scenario s = line_scenario(3, TransitionMatrix::identity(3), 4, 2, 1e9);
  const SystemState st = initial_state(s);
  const double cap = max_rate(0.5, phi_at(s, 0), s.radio.p_max_w, s.radio);
  const SlotOutcome o = execute_slot(st, single(0.5, 10.0 * cap), s, {0});
  CHECK(o.delivered(0) == std::floor(cap));
  CHECK(o.power(0) <= s.radio.p_max_w);
  CHECK(o.power(0) == doctest::Approx(s.radio.p_max_w).epsilon(1e-6));
  CHECK(o.next.buffers(0) == 1e9 - std::floor(cap));
}

TEST_CASE("execution sends whole bits and flushes near-empty buffers") {
  Scenario s = line_scenario(3, TransitionMatrix::identity(3), 4, 2, 1000.0);
  const SystemState st = initial_state(s);
  SlotOutcome o = execute_slot(st, single(0.5, 400.4), s, {0});
  CHECK(o.delivered(0) == 400.0);
  o = execute_slot(st, single(0.5, 960.0), s, {0});
  CHECK(o.delivered(0) == 1000.0);
  CHECK(o.next.buffers(0) == 0.0);
}

TEST_CASE("quantizer grid") {
  const Quantizer q{5, 100.0};
  CHECK(q.step() == 25.0);
  CHECK(q.round_up(0.0) == 0.0);
  CHECK(q.round_up(1.0) == 25.0);
  CHECK(q.round_up(25.0) == 25.0);
  CHECK(q.round_up(25.0000001) == 50.0);
  CHECK(q.round_up(100.0) == 100.0);
  CHECK(q.level_of(60.0) == 3);

  Scenario s = line_scenario(3, TransitionMatrix::identity(3), 4, 2, 100.0);
  const SystemState st = initial_state(s);
  ExecutionOptions opt;
  opt.quantizer = q;
  opt.snap_bits = 0.0;
  const SlotOutcome o = execute_slot(st, single(0.5, 30.0), s, {0}, opt);
  CHECK(o.next.buffers(0) == 75.0);
  CHECK(o.delivered(0) == 25.0);
}

TEST_CASE("trial metrics decompose the cost") {
  SyntheticOptions so;
  so.horizon = 10;
  const Scenario s = make_synthetic_scenario(so);
  Rng rng(3);
  RunOptions opt;
  opt.keep_outcomes = true;
  const PolicyTrace tr = run_proposed_policy(s, rng, opt);
  double sum = 0.0;
  for (const auto& o : tr.outcomes) sum += o.cost.sum();
  CHECK(tr.metrics.total_cost == doctest::Approx(sum).epsilon(1e-15));
  CHECK(tr.metrics.decomposed_cost(s.weights) == doctest::Approx(tr.metrics.total_cost).epsilon(1e-13));
  CHECK(tr.metrics.transmission_slots.sum() <= tr.metrics.pending_slots.sum());
  CHECK(tr.metrics.residual_bits >= 0.0);
}
