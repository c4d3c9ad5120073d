#include "vehoff/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace vehoff {

Action Action::zero(int n_vehicles, int n_bs) {
  Action a;
  a.association = BinaryMatrix::Zero(n_vehicles, n_bs);
  a.association.col(0).setOnes();
  a.time_shares = Vector::Zero(n_vehicles);
  a.rates = Vector::Zero(n_vehicles);
  return a;
}

int Action::bs(int n) const {
  for (int m = 0; m < association.cols(); ++m)
    if (association(n, m) != 0) return m;
  return 0;
}

std::vector<int> TrialPaths::positions_at(int t) const {
  std::vector<int> out(vehicles.size());
  for (std::size_t n = 0; n < vehicles.size(); ++n) out[n] = position(static_cast<int>(n), t);
  return out;
}

TrialPaths sample_paths(const Scenario& s, Rng& rng) {
  TrialPaths p;
  for (int n = 0; n < s.n_vehicles(); ++n)
    p.vehicles.push_back(sample_trajectory(s.routes[n], s.transitions[n], s.routes[n].start_index,
                                           s.horizon(), rng));
  return p;
}

SystemState initial_state(const Scenario& s, const std::vector<int>& positions) {
  SystemState st;
  st.slot = 1;
  st.positions = positions;
  st.buffers = Vector::Zero(s.n_vehicles());
  for (int n = 0; n < s.n_vehicles(); ++n)
    if (s.tasks[n].arrival_slot == 1) st.buffers(n) = s.tasks[n].size_bits;
  return st;
}

SystemState initial_state(const Scenario& s) {
  std::vector<int> pos;
  for (const auto& r : s.routes) pos.push_back(r.start_index);
  return initial_state(s, pos);
}

double step_queue(double d, double r, const TaskSpec& spec, int t) {
  if (t < spec.arrival_slot) return 0.0;
  if (t == spec.arrival_slot) return std::max(spec.size_bits - r, 0.0);
  return std::max(d - r, 0.0);
}

double outstanding_bits(const Scenario& s, const SystemState& st, int n) {
  if (st.slot < s.tasks[n].arrival_slot) return s.tasks[n].size_bits;
  return st.buffers(n);
}

int first_usable_slot(const Scenario& s, const SystemState& st, int n) {
  return std::max(st.slot, s.tasks[n].arrival_slot);
}

std::vector<std::string> action_violations(const Action& a, const SystemState& st, const Scenario& s,
                                           double tol) {
  std::vector<std::string> out;
  const int N = s.n_vehicles();
  const int M = s.n_bs();
  if (a.association.rows() != N || a.association.cols() != M || a.time_shares.size() != N ||
      a.rates.size() != N) {
    out.push_back("action dimensions do not match the scenario");
    return out;
  }
  Vector load = Vector::Zero(M);
  for (int n = 0; n < N; ++n) {
    const std::string vn = "vehicle " + std::to_string(n);
    int ones = 0;
    bool binary = true;
    for (int m = 0; m < M; ++m) {
      const int e = a.association(n, m);
      if (e != 0 && e != 1) binary = false;
      ones += e;
    }
    if (!binary || ones != 1) out.push_back("C1: " + vn + " must be associated with exactly one BS");
    const double tau = a.time_shares(n);
    if (!(tau >= -tol) || tau > 1.0 + tol) out.push_back("C2: " + vn + " time share outside [0, 1]");
    if (!(a.rates(n) >= 0.0)) out.push_back("C4: " + vn + " has a negative rate");
    const int m = a.bs(n);
    load(m) += std::max(tau, 0.0);
    if (a.rates(n) > 0.0) {
      if (tau <= 0.0) {
        out.push_back("C4: " + vn + " has a positive rate with zero time share");
        continue;
      }
      const double phi = phi_factor(s.routes[n].waypoints[st.positions[n]], s.bs_positions[m], s.radio, m);
      const double p = power_for_rate(a.rates(n), tau, phi, s.radio);
      if (p > s.radio.p_max_w * (1.0 + tol)) out.push_back("C4: " + vn + " exceeds peak power");
    }
  }
  for (int m = 0; m < M; ++m)
    if (load(m) > 1.0 + tol) out.push_back("C3: BS " + std::to_string(m) + " time shares exceed 1");
  return out;
}

SlotCost slot_cost(const SystemState& st, const Action& a, const Scenario& s) {
  const auto v = action_violations(a, st, s);
  if (!v.empty()) throw InfeasibleError(v.front(), "slot " + std::to_string(st.slot));
  const int N = s.n_vehicles();
  SlotCost c;
  c.per_vehicle = Vector::Zero(N);
  const double w1 = s.weights.energy_weight;
  const double w2 = s.weights.residual_per_bit();
  for (int n = 0; n < N; ++n) {
    const double d = st.buffers(n);
    double cost = d > 0.0 ? 1.0 : 0.0;
    if (a.rates(n) > 0.0) {
      const int m = a.bs(n);
      const double phi = phi_factor(s.routes[n].waypoints[st.positions[n]], s.bs_positions[m], s.radio, m);
      cost += w1 * slot_energy(a.rates(n), a.time_shares(n), phi, s.radio);
    }
    if (st.slot == s.horizon()) cost += w2 * step_queue(d, a.rates(n), s.tasks[n], st.slot);
    c.per_vehicle(n) = cost;
  }
  c.total = c.per_vehicle.sum();
  return c;
}

double Quantizer::round_up(double bits) const {
  if (bits <= 0.0) return 0.0;
  const double h = step();
  double k = std::ceil(bits / h);
  // Values that already sit on the grid must not move up a level.
  if ((k - 1.0) * h >= bits) k -= 1.0;
  return std::min(k * h, max_bits);
}

int Quantizer::level_of(double bits) const {
  return static_cast<int>(std::lround(round_up(bits) / step()));
}

SlotOutcome execute_slot(const SystemState& st, const Action& a, const Scenario& s,
                         const std::vector<int>& next_positions, const ExecutionOptions& opt) {
  const int N = s.n_vehicles();
  const int t = st.slot;
  const RadioParams& radio = s.radio;
  const double w1 = s.weights.energy_weight;
  const double w2 = s.weights.residual_per_bit();

  SlotOutcome o;
  o.cost = o.delivered = o.power = o.energy_j = o.energy_term = o.pending = o.residual = Vector::Zero(N);
  o.next.slot = t + 1;
  o.next.positions = next_positions;
  o.next.buffers = Vector::Zero(N);

  for (int n = 0; n < N; ++n) {
    const double d = st.buffers(n);
    const double tau = a.time_shares(n);
    const int m = a.bs(n);
    double phi = 0.0;
    double sent = 0.0;
    if (d > 0.0 && a.rates(n) > 0.0 && tau > 0.0) {
      phi = phi_factor(s.routes[n].waypoints[st.positions[n]], s.bs_positions[m], radio, m);
      const double cap = std::floor(max_rate(tau, phi, radio.p_max_w, radio));
      double want = std::min(std::round(a.rates(n)), cap);
      if (d - want <= opt.snap_bits && d <= cap) want = d;
      sent = std::clamp(want, 0.0, d);
      if (opt.quantizer) sent = d - opt.quantizer->round_up(d - sent);
    }
    double power = 0.0;
    if (sent > 0.0) power = power_for_rate(sent, tau, phi, radio);

    double next = step_queue(d, sent, s.tasks[n], t);
    if (t + 1 == s.tasks[n].arrival_slot) next = s.tasks[n].size_bits;

    o.delivered(n) = sent;
    o.power(n) = power;
    o.energy_term(n) = power * tau;
    o.energy_j(n) = power * tau * radio.slot_seconds;
    o.pending(n) = d > 0.0 ? 1.0 : 0.0;
    o.cost(n) = o.pending(n) + w1 * o.energy_term(n);
    if (t == s.horizon()) {
      o.residual(n) = next;
      o.cost(n) += w2 * next;
    }
    o.next.buffers(n) = next;
  }
  return o;
}

SlotOutcome execute_slot(const SystemState& st, const Action& a, const Scenario& s, Rng& rng,
                         const ExecutionOptions& opt) {
  std::vector<int> next(st.positions.size());
  for (std::size_t n = 0; n < next.size(); ++n)
    next[n] = step_position(s.transitions[n], st.positions[n], uniform01(rng));
  return execute_slot(st, a, s, next, opt);
}

void TrialMetrics::reset(int n_vehicles) {
  *this = TrialMetrics{};
  transmission_slots = Eigen::VectorXi::Zero(n_vehicles);
  pending_slots = Eigen::VectorXi::Zero(n_vehicles);
  delivered_bits = Vector::Zero(n_vehicles);
}

void TrialMetrics::add(const SlotOutcome& o) {
  total_cost += o.cost.sum();
  for (int n = 0; n < o.cost.size(); ++n) {
    if (o.delivered(n) > 0.0) ++transmission_slots(n);
    if (o.pending(n) > 0.0) ++pending_slots(n);
  }
  energy_j += o.energy_j.sum();
  energy_term += o.energy_term.sum();
  residual_bits += o.residual.sum();
  delivered_bits += o.delivered;
}

double TrialMetrics::mean_tx_slots() const {
  if (transmission_slots.size() == 0) return 0.0;
  return transmission_slots.cast<double>().mean();
}

double TrialMetrics::decomposed_cost(const CostWeights& w) const {
  return static_cast<double>(pending_slots.sum()) + w.energy_weight * energy_term +
         w.residual_per_bit() * residual_bits;
}

}  // namespace vehoff
