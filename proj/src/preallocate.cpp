#include "vehoff/preallocate.hpp"

#include <algorithm>
#include <cmath>

namespace vehoff {

int ReferenceSchedule::bs(int n, int t) const {
  const BinaryMatrix& E = association[static_cast<std::size_t>(column(t))];
  for (int m = 0; m < E.cols(); ++m)
    if (E(n, m) != 0) return m;
  return 0;
}

Action ReferenceSchedule::action_at(int t) const {
  const int j = column(t);
  Action a;
  a.association = association[static_cast<std::size_t>(j)];
  a.time_shares = time_shares.col(j);
  a.rates = rates.col(j);
  return a;
}

PhiTable average_basis(const ChannelModel& ch, const SystemState& st, int horizon) {
  PhiTable out;
  const int N = ch.n_vehicles();
  const int M = ch.n_bs();
  for (int k = 0; st.slot + k <= horizon; ++k) {
    Matrix p(N, M);
    for (int n = 0; n < N; ++n)
      for (int m = 0; m < M; ++m) p(n, m) = ch.average_phi(n, st.positions[n], k, m);
    out.push_back(std::move(p));
  }
  return out;
}

PhiTable true_basis(const ChannelModel& ch, const TrialPaths& paths, int from_slot, int horizon) {
  PhiTable out;
  const int N = ch.n_vehicles();
  const int M = ch.n_bs();
  for (int t = from_slot; t <= horizon; ++t) {
    Matrix p(N, M);
    for (int n = 0; n < N; ++n)
      for (int m = 0; m < M; ++m) p(n, m) = ch.actual_phi(n, paths.position(n, t), m);
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

struct Plan {
  std::vector<BinaryMatrix> E;
  Matrix tau;
  Matrix rate;
};

int assigned(const BinaryMatrix& E, int n) {
  for (int m = 0; m < E.cols(); ++m)
    if (E(n, m) != 0) return m;
  return 0;
}

// Shares and Phi seen by vehicle n from slot offset u on.
void vehicle_view(const Plan& p, const PhiTable& phis, int n, int u, Vector& taus, Vector& ph) {
  const int S = static_cast<int>(p.rate.cols());
  const int len = std::max(S - u, 0);
  taus = p.tau.row(n).segment(u, len).transpose();
  ph.resize(len);
  for (int j = 0; j < len; ++j) ph(j) = phis[static_cast<std::size_t>(u + j)](n, assigned(p.E[static_cast<std::size_t>(u + j)], n));
}

bool single_choice(const Vector& rates, const Matrix& phis, double p_max) {
  for (int n = 0; n < rates.size(); ++n) {
    if (rates(n) <= 0.0) continue;
    int reach = 0;
    for (int m = 0; m < phis.cols(); ++m) reach += phis(n, m) < p_max;
    if (reach > 1) return false;
  }
  return true;
}

}  // namespace

ReferenceSchedule solve_preallocation_on_basis(const Scenario& s, const SystemState& st,
                                               const PhiTable& phis, const SolverSettings& settings) {
  const int N = s.n_vehicles();
  const int M = s.n_bs();
  const int S = static_cast<int>(phis.size());
  const RadioParams& radio = s.radio;
  const CostWeights& w = s.weights;

  std::vector<double> d(N);
  std::vector<int> u(N);
  for (int n = 0; n < N; ++n) {
    d[n] = outstanding_bits(s, st, n);
    u[n] = std::min(first_usable_slot(s, st, n) - st.slot, S);
  }

  Plan p;
  p.tau = Matrix::Zero(N, S);
  p.rate = Matrix::Zero(N, S);
  for (int j = 0; j < S; ++j) {
    BinaryMatrix E = BinaryMatrix::Zero(N, M);
    Vector load = Vector::Zero(M);
    for (int n = 0; n < N; ++n) {
      int best = 0;
      phis[j].row(n).minCoeff(&best);
      E(n, best) = 1;
      if (d[n] > 0.0 && j >= u[n] && phis[j](n, best) < radio.p_max_w) load(best) += 1.0;
    }
    for (int n = 0; n < N; ++n) {
      const int m = assigned(E, n);
      if (d[n] > 0.0 && j >= u[n] && phis[j](n, m) < radio.p_max_w) p.tau(n, j) = 1.0 / load(m);
    }
    p.E.push_back(std::move(E));
  }
  // Iteration 0 rates: split each task in proportion to the slot caps.
  for (int n = 0; n < N; ++n) {
    if (d[n] <= 0.0) continue;
    Vector taus, ph;
    vehicle_view(p, phis, n, u[n], taus, ph);
    const Vector caps = rate_caps(taus, ph, radio);
    const double total = caps.sum();
    if (total <= 0.0) continue;
    const Vector r = total > d[n] ? Vector(caps * (d[n] / total)) : caps;
    p.rate.row(n).segment(u[n], r.size()) = r.transpose();
  }

  auto vehicle_cost = [&](int n) {
    if (d[n] <= 0.0) return 0.0;
    Vector taus, ph;
    vehicle_view(p, phis, n, u[n], taus, ph);
    return plan_cost(d[n], taus, ph, p.rate.row(n).segment(u[n], taus.size()).transpose(), w, radio);
  };
  auto total_cost = [&]() {
    double j = 0.0;
    for (int n = 0; n < N; ++n) j += vehicle_cost(n);
    return j;
  };

  // Vehicles left with unsent bits may buy more time in slot j at the
  // residual price; the others keep their bits. Kept only if the plan gains.
  const bool price_residue = w.energy_weight > 0.0 && w.residual_per_bit() > 0.0;
  auto priced_step = [&](int j) {
    const BinaryMatrix& E = p.E[static_cast<std::size_t>(j)];
    Vector residue = Vector::Zero(N);
    for (int n = 0; n < N; ++n)
      if (d[n] > 0.0 && j >= u[n]) residue(n) = std::max(d[n] - p.rate.row(n).segment(u[n], S - u[n]).sum(), 0.0);
    for (int m = 0; m < M; ++m) {
      std::vector<int> members;
      bool any_priced = false;
      for (int n = 0; n < N; ++n) {
        if (E(n, m) == 0 || d[n] <= 0.0 || j < u[n]) continue;
        members.push_back(n);
        any_priced = any_priced || (residue(n) > 1.0 && phis[j](n, m) < radio.p_max_w);
      }
      if (!any_priced) continue;
      const int k = static_cast<int>(members.size());
      Vector bits(k), value = Vector::Zero(k), ph(k), new_rates;
      for (int i = 0; i < k; ++i) {
        const int n = members[static_cast<std::size_t>(i)];
        bits(i) = p.rate(n, j);
        ph(i) = phis[j](n, m);
        if (residue(n) > 1.0) {
          bits(i) += residue(n);
          value(i) = w.residual_per_bit() / w.energy_weight;
        }
      }
      CellAllocation cell;
      try {
        cell = allocate_cell_priced(bits, value, ph, radio, new_rates);
      } catch (const InfeasibleError&) {
        continue;
      }
      double before = 0.0, after = 0.0;
      Vector old_tau(k), old_rate(k);
      for (int i = 0; i < k; ++i) {
        const int n = members[static_cast<std::size_t>(i)];
        before += vehicle_cost(n);
        old_tau(i) = p.tau(n, j);
        old_rate(i) = p.rate(n, j);
        p.tau(n, j) = cell.taus(i);
        p.rate(n, j) = new_rates(i);
      }
      for (int n : members) after += vehicle_cost(n);
      if (after < before) continue;
      for (int i = 0; i < k; ++i) {
        const int n = members[static_cast<std::size_t>(i)];
        p.tau(n, j) = old_tau(i);
        p.rate(n, j) = old_rate(i);
      }
    }
  };

  ReferenceSchedule ref;
  ref.start_slot = st.slot;
  double J = total_cost();
  ref.objective_history.push_back(J);

  for (int iter = 0; iter < settings.max_alternations; ++iter) {
    // (a) association and shares slot by slot, rates held fixed.
    for (int j = 0; j < S; ++j) {
      const Vector r = p.rate.col(j);
      if (r.maxCoeff() <= 0.0) {
        p.tau.col(j).setZero();
        continue;
      }
      BinaryMatrix& E = p.E[static_cast<std::size_t>(j)];
      const double old_energy = slot_energy_total(E, p.tau.col(j), r, phis[j], radio);
      BinaryMatrix best_E = E;
      Vector best_tau = p.tau.col(j);
      double best_energy = old_energy;
      auto consider = [&](const BinaryMatrix& cand) {
        try {
          const Vector t = solve_time_given_association(cand, r, phis[j], settings, radio);
          const double e = slot_energy_total(cand, t, r, phis[j], radio);
          if (e < best_energy) {
            best_energy = e;
            best_E = cand;
            best_tau = t;
          }
        } catch (const InfeasibleError&) {
        }
      };
      consider(E);
      if (M > 1 && !single_choice(r, phis[j], radio.p_max_w)) {
        try {
          const Matrix warm = E.cast<double>();
          const RelaxedBsTime rel = solve_bs_time_relaxed(r, phis[j], settings, radio, &warm);
          const BinaryMatrix rounded = round_association(rel.fractions);
          if (rounded != E) consider(rounded);
        } catch (const InfeasibleError&) {
        }
      }
      E = best_E;
      p.tau.col(j) = best_tau;
      if (price_residue) priced_step(j);
    }

    // (b) throughput vehicle by vehicle, shares held fixed.
    for (int n = 0; n < N; ++n) {
      if (d[n] <= 0.0) continue;
      Vector taus, ph;
      vehicle_view(p, phis, n, u[n], taus, ph);
      const double current = vehicle_cost(n);
      const ThroughputPlan plan = solve_vehicle_throughput(d[n], taus, ph, w, radio);
      if (plan.cost <= current) p.rate.row(n).segment(u[n], taus.size()) = plan.rates.transpose();
    }

    const double J_new = total_cost();
    ref.objective_history.push_back(J_new);
    const double gain = J - J_new;
    J = std::min(J, J_new);
    if (gain <= settings.improvement_tolerance * std::max(1.0, std::abs(J))) break;
  }

  for (int j = 0; j < S; ++j)
    for (int n = 0; n < N; ++n)
      if (p.rate(n, j) <= 0.0) p.tau(n, j) = 0.0;

  ref.objective = total_cost();
  ref.association = std::move(p.E);
  ref.time_shares = std::move(p.tau);
  ref.rates = std::move(p.rate);
  return ref;
}

ReferenceSchedule solve_preallocation(const Scenario& s, const SystemState& st, int super_slot,
                                      const SolverSettings& settings, const ChannelModel& ch) {
  (void)super_slot;
  ReferenceSchedule ref = solve_preallocation_on_basis(s, st, average_basis(ch, st, s.horizon()), settings);
  for (int k = 0; k < ref.n_slots(); ++k) {
    std::vector<Point> pts;
    for (int n = 0; n < s.n_vehicles(); ++n) pts.push_back(ch.average_position(n, st.positions[n], k));
    ref.basis_positions.push_back(std::move(pts));
  }
  return ref;
}

}  // namespace vehoff
