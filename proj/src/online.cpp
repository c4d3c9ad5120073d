#include "vehoff/online.hpp"

#include <boost/math/special_functions/lambert_w.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace vehoff {

namespace {

struct Candidate {
  BinaryMatrix E;
  Vector tau;
  Vector r;
  std::vector<Vector> tails;  // per vehicle, slots future_first..T
  Vector cost;
  double total = 0.0;
};

class SlotProblem {
 public:
  SlotProblem(const Scenario& s, const ChannelModel& ch, const SystemState& st,
              const ReferenceSchedule& ref)
      : s_(s), t_(st.slot), T_(s.horizon()), N_(s.n_vehicles()), M_(s.n_bs()) {
    phi_now_.resize(N_, M_);
    for (int n = 0; n < N_; ++n)
      for (int m = 0; m < M_; ++m) phi_now_(n, m) = ch.actual_phi(n, st.positions[n], m);
    d_.resize(N_);
    now_.resize(N_);
    fut_tau_.resize(N_);
    fut_phi_.resize(N_);
    for (int n = 0; n < N_; ++n) {
      d_[n] = outstanding_bits(s, st, n);
      const int first = first_usable_slot(s, st, n);
      now_[n] = first == t_ && d_[n] > 0.0;
      const int fut_first = std::max(first, t_ + 1);
      reference_channels(ref, ch, n, st.positions[n], t_, fut_first, T_, fut_tau_[n], fut_phi_[n]);
    }
  }

  const Matrix& phi_now() const { return phi_now_; }
  bool active_now(int n) const { return now_[n]; }
  double outstanding(int n) const { return d_[n]; }
  int future_len(int n) const { return static_cast<int>(fut_tau_[n].size()); }

  // The current slot (when usable) followed by the reference future.
  void sequence(const Candidate& c, int n, Vector& taus, Vector& phis) const {
    if (!now_[n]) {
      taus = fut_tau_[n];
      phis = fut_phi_[n];
      return;
    }
    const int k = future_len(n);
    taus.resize(k + 1);
    phis.resize(k + 1);
    taus(0) = c.tau(n);
    phis(0) = phi_now_(n, c.E.row(n).maxCoeff() > 0 ? assigned(c.E, n) : 0);
    taus.tail(k) = fut_tau_[n];
    phis.tail(k) = fut_phi_[n];
  }

  Vector rates_of(const Candidate& c, int n) const {
    if (!now_[n]) return c.tails[n];
    Vector r(future_len(n) + 1);
    r(0) = c.r(n);
    r.tail(future_len(n)) = c.tails[n];
    return r;
  }

  double vehicle_cost(const Candidate& c, int n) const {
    if (d_[n] <= 0.0) return 0.0;
    Vector taus, phis;
    sequence(c, n, taus, phis);
    return plan_cost(d_[n], taus, phis, rates_of(c, n), s_.weights, s_.radio);
  }

  void score(Candidate& c) const {
    c.cost.resize(N_);
    for (int n = 0; n < N_; ++n) c.cost(n) = vehicle_cost(c, n);
    c.total = c.cost.sum();
  }

  static int assigned(const BinaryMatrix& E, int n) {
    for (int m = 0; m < E.cols(); ++m)
      if (E(n, m) != 0) return m;
    return 0;
  }

  // (b): each vehicle re-plans its current rate and tail for fixed shares.
  void throughput_step(Candidate& c) const {
    for (int n = 0; n < N_; ++n) {
      if (d_[n] <= 0.0) continue;
      Vector taus, phis;
      sequence(c, n, taus, phis);
      const ThroughputPlan p = solve_vehicle_throughput(d_[n], taus, phis, s_.weights, s_.radio);
      if (!(p.cost < c.cost(n))) continue;
      if (now_[n]) {
        c.r(n) = p.rates(0);
        c.tails[n] = p.rates.tail(future_len(n));
      } else {
        c.tails[n] = p.rates;
      }
      c.cost(n) = p.cost;
    }
    c.total = c.cost.sum();
  }

 private:
  const Scenario& s_;
  int t_, T_, N_, M_;
  Matrix phi_now_;
  std::vector<double> d_;
  std::vector<bool> now_;
  std::vector<Vector> fut_tau_, fut_phi_;
};

BinaryMatrix argmin_association(const Matrix& phis) {
  BinaryMatrix E = BinaryMatrix::Zero(phis.rows(), phis.cols());
  for (int n = 0; n < phis.rows(); ++n) {
    int best = 0;
    phis.row(n).minCoeff(&best);
    E(n, best) = 1;
  }
  return E;
}

}  // namespace

void terminal_cell_allocation(const Vector& bits, const Vector& phis, const CostWeights& w,
                              const RadioParams& radio, Vector& taus, Vector& rates) {
  const int n = static_cast<int>(bits.size());
  const double c = radio.slot_bits();
  const double w1 = w.energy_weight;
  const double w2 = w.residual_per_bit();
  taus = Vector::Zero(n);
  rates = Vector::Zero(n);
  Vector y_max = Vector::Zero(n);
  double y_top = 0.0;
  for (int k = 0; k < n; ++k) {
    if (bits(k) > 0.0 && phis(k) < radio.p_max_w) y_max(k) = std::log2(radio.p_max_w / phis(k));
    y_top = std::max(y_top, y_max(k));
  }
  if (y_top <= 0.0) return;

  // For a time price the best spectral efficiency of a vehicle minimizes its
  // cost per bit; it then sends everything if that beats w2, else nothing.
  Vector y(n);
  auto spectral = [&](double price, int k) {
    double v = y_max(k);
    if (w1 > 0.0) {
      const double z = price / w1;
      double u = 1.0 / std::numbers::ln2;
      if (z > 0.0) u = (1.0 + boost::math::lambert_w0(z / (phis(k) * std::numbers::e))) / std::numbers::ln2;
      v = std::min(u, y_max(k));
    }
    return v;
  };
  auto per_bit = [&](double price, int k) {
    return (w1 * phis(k) * std::exp2(y(k)) + price) / (y(k) * c);
  };
  auto demand = [&](double price, std::vector<bool>& in) {
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      in[static_cast<std::size_t>(k)] = false;
      if (y_max(k) <= 0.0) continue;
      y(k) = spectral(price, k);
      if (per_bit(price, k) < w2) {
        in[static_cast<std::size_t>(k)] = true;
        sum += bits(k) / (y(k) * c);
      }
    }
    return sum;
  };

  std::vector<bool> in(static_cast<std::size_t>(n));
  double price = 0.0;
  if (demand(0.0, in) > 1.0) {
    double lo = 0.0, hi = w2 * y_top * c + 1.0;
    std::vector<bool> in_lo(static_cast<std::size_t>(n));
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (demand(mid, in) > 1.0) lo = mid;
      else hi = mid;
    }
    demand(lo, in_lo);
    price = hi;
    double used = demand(price, in);
    // Vehicles that drop out between lo and hi are indifferent at the price
    // and share whatever time is left.
    for (int k = 0; k < n; ++k) {
      if (in[static_cast<std::size_t>(k)] || !in_lo[static_cast<std::size_t>(k)]) continue;
      const double share = std::min(1.0 - used, bits(k) / (y(k) * c));
      if (share <= 0.0) break;
      taus(k) = share;
      rates(k) = share * y(k) * c;
      used += share;
    }
  }
  for (int k = 0; k < n; ++k) {
    if (!in[static_cast<std::size_t>(k)]) continue;
    rates(k) = bits(k);
    taus(k) = bits(k) / (y(k) * c);
  }
  // Land strictly inside the budget despite rounding.
  const double total = taus.sum();
  if (total > 1.0) {
    for (int k = 0; k < n; ++k) {
      if (taus(k) <= 0.0) continue;
      taus(k) /= total;
      rates(k) = std::min(rates(k), max_rate(taus(k), phis(k), radio.p_max_w, radio));
    }
  }
}

OnlineSolution solve_online_slot(const Scenario& s, const ChannelModel& ch, const SystemState& st,
                                 const ReferenceSchedule& ref, const SolverSettings& settings) {
  const int N = s.n_vehicles();
  const int M = s.n_bs();
  const int t = st.slot;
  const RadioParams& radio = s.radio;
  SlotProblem prob(s, ch, st, ref);
  const Matrix& phi = prob.phi_now();

  // Start from the reference action, clipped to what the actual channel and
  // buffers allow, and the reference tails.
  Candidate cur;
  cur.E = ref.association[static_cast<std::size_t>(ref.column(t))];
  cur.tau = ref.time_shares.col(ref.column(t));
  cur.r = Vector::Zero(N);
  cur.tails.resize(N);
  for (int n = 0; n < N; ++n) {
    if (prob.active_now(n)) {
      const double cap = max_rate(cur.tau(n), phi(n, SlotProblem::assigned(cur.E, n)), radio.p_max_w, radio);
      cur.r(n) = std::clamp(ref.rates(n, ref.column(t)), 0.0, std::min(cap, prob.outstanding(n)));
    }
    const int len = prob.future_len(n);
    cur.tails[n] = Vector::Zero(len);
    for (int k = 0; k < len; ++k) cur.tails[n](k) = ref.rates(n, ref.column(s.horizon() - len + 1 + k));
  }
  prob.score(cur);

  OnlineSolution out;
  out.reference_objective = cur.total;
  out.history.push_back(cur.total);

  auto try_candidate = [&](Candidate&& c) {
    prob.score(c);
    if (c.total < cur.total) cur = std::move(c);
  };

  if (t == s.horizon()) {
    auto terminal = [&](const BinaryMatrix& E) {
      Candidate c = cur;
      c.E = E;
      c.tau.setZero();
      c.r.setZero();
      for (int m = 0; m < M; ++m) {
        Vector bits = Vector::Zero(N), ph = Vector::Ones(N), tau, r;
        for (int n = 0; n < N; ++n)
          if (E(n, m) && prob.active_now(n)) {
            bits(n) = prob.outstanding(n);
            ph(n) = phi(n, m);
          }
        terminal_cell_allocation(bits, ph, s.weights, radio, tau, r);
        for (int n = 0; n < N; ++n)
          if (E(n, m) && bits(n) > 0.0) {
            c.tau(n) = tau(n);
            c.r(n) = r(n);
          }
      }
      try_candidate(std::move(c));
    };
    terminal(cur.E);
    terminal(argmin_association(phi));
    if (M > 1 && cur.r.maxCoeff() > 0.0) {
      try {
        const Matrix warm = cur.E.cast<double>();
        const RelaxedBsTime rel = solve_bs_time_relaxed(cur.r, phi, settings, radio, &warm);
        terminal(round_association(rel.fractions));
      } catch (const InfeasibleError&) {
      }
    }
    out.history.push_back(cur.total);
  } else {
    for (int iter = 0; iter < settings.max_alternations; ++iter) {
      const double before = cur.total;
      // (a) association and shares at the actual positions, rates fixed.
      if (cur.r.maxCoeff() > 0.0) {
        auto with_association = [&](const BinaryMatrix& E) {
          try {
            Candidate c = cur;
            c.E = E;
            c.tau = solve_time_given_association(E, cur.r, phi, settings, radio);
            try_candidate(std::move(c));
          } catch (const InfeasibleError&) {
          }
        };
        with_association(cur.E);
        if (M > 1) {
          try {
            const Matrix warm = cur.E.cast<double>();
            const RelaxedBsTime rel = solve_bs_time_relaxed(cur.r, phi, settings, radio, &warm);
            const BinaryMatrix E = round_association(rel.fractions);
            if (E != cur.E) with_association(E);
          } catch (const InfeasibleError&) {
          }
        }
      }
      // (b) current rate and tail per vehicle, shares fixed.
      prob.throughput_step(cur);
      out.history.push_back(cur.total);
      if (before - cur.total <= settings.improvement_tolerance * std::max(1.0, std::abs(cur.total))) break;
    }
  }

  for (int n = 0; n < N; ++n)
    if (cur.r(n) <= 0.0) {
      cur.r(n) = 0.0;
      cur.tau(n) = 0.0;
    }
  // Shares of idle vehicles are released, so recompute the reported value.
  prob.score(cur);
  out.objective = cur.total;
  out.action.association = cur.E;
  out.action.time_shares = cur.tau;
  out.action.rates = cur.r;
  out.tails.resize(N);
  for (int n = 0; n < N; ++n) {
    RateTail& tail = out.tails[n];
    tail.first_slot = t + 1;
    tail.rates = Vector::Zero(s.horizon() - t);
    const int len = prob.future_len(n);
    if (len > 0) tail.rates.tail(len) = cur.tails[n];
  }
  return out;
}

ReferenceChoice update_reference(const Scenario& s, const ChannelModel& ch, const SystemState& st,
                                 const ReferenceSchedule& pre, const ReferenceSchedule* post) {
  if (s.time.super_slot_of(st.slot) == 1 || post == nullptr) return ReferenceChoice::Pre;
  const double c_pre = evaluate_reference_cost(s, ch, st, pre);
  const double c_post = evaluate_reference_cost(s, ch, st, *post);
  return c_post <= c_pre ? ReferenceChoice::Post : ReferenceChoice::Pre;
}

ReferenceSchedule revise_reference_post(const Scenario& s, const ChannelModel& ch,
                                        const ReferenceSchedule& ref, const SystemState& st,
                                        const Action& last_action) {
  const int t = st.slot;
  const int T = s.horizon();
  const int len = T - t;
  const ExpectedValue ev = expected_value(s, ch, st, last_action, ref);
  ReferenceSchedule post;
  post.start_slot = t + 1;
  const int from = ref.column(t + 1);
  post.association.assign(ref.association.begin() + from, ref.association.end());
  post.time_shares = ref.time_shares.rightCols(len);
  post.rates = Matrix::Zero(s.n_vehicles(), len);
  for (int n = 0; n < s.n_vehicles(); ++n) post.rates.row(n) = ev.tails[n].rates.transpose();
  if (static_cast<int>(ref.basis_positions.size()) == ref.n_slots())
    post.basis_positions.assign(ref.basis_positions.begin() + from, ref.basis_positions.end());
  post.objective = ev.value;
  return post;
}

SystemState advance(const Scenario& s, const SystemState& st, const Action& a, const TrialPaths& paths,
                    const RunOptions& opt, PolicyTrace& trace) {
  const std::vector<int> next = st.slot < s.horizon() ? paths.positions_at(st.slot + 1) : st.positions;
  SlotOutcome o = execute_slot(st, a, s, next, opt.execution);
  trace.states.push_back(st);
  trace.actions.push_back(a);
  trace.metrics.add(o);
  SystemState n = o.next;
  if (opt.keep_outcomes) trace.outcomes.push_back(std::move(o));
  return n;
}

PolicyTrace run_proposed_policy(const Scenario& s, const TrialPaths& paths, const RunOptions& opt) {
  std::unique_ptr<ChannelModel> own;
  if (!opt.channel) own = std::make_unique<ChannelModel>(s);
  const ChannelModel& ch = opt.channel ? *opt.channel : *own;

  PolicyTrace trace;
  trace.metrics.reset(s.n_vehicles());
  SystemState st = initial_state(s, paths.positions_at(1));
  std::optional<ReferenceSchedule> post;
  const int T = s.horizon();
  for (int iota = 1; iota <= s.time.n_super_slots(); ++iota) {
    ReferenceSchedule pre = solve_preallocation(s, st, iota, opt.solver, ch);
    const ReferenceChoice choice = update_reference(s, ch, st, pre, post ? &*post : nullptr);
    trace.reference_choice.push_back(choice);
    const ReferenceSchedule ref = choice == ReferenceChoice::Post ? std::move(*post) : std::move(pre);
    post.reset();

    const int last = iota * s.time.super_slot_len;
    for (int t = s.time.first_slot(iota); t <= last; ++t) {
      const OnlineSolution sol = solve_online_slot(s, ch, st, ref, opt.solver);
      trace.bounds.push_back({t, sol.reference_objective, sol.objective});
      if (t == last && t < T) post = revise_reference_post(s, ch, ref, st, sol.action);
      st = advance(s, st, sol.action, paths, opt, trace);
    }
  }
  return trace;
}

PolicyTrace run_proposed_policy(const Scenario& s, Rng& rng, const RunOptions& opt) {
  return run_proposed_policy(s, sample_paths(s, rng), opt);
}

}  // namespace vehoff
