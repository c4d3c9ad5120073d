#include "vehoff/baselines.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace vehoff {

int DpResult::state_index(const std::vector<int>& levels, const std::vector<int>& positions) const {
  int idx = 0;
  for (std::size_t n = 0; n < levels.size(); ++n) idx += stride[n] * (levels[n] * waypoints[n] + positions[n]);
  return idx;
}

double DpResult::value_at(int t, const std::vector<int>& levels, const std::vector<int>& positions) const {
  return values[static_cast<std::size_t>(t - 1)](state_index(levels, positions));
}

namespace {

struct Choice {
  DpAction a;
  double energy = 0.0;  // weighted
};

struct Stage {
  Stage(const Scenario& sc, const DpResult& d) : s(sc), dp(d) {}

  const Scenario& s;
  const DpResult& dp;
  int t = 0;
  int N = 0;
  std::vector<int> q, w;
  std::vector<std::vector<Choice>> options;
  std::vector<std::vector<std::vector<std::pair<int, double>>>> support;  // [n][w] -> (w', p)
  std::vector<int> top;

  // Expected value of the next stage given next levels, over the product of
  // the vehicles' transition rows.
  double expect(const std::vector<int>& next_q, const Vector& V) const {
    double sum = 0.0;
    std::vector<int> pos(static_cast<std::size_t>(N));
    auto rec = [&](auto&& self, int n, int idx, double p) -> void {
      if (n == N) {
        sum += p * V(idx);
        return;
      }
      for (const auto& [wn, pn] : support[n][static_cast<std::size_t>(w[n])])
        self(self, n + 1, idx + dp.stride[n] * (next_q[n] * dp.waypoints[n] + wn), p * pn);
    };
    rec(rec, 0, 0, 1.0);
    return sum;
  }
};

}  // namespace

DpResult exact_dp(const Scenario& s, const Quantizer& quant, const ActionGrid& grid, long long budget) {
  const int N = s.n_vehicles();
  const int M = s.n_bs();
  const int T = s.horizon();
  const int L = quant.levels;
  const double delta = quant.step();
  const double w1 = s.weights.energy_weight;
  const double w2 = s.weights.residual_per_bit();
  const RadioParams& radio = s.radio;

  DpResult dp;
  dp.quantizer = quant;
  dp.grid = grid;
  long long total = 1;
  for (int n = 0; n < N; ++n) {
    dp.waypoints.push_back(s.routes[n].size());
    dp.stride.push_back(static_cast<int>(total));
    total *= static_cast<long long>(L) * s.routes[n].size();
    if (total > budget) throw BudgetExceeded(total * T);
  }
  dp.state_count = total * T;
  if (dp.state_count > budget) throw BudgetExceeded(dp.state_count);

  Stage st(s, dp);
  st.N = N;
  st.support.resize(N);
  for (int n = 0; n < N; ++n) {
    const Matrix& P = s.transitions[n].probs;
    st.support[n].resize(static_cast<std::size_t>(P.rows()));
    for (int a = 0; a < P.rows(); ++a)
      for (int b = 0; b < P.cols(); ++b)
        if (P(a, b) > 0.0) st.support[n][static_cast<std::size_t>(a)].emplace_back(b, P(a, b));
    st.top.push_back(quant.level_of(s.tasks[n].size_bits));
  }

  // Per vehicle, waypoint: every (bs, share, levels) with its weighted energy,
  // for the largest buffer; smaller buffers use a prefix filter.
  std::vector<std::vector<std::vector<Choice>>> menu(N);
  for (int n = 0; n < N; ++n) {
    menu[n].resize(static_cast<std::size_t>(s.routes[n].size()));
    for (int wp = 0; wp < s.routes[n].size(); ++wp) {
      auto& list = menu[n][static_cast<std::size_t>(wp)];
      list.push_back({DpAction{0, 0, 0}, 0.0});
      for (int m = 0; m < M; ++m) {
        const double phi = phi_factor(s.routes[n].waypoints[wp], s.bs_positions[m], radio, m);
        for (int ti = 1; ti < static_cast<int>(grid.time_shares.size()); ++ti) {
          const double tau = grid.time_shares[ti];
          if (tau <= 0.0) continue;
          const double cap = max_rate(tau, phi, radio.p_max_w, radio);
          for (int j = 1; j < L && j * delta <= cap; ++j)
            list.push_back({DpAction{m, ti, j}, w1 * slot_energy(j * delta, tau, phi, radio)});
        }
      }
    }
  }

  dp.values.assign(static_cast<std::size_t>(T + 1), Vector::Zero(total));
  dp.policy.assign(static_cast<std::size_t>(T), std::vector<DpAction>(static_cast<std::size_t>(total * N)));
  st.q.resize(N);
  st.w.resize(N);
  st.options.resize(N);

  for (int t = T; t >= 1; --t) {
    st.t = t;
    const Vector& next_V = dp.values[static_cast<std::size_t>(t)];
    Vector& V = dp.values[static_cast<std::size_t>(t - 1)];
    auto& pol = dp.policy[static_cast<std::size_t>(t - 1)];
    for (long long idx = 0; idx < total; ++idx) {
      long long rem = idx;
      for (int n = 0; n < N; ++n) {
        const long long sub = rem % (static_cast<long long>(L) * dp.waypoints[n]);
        rem /= static_cast<long long>(L) * dp.waypoints[n];
        st.q[n] = static_cast<int>(sub / dp.waypoints[n]);
        st.w[n] = static_cast<int>(sub % dp.waypoints[n]);
        st.options[n].clear();
        for (const Choice& c : menu[n][static_cast<std::size_t>(st.w[n])])
          if (c.a.levels <= st.q[n]) st.options[n].push_back(c);
      }

      double base = 0.0;
      for (int n = 0; n < N; ++n) base += st.q[n] > 0 ? 1.0 : 0.0;
      double best = std::numeric_limits<double>::infinity();
      std::vector<DpAction> best_a(static_cast<std::size_t>(N)), cur(static_cast<std::size_t>(N));
      std::vector<int> next_q(static_cast<std::size_t>(N));
      Vector used = Vector::Zero(M);

      auto rec = [&](auto&& self, int n, double acc) -> void {
        if (n == N) {
          double cost = base + acc;
          for (int k = 0; k < N; ++k) {
            int nq = st.q[k] - cur[k].levels;
            if (t + 1 == s.tasks[k].arrival_slot) nq = st.top[k];
            next_q[k] = nq;
            if (t == T) cost += w2 * nq * delta;
          }
          if (t < T) cost += st.expect(next_q, next_V);
          if (cost < best) {
            best = cost;
            best_a = cur;
          }
          return;
        }
        for (const Choice& c : st.options[n]) {
          const double tau = dp.grid.time_shares[c.a.tau_index];
          if (used(c.a.bs) + tau > 1.0 + 1e-12) continue;
          used(c.a.bs) += tau;
          cur[n] = c.a;
          self(self, n + 1, acc + c.energy);
          used(c.a.bs) -= tau;
        }
      };
      rec(rec, 0, 0.0);
      V(idx) = best;
      for (int n = 0; n < N; ++n) pol[static_cast<std::size_t>(idx * N + n)] = best_a[n];
    }
  }

  std::vector<int> q0(N), w0(N);
  for (int n = 0; n < N; ++n) {
    q0[n] = s.tasks[n].arrival_slot == 1 ? st.top[n] : 0;
    w0[n] = s.routes[n].start_index;
  }
  dp.value = dp.value_at(1, q0, w0);
  return dp;
}

PolicyTrace run_dp_policy(const Scenario& s, const DpResult& dp, const TrialPaths& paths,
                          const RunOptions& opt) {
  const int N = s.n_vehicles();
  PolicyTrace trace;
  trace.metrics.reset(N);
  SystemState st = initial_state(s, paths.positions_at(1));
  std::vector<int> q(N);
  for (int t = 1; t <= s.horizon(); ++t) {
    for (int n = 0; n < N; ++n) q[n] = dp.quantizer.level_of(st.buffers(n));
    const int idx = dp.state_index(q, st.positions);
    Action a = Action::zero(N, s.n_bs());
    for (int n = 0; n < N; ++n) {
      const DpAction& d = dp.policy[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(idx * N + n)];
      a.association.row(n).setZero();
      a.association(n, d.bs) = 1;
      a.time_shares(n) = dp.grid.time_shares[d.tau_index];
      a.rates(n) = d.levels * dp.quantizer.step();
    }
    st = advance(s, st, a, paths, opt, trace);
  }
  return trace;
}

}  // namespace vehoff
