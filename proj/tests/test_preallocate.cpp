#include "test_util.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <limits>

using namespace vehoff;
using vehoff::testing::cap_of;
using vehoff::testing::follow_cost;
using vehoff::testing::line_scenario;
using vehoff::testing::vehicle_oracle;

namespace {

Scenario two_vehicles(int bs, int horizon, double d0, double d1) {
  std::vector<Point> sites;
  for (int m = 0; m < bs; ++m) sites.emplace_back(40.0 * m, 20.0);
  Scenario s = line_scenario(3, TransitionMatrix::identity(3), horizon, horizon, d0, sites);
  s.routes.push_back(s.routes[0]);
  s.transitions.push_back(s.transitions[0]);
  s.tasks.push_back(TaskSpec{1, d1});
  s.weights = CostWeights{50.0, 1.0, 1e6};
  return s;
}

// Recomputes the schedule's cost on the basis and checks its constraints.
double schedule_cost(const Scenario& s, const ReferenceSchedule& ref, const PhiTable& phis) {
  double total = 0.0;
  for (int n = 0; n < s.n_vehicles(); ++n) {
    std::vector<double> taus, ph, rates;
    for (int j = 0; j < ref.n_slots(); ++j) {
      const int m = ref.bs(n, ref.start_slot + j);
      taus.push_back(ref.time_shares(n, j));
      ph.push_back(phis[static_cast<std::size_t>(j)](n, m));
      rates.push_back(ref.rates(n, j));
      CHECK(ref.rates(n, j) <= cap_of(ref.time_shares(n, j), ph.back(), s) * (1.0 + 1e-9) + 1e-6);
    }
    total += follow_cost(s.tasks[n].size_bits, taus, ph, rates, s);
  }
  for (int j = 0; j < ref.n_slots(); ++j) {
    const BinaryMatrix& E = ref.association[static_cast<std::size_t>(j)];
    CHECK((E.rowwise().sum().array() == 1).all());
    for (int m = 0; m < s.n_bs(); ++m) {
      double used = 0.0;
      for (int n = 0; n < s.n_vehicles(); ++n) used += E(n, m) * ref.time_shares(n, j);
      CHECK(used <= 1.0 + 1e-9);
    }
  }
  return total;
}

}  // namespace

TEST_CASE("empty buffers give an empty plan") {
  Scenario s = two_vehicles(2, 4, 0.0, 0.0);
  const ChannelModel ch(s);
  const ReferenceSchedule ref = solve_preallocation(s, initial_state(s), 1, {}, ch);
  CHECK(ref.objective == 0.0);
  CHECK(ref.rates.isZero());
  CHECK(ref.time_shares.isZero());
  CHECK(ref.n_slots() == 4);
}

TEST_CASE("a task too large for one slot splits evenly over equal channels") {
  Scenario s = line_scenario(3, TransitionMatrix::identity(3), 2, 2, 1.6e7);
  PhiTable phis(2, Matrix::Constant(1, 1, 2e-3));
  const ReferenceSchedule ref = solve_preallocation_on_basis(s, initial_state(s), phis, {});
  REQUIRE(cap_of(1.0, 2e-3, s) < 1.6e7);
  CHECK(ref.rates(0, 0) == doctest::Approx(8e6).epsilon(1e-6));
  CHECK(ref.rates(0, 1) == doctest::Approx(8e6).epsilon(1e-6));
  CHECK(ref.time_shares(0, 0) == doctest::Approx(1.0));
  CHECK(ref.objective == doctest::Approx(2.0 + 2.0 * 2e-3 * 256.0).epsilon(1e-6));
}

TEST_CASE("two vehicles sharing one cell over three slots match an exhaustive search") {
  Scenario s = two_vehicles(1, 3, 1.2e7, 8e6);
  PhiTable phis;
  const std::array<std::array<double, 2>, 3> table{{{2e-3, 1e-2}, {4e-3, 3e-3}, {8e-3, 2e-3}}};
  for (const auto& row : table) {
    Matrix p(2, 1);
    p << row[0], row[1];
    phis.push_back(p);
  }
  const ReferenceSchedule ref = solve_preallocation_on_basis(s, initial_state(s), phis, {});

  // Each vehicle's best cost for every share vector on a 0.1 grid, then the
  // best pair of share vectors that fits the cell in every slot.
  const int G = 11;
  std::vector<std::vector<double>> best(2, std::vector<double>(G * G * G));
  for (int n = 0; n < 2; ++n)
    for (int code = 0; code < G * G * G; ++code) {
      std::vector<double> taus{code % G / 10.0, code / G % G / 10.0, code / (G * G) / 10.0}, ph;
      for (int j = 0; j < 3; ++j) ph.push_back(table[static_cast<std::size_t>(j)][static_cast<std::size_t>(n)]);
      best[static_cast<std::size_t>(n)][static_cast<std::size_t>(code)] =
          vehicle_oracle(s.tasks[n].size_bits, taus, ph, s);
    }
  double oracle = std::numeric_limits<double>::infinity();
  for (int a = 0; a < G * G * G; ++a)
    for (int b = 0; b < G * G * G; ++b) {
      if (a % G + b % G > 10 || a / G % G + b / G % G > 10 || a / (G * G) + b / (G * G) > 10) continue;
      oracle = std::min(oracle, best[0][static_cast<std::size_t>(a)] + best[1][static_cast<std::size_t>(b)]);
    }

  MESSAGE("alternation " << ref.objective << ", grid " << oracle);
  CHECK(ref.objective <= oracle * 1.01);
  CHECK(schedule_cost(s, ref, phis) == doctest::Approx(ref.objective).epsilon(1e-9));
}

TEST_CASE("association over two cells matches an exhaustive search") {
  Scenario s = two_vehicles(2, 2, 1.4e7, 1.1e7);
  PhiTable phis;
  Matrix p0(2, 2), p1(2, 2);
  p0 << 2e-3, 6e-3,
        3e-3, 2.5e-2;
  p1 << 5e-3, 3e-3,
        4e-3, 2e-3;
  phis = {p0, p1};
  const ReferenceSchedule ref = solve_preallocation_on_basis(s, initial_state(s), phis, {});

  // Per vehicle, BS pair and share pair on a 0.05 grid.
  const int G = 21;
  auto key = [&](int m0, int m1, int t0, int t1) { return ((m0 * 2 + m1) * G + t0) * G + t1; };
  std::vector<std::vector<double>> best(2, std::vector<double>(4 * G * G));
  for (int n = 0; n < 2; ++n)
    for (int m0 = 0; m0 < 2; ++m0)
      for (int m1 = 0; m1 < 2; ++m1)
        for (int t0 = 0; t0 < G; ++t0)
          for (int t1 = 0; t1 < G; ++t1)
            best[static_cast<std::size_t>(n)][static_cast<std::size_t>(key(m0, m1, t0, t1))] = vehicle_oracle(
                s.tasks[n].size_bits, {t0 / 20.0, t1 / 20.0}, {p0(n, m0), p1(n, m1)}, s);
  double oracle = std::numeric_limits<double>::infinity();
  for (int code = 0; code < 16; ++code) {
    const int a0 = code & 1, a1 = code >> 1 & 1, b0 = code >> 2 & 1, b1 = code >> 3 & 1;
    for (int x0 = 0; x0 < G; ++x0)
      for (int x1 = 0; x1 < G; ++x1)
        for (int y0 = 0; y0 < G; ++y0)
          for (int y1 = 0; y1 < G; ++y1) {
            if (a0 == b0 && x0 + y0 > 20) continue;
            if (a1 == b1 && x1 + y1 > 20) continue;
            oracle = std::min(oracle, best[0][static_cast<std::size_t>(key(a0, a1, x0, x1))] +
                                          best[1][static_cast<std::size_t>(key(b0, b1, y0, y1))]);
          }
  }

  MESSAGE("alternation " << ref.objective << ", grid " << oracle);
  CHECK(ref.objective <= oracle * 1.01);
  CHECK(schedule_cost(s, ref, phis) == doctest::Approx(ref.objective).epsilon(1e-9));
}

TEST_CASE("alternation never increases the objective") {
  SyntheticOptions o;
  o.horizon = 10;
  o.super_slot = 5;
  o.task_bits = 1.2e9;
  const Scenario s = make_synthetic_scenario(o);
  const ChannelModel ch(s);
  const ReferenceSchedule ref = solve_preallocation(s, initial_state(s), 1, {}, ch);
  REQUIRE(ref.objective_history.size() >= 2);
  for (std::size_t i = 1; i < ref.objective_history.size(); ++i)
    CHECK(ref.objective_history[i] <= ref.objective_history[i - 1] * (1.0 + 1e-12));
  CHECK(ref.objective <= ref.objective_history.front());
  CHECK(static_cast<int>(ref.basis_positions.size()) == ref.n_slots());
}

TEST_CASE("a late task is planned only from its arrival slot") {
  Scenario s = two_vehicles(1, 4, 6e6, 6e6);
  s.tasks[1].arrival_slot = 3;
  PhiTable phis(4, Matrix::Constant(2, 1, 3e-3));
  const ReferenceSchedule ref = solve_preallocation_on_basis(s, initial_state(s), phis, {});
  CHECK(ref.rates(1, 0) == 0.0);
  CHECK(ref.rates(1, 1) == 0.0);
  CHECK(ref.rates.row(1).sum() == doctest::Approx(6e6));
  CHECK(ref.rates.row(0).sum() == doctest::Approx(6e6));
}
