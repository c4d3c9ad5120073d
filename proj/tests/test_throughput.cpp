#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace vehoff;

namespace {

RadioParams radio_1mhz() {
  RadioParams r;
  r.bandwidth_hz = 1e6;
  r.slot_seconds = 1.0;
  r.p_max_w = 5.0;
  return r;
}

// Minimum of f over {r : 0 <= r_j <= caps_j, sum r = d} by a shrinking grid.
template <class F>
double simplex_grid_min(double d, const Vector& caps, F f) {
  const int k = static_cast<int>(caps.size());
  const int free = k - 1;
  Vector center(free), half(free), r(k);
  for (int j = 0; j < free; ++j) half(j) = center(j) = std::min(caps(j), d) / 2.0;
  double best = std::numeric_limits<double>::infinity();
  Vector best_x = center;
  const int pts = 13;
  std::vector<int> idx(static_cast<std::size_t>(free));
  for (int zoom = 0; zoom < 50; ++zoom) {
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      double rest = d;
      bool ok = true;
      for (int j = 0; j < free && ok; ++j) {
        r(j) = center(j) + half(j) * (2.0 * idx[static_cast<std::size_t>(j)] / (pts - 1) - 1.0);
        ok = r(j) >= 0.0 && r(j) <= caps(j);
        rest -= r(j);
      }
      if (ok && rest >= 0.0 && rest <= caps(free)) {
        r(free) = rest;
        const double v = f(r);
        if (v < best) {
          best = v;
          best_x = r.head(free);
        }
      }
      int j = 0;
      while (j < free && ++idx[static_cast<std::size_t>(j)] == pts) idx[static_cast<std::size_t>(j++)] = 0;
      if (j == free) break;
    }
    center = best_x;
    half *= 0.7;
  }
  return best;
}

}  // namespace

TEST_CASE("plan cost walks the buffer") {
  const RadioParams radio = radio_1mhz();
  const CostWeights w{2.0, 3.0, 1.0};
  Vector taus(3), phis(3), rates(3);
  taus << 1.0, 0.5, 1.0;
  phis << 0.1, 0.2, 0.4;
  rates << 4e5, 1e6, 5e5;
  const double c = radio.slot_bits();
  // 1.2e6 bits: 4e5, then 8e5 (capped at what is left), third slot idle.
  const double e = 0.1 * std::exp2(4e5 / c) + 0.5 * 0.2 * std::exp2(8e5 / (0.5 * c));
  CHECK(plan_cost(1.2e6, taus, phis, rates, w, radio) == doctest::Approx(2.0 + 2.0 * e));
  const double e_all = e + 0.5 * 0.2 * std::exp2(1e6 / (0.5 * c)) - 0.5 * 0.2 * std::exp2(8e5 / (0.5 * c)) +
                       0.4 * std::exp2(5e5 / c);
  CHECK(plan_cost(3e6, taus, phis, rates, w, radio) == doctest::Approx(3.0 + 2.0 * e_all + 3.0 * 1.1e6));
  CHECK(plan_cost(0.0, taus, phis, rates, w, radio) == 0.0);
}

TEST_CASE("case 1 symmetric and single-slot instances") {
  const RadioParams radio = radio_1mhz();
  const CostWeights w{1.0, 1.0, 1.0};
  const Vector taus = Vector::Constant(4, 0.5), phis = Vector::Constant(4, 0.05);
  const Vector r = solve_throughput_case1(2e6, taus, phis, 4, w, radio);
  for (int j = 0; j < 4; ++j) CHECK(r(j) == doctest::Approx(5e5).epsilon(1e-12));

  Vector t1(1), p1(1);
  t1 << 0.7;
  p1 << 0.3;
  CHECK(solve_throughput_case1(1e6, t1, p1, 1, w, radio)(0) == doctest::Approx(1e6));
  CHECK_THROWS_AS(solve_throughput_case1(1e9, t1, p1, 1, w, radio), InfeasibleError);

  // Slots past t_f stay idle.
  const Vector r2 = solve_throughput_case1(1e6, taus, phis, 2, w, radio);
  CHECK(r2(2) == 0.0);
  CHECK(r2(3) == 0.0);
  CHECK(r2.sum() == doctest::Approx(1e6));
}

TEST_CASE("case 1 matches a grid search and equalizes marginals") {
  const RadioParams radio = radio_1mhz();
  const CostWeights w{1.5, 1.0, 1.0};
  Rng rng(21);
  for (int inst = 0; inst < 10; ++inst) {
    const int k = 5;
    Vector taus(k), phis(k);
    for (int j = 0; j < k; ++j) {
      taus(j) = 0.1 + 0.9 * uniform01(rng);
      phis(j) = std::exp(std::log(1e-2) + uniform01(rng) * std::log(1e2));
    }
    const Vector caps = rate_caps(taus, phis, radio);
    const double d = (0.1 + 0.8 * uniform01(rng)) * caps.sum();
    const Vector r = solve_throughput_case1(d, taus, phis, k, w, radio);
    CHECK(r.sum() == doctest::Approx(d).epsilon(1e-12));
    CHECK((r.array() <= caps.array() * (1.0 + 1e-12)).all());
    const double ours = case1_objective(taus, phis, r, k, w, radio);
    const double grid = simplex_grid_min(d, caps, [&](const Vector& x) { return case1_objective(taus, phis, x, k, w, radio); });
    CHECK(ours <= grid * (1.0 + 1e-9));
    CHECK((grid - ours) / ours < 1e-3);

    const Vector mu = marginal_costs(taus, phis, r, w, radio);
    double lo = 1e300, hi = 0.0;
    for (int j = 0; j < k; ++j)
      if (r(j) > 1.0 && r(j) < caps(j) - 1.0) {
        lo = std::min(lo, mu(j));
        hi = std::max(hi, mu(j));
      }
    if (hi > 0.0) CHECK((hi - lo) / hi < 1e-6);
  }
}

TEST_CASE("case 1 without an energy weight fills greedily") {
  const RadioParams radio = radio_1mhz();
  const CostWeights w{0.0, 1.0, 1.0};
  Vector taus(3), phis(3);
  taus << 1.0, 1.0, 1.0;
  phis << 0.1, 0.2, 0.3;
  const Vector r = solve_throughput_case1(1e6, taus, phis, 3, w, radio);
  CHECK(r.sum() == doctest::Approx(1e6));
  CHECK((r.array() >= 0.0).all());
}

TEST_CASE("case 2 branches") {
  const RadioParams radio = radio_1mhz();
  const double c = radio.slot_bits();
  Vector taus(3), phis(3);
  taus << 1.0, 1.0, 0.5;
  phis << 2.0, 0.5, 0.5;
  const Vector caps = rate_caps(taus, phis, radio);

  // At the cap the marginal cost is w1 ln2 P_max / c whatever Phi is, so a
  // penalty above that sends every slot at its cap.
  const CostWeights rich{1.0, 1e-5, 1.0};
  Vector r = solve_throughput_case2(1e12, taus, phis, rich, radio);
  for (int j = 0; j < 3; ++j) CHECK(r(j) == caps(j));

  // w1 Phi ln2 / c >= w2 shuts the first slot; the others sit at the log ratio.
  const CostWeights lean{1.0, 1e-6, 1.0};
  r = solve_throughput_case2(1e12, taus, phis, lean, radio);
  CHECK(r(0) == 0.0);
  const double a = phis(1) * std::numbers::ln2 / c;
  CHECK(r(1) == doctest::Approx(taus(1) * c * std::log2(1e-6 / a)));
  CHECK(r(2) == doctest::Approx(taus(2) * c * std::log2(1e-6 / a)));
  CHECK(r(1) < caps(1));

  // A small task trims back to exactly d.
  r = solve_throughput_case2(1e5, taus, phis, rich, radio);
  CHECK(r.sum() == doctest::Approx(1e5));
}

TEST_CASE("vehicle throughput picks the cheaper case") {
  const RadioParams radio = radio_1mhz();
  Vector taus = Vector::Constant(4, 1.0), phis(4);
  phis << 0.05, 0.1, 0.2, 0.4;
  const Vector caps = rate_caps(taus, phis, radio);

  ThroughputPlan p = solve_vehicle_throughput(0.0, taus, phis, CostWeights{1.0, 1.0, 1.0}, radio);
  CHECK(p.cost == 0.0);
  CHECK(p.rates.isZero());

  // A heavy residual penalty forces completion.
  const double d = 0.5 * caps.sum();
  p = solve_vehicle_throughput(d, taus, phis, CostWeights{1.0, 1.0, 1.0}, radio);
  CHECK(p.rates.sum() == doctest::Approx(d));
  CHECK(p.cost == doctest::Approx(plan_cost(d, taus, phis, p.rates, CostWeights{1.0, 1.0, 1.0}, radio)));

  // A negligible penalty abandons the task.
  const CostWeights cheap{1.0, 1e-12, 1.0};
  p = solve_vehicle_throughput(d, taus, phis, cheap, radio);
  CHECK(p.rates.isZero());
  CHECK(p.cost == doctest::Approx(4.0 + 1e-12 * d));
}

TEST_CASE("vehicle throughput is no worse than a grid over rate vectors") {
  const RadioParams radio = radio_1mhz();
  const CostWeights w{1.0, 2e-6, 1.0};
  Vector taus(3), phis(3);
  taus << 0.6, 1.0, 0.8;
  phis << 0.3, 0.05, 0.8;
  const Vector caps = rate_caps(taus, phis, radio);
  const double d = 0.8 * caps.sum();
  const ThroughputPlan p = solve_vehicle_throughput(d, taus, phis, w, radio);
  double grid = std::numeric_limits<double>::infinity();
  const int pts = 41;
  Vector r(3);
  for (int a = 0; a < pts; ++a)
    for (int b = 0; b < pts; ++b)
      for (int e = 0; e < pts; ++e) {
        r << caps(0) * a / (pts - 1), caps(1) * b / (pts - 1), caps(2) * e / (pts - 1);
        grid = std::min(grid, plan_cost(d, taus, phis, r, w, radio));
      }
  CHECK(p.cost <= grid + 1e-9);
}
