#include "vehoff/preallocate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vehoff {

namespace {

constexpr double kLn2 = std::numbers::ln2;

// Remaining bits below this are treated as delivered.
double slack(double d) { return 1e-9 * std::max(d, 1.0); }

bool usable(double tau, double cap) { return tau > 0.0 && cap > 0.0; }

// Fill the earliest slots first; optimal whenever energy is free.
Vector greedy_fill(double d, const Vector& caps, int len) {
  Vector r = Vector::Zero(caps.size());
  double rem = d;
  for (int j = 0; j < len && rem > 0.0; ++j) {
    r(j) = std::min(caps(j), rem);
    rem -= r(j);
  }
  return r;
}

// Adds d - sum(r) to one slot that can absorb it, preferring the cheapest
// slot strictly inside its bounds.
void settle_residual(double d, Vector& r, const Vector& caps, const Vector& phis, int len) {
  for (int pass = 0; pass < 2; ++pass) {
    const double diff = d - r.head(len).sum();
    if (diff == 0.0) return;
    int pick = -1;
    for (int j = 0; j < len; ++j) {
      const bool room = diff > 0.0 ? r(j) + diff <= caps(j) : r(j) + diff >= 0.0;
      if (!room) continue;
      const bool interior = r(j) > 0.0 && r(j) < caps(j);
      if (pick < 0) {
        pick = j;
        continue;
      }
      const bool pick_interior = r(pick) > 0.0 && r(pick) < caps(pick);
      if (interior != pick_interior) {
        if (interior) pick = j;
      } else if (phis(j) < phis(pick)) {
        pick = j;
      }
    }
    if (pick < 0) return;
    r(pick) += diff;
  }
}

}  // namespace

Vector rate_caps(const Vector& taus, const Vector& phis, const RadioParams& radio) {
  Vector c(taus.size());
  for (int j = 0; j < taus.size(); ++j) c(j) = max_rate(taus(j), phis(j), radio.p_max_w, radio);
  return c;
}

double plan_cost(double d, const Vector& taus, const Vector& phis, const Vector& rates,
                 const CostWeights& w, const RadioParams& radio) {
  if (d <= 0.0) return 0.0;
  const double eps = slack(d);
  double rem = d;
  double count = 0.0;
  double energy = 0.0;
  for (int j = 0; j < rates.size() && rem > eps; ++j) {
    count += 1.0;
    const double send = std::min(rates(j), rem);
    if (send > 0.0) energy += slot_energy(send, taus(j), phis(j), radio);
    rem -= send;
  }
  if (rem <= eps) rem = 0.0;
  return count + w.energy_weight * energy + w.residual_per_bit() * rem;
}

double case1_objective(const Vector& taus, const Vector& phis, const Vector& rates, int t_f,
                       const CostWeights& w, const RadioParams& radio) {
  const double c = radio.slot_bits();
  double e = 0.0;
  for (int j = 0; j < t_f; ++j)
    if (taus(j) > 0.0) e += taus(j) * phis(j) * std::exp2(rates(j) / (taus(j) * c));
  return w.energy_weight * e;
}

Vector marginal_costs(const Vector& taus, const Vector& phis, const Vector& rates,
                      const CostWeights& w, const RadioParams& radio) {
  const double c = radio.slot_bits();
  Vector m = Vector::Zero(rates.size());
  for (int j = 0; j < rates.size(); ++j)
    if (taus(j) > 0.0) m(j) = w.energy_weight / c * phis(j) * kLn2 * std::exp2(rates(j) / (taus(j) * c));
  return m;
}

Vector solve_throughput_case1(double d, const Vector& taus, const Vector& phis, int t_f,
                              const CostWeights& w, const RadioParams& radio) {
  const int K = static_cast<int>(taus.size());
  const int len = std::clamp(t_f, 0, K);
  Vector r = Vector::Zero(K);
  if (d <= 0.0) return r;
  const Vector caps = rate_caps(taus, phis, radio);
  if (caps.head(len).sum() < d - slack(d))
    throw InfeasibleError("task does not fit before the completion slot",
                          "t_f=" + std::to_string(t_f));
  if (w.energy_weight <= 0.0) {
    r = greedy_fill(d, caps, len);
    settle_residual(d, r, caps, phis, len);
    return r;
  }

  // Water level L = log2 of the common marginal cost (up to constants). Slot
  // j sends tau_j c (L - lo_j) clamped to [0, cap_j], lo_j = log2 Phi_j.
  const double c = radio.slot_bits();
  std::vector<int> idx;
  std::vector<double> lo, hi, wt;
  std::vector<std::pair<double, double>> events;  // (level, slope change)
  for (int j = 0; j < len; ++j) {
    if (!usable(taus(j), caps(j))) continue;
    idx.push_back(j);
    lo.push_back(std::log2(phis(j)));
    wt.push_back(taus(j) * c);
    hi.push_back(lo.back() + caps(j) / wt.back());
    events.emplace_back(lo.back(), wt.back());
    events.emplace_back(hi.back(), -wt.back());
  }
  std::sort(events.begin(), events.end());
  // The total is piecewise linear and nondecreasing in L. Take the smallest
  // level reaching d: among equal totals it has the largest multiplier.
  double L = events.back().first;
  double level = events.front().first;
  double sum = 0.0;
  double slope = 0.0;
  for (const auto& [p, delta] : events) {
    const double next = sum + slope * (p - level);
    if (next >= d && slope > 0.0) {
      L = std::min(level + (d - sum) / slope, p);
      break;
    }
    sum = next;
    level = p;
    slope += delta;
  }
  for (std::size_t k = 0; k < idx.size(); ++k)
    r(idx[k]) = std::min(wt[k] * std::clamp(L - lo[k], 0.0, hi[k] - lo[k]), caps(idx[k]));
  settle_residual(d, r, caps, phis, len);
  return r;
}

Vector solve_throughput_case2(double d, const Vector& taus, const Vector& phis, const CostWeights& w,
                              const RadioParams& radio) {
  const int K = static_cast<int>(taus.size());
  Vector r = Vector::Zero(K);
  if (d <= 0.0) return r;
  const Vector caps = rate_caps(taus, phis, radio);
  const double c = radio.slot_bits();
  const double w1p = w.energy_weight / c;
  const double w2 = w.residual_per_bit();
  for (int j = 0; j < K; ++j) {
    if (!usable(taus(j), caps(j))) continue;
    const double a = w1p * phis(j) * kLn2;
    if (a >= w2) continue;
    if (a * std::exp2(caps(j) / (taus(j) * c)) <= w2) {
      r(j) = caps(j);
    } else {
      r(j) = std::min(taus(j) * c * std::log2(w2 / a), caps(j));
    }
  }
  if (r.sum() > d) {
    // The budget binds: the best way to send exactly d is the equal-marginal
    // allocation, which lowers the level and sheds the costliest bits first.
    r = solve_throughput_case1(d, taus, phis, K, w, radio);
  }
  return r;
}

ThroughputPlan solve_vehicle_throughput(double d, const Vector& taus, const Vector& phis,
                                        const CostWeights& w, const RadioParams& radio) {
  const int K = static_cast<int>(taus.size());
  ThroughputPlan best;
  best.rates = Vector::Zero(K);
  if (d <= 0.0) return best;

  best.rates = solve_throughput_case2(d, taus, phis, w, radio);
  best.cost = plan_cost(d, taus, phis, best.rates, w, radio);

  const Vector caps = rate_caps(taus, phis, radio);
  double cum = 0.0;
  const double eps = slack(d);
  for (int j = 0; j < K; ++j) {
    if (!usable(taus(j), caps(j))) continue;
    cum += caps(j);
    // A plan finishing in slot j pays at least j+1 pending slots.
    if (static_cast<double>(j + 1) >= best.cost) break;
    if (cum < d - eps) continue;
    Vector r = solve_throughput_case1(d, taus, phis, j + 1, w, radio);
    const double cost = plan_cost(d, taus, phis, r, w, radio);
    if (cost < best.cost) {
      best.cost = cost;
      best.rates = std::move(r);
    }
  }
  return best;
}

}  // namespace vehoff
