#include "vehoff/preallocate.hpp"

#include <boost/math/special_functions/lambert_w.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace vehoff {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kInf = std::numeric_limits<double>::infinity();


// Spectral efficiency y minimizing tau Phi 2^y + price tau for fixed bits:
// Phi 2^y (y ln2 - 1) = price, capped by the peak power.
double spectral_at(double price, double phi, double y_max) {
  double y = 1.0 / kLn2;
  if (price > 0.0) y = (1.0 + boost::math::lambert_w0(price / (phi * std::numbers::e))) / kLn2;
  return std::min(y, y_max);
}

// dy/dprice of the uncapped branch.
double spectral_slope(double price, double y) {
  const double w = y * kLn2 - 1.0;
  if (price <= 0.0 || w <= 0.0) return 0.0;
  return w / (price * (1.0 + w)) / kLn2;
}

void project_row(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row, const Eigen::Array<bool, 1, Eigen::Dynamic>& allowed) {
  std::vector<double> v;
  for (int m = 0; m < row.size(); ++m)
    if (allowed(m)) v.push_back(row(m));
  std::sort(v.begin(), v.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    cum += v[k];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (v[k] - t > 0.0) theta = t;
  }
  for (int m = 0; m < row.size(); ++m) row(m) = allowed(m) ? std::max(row(m) - theta, 0.0) : 0.0;
}

}  // namespace

CellAllocation allocate_cell_time(const Vector& bits, const Vector& phis, const RadioParams& radio,
                                  double tolerance) {
  const int n = static_cast<int>(bits.size());
  const double c = radio.slot_bits();
  CellAllocation out;
  out.taus = Vector::Zero(n);
  out.spectral = Vector::Zero(n);
  Vector y_max = Vector::Zero(n);
  double t_min = 0.0;
  double price_all_capped = 0.0;
  for (int k = 0; k < n; ++k) {
    if (bits(k) <= 0.0) continue;
    if (phis(k) >= radio.p_max_w)
      throw InfeasibleError("vehicle cannot reach the BS within peak power");
    y_max(k) = std::log2(radio.p_max_w / phis(k));
    t_min += bits(k) / (y_max(k) * c);
    price_all_capped = std::max(price_all_capped, radio.p_max_w * (y_max(k) * kLn2 - 1.0));
  }
  if (t_min > 1.0 + 1e-12) throw InfeasibleError("cell cannot carry its assigned bits");

  auto shares = [&](double price, double* slope) {
    double sum = 0.0, ds = 0.0;
    for (int k = 0; k < n; ++k) {
      if (bits(k) <= 0.0) continue;
      const double y = spectral_at(price, phis(k), y_max(k));
      out.spectral(k) = y;
      sum += bits(k) / (y * c);
      if (slope && y < y_max(k)) ds -= bits(k) / (c * y * y) * spectral_slope(price, y);
    }
    if (slope) *slope = ds;
    return sum - 1.0;
  };

  double price = 0.0;
  if (shares(0.0, nullptr) > 0.0) {
    if (t_min >= 1.0 - 1e-12) {
      price = price_all_capped;
      for (int k = 0; k < n; ++k)
        if (bits(k) > 0.0) out.spectral(k) = y_max(k);
    } else {
      // Safeguarded Newton on the decreasing share total.
      double lo = 0.0, hi = price_all_capped;
      price = 0.5 * hi;
      for (int it = 0; it < 200; ++it) {
        double slope = 0.0;
        const double g = shares(price, &slope);
        if (std::abs(g) <= tolerance) break;
        if (g > 0.0) lo = price;
        else hi = price;
        if (hi - lo <= 1e-15 * hi) break;
        double next = slope < 0.0 ? price - g / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        price = next;
      }
      // Land on the feasible side of the budget with the smallest nudge.
      for (double step = 1e-15 * price; shares(price, nullptr) > 0.0 && price < hi; step *= 4.0)
        price = std::min(price + step, hi);
    }
  }
  out.price = price;
  for (int k = 0; k < n; ++k) {
    if (bits(k) <= 0.0) continue;
    out.taus(k) = bits(k) / (out.spectral(k) * c);
    out.energy += out.taus(k) * phis(k) * std::exp2(out.spectral(k));
  }
  return out;
}

CellAllocation allocate_cell_priced(const Vector& bits, const Vector& value, const Vector& phis,
                                    const RadioParams& radio, Vector& rates) {
  const int n = static_cast<int>(bits.size());
  const double c = radio.slot_bits();
  CellAllocation out;
  out.taus = Vector::Zero(n);
  out.spectral = Vector::Zero(n);
  rates = Vector::Zero(n);
  Vector y_max = Vector::Zero(n);
  double hi = 0.0;
  for (int k = 0; k < n; ++k) {
    if (bits(k) <= 0.0) continue;
    if (phis(k) >= radio.p_max_w) {
      if (value(k) > 0.0) continue;
      throw InfeasibleError("vehicle cannot reach the BS within peak power");
    }
    y_max(k) = std::log2(radio.p_max_w / phis(k));
    hi = std::max(hi, radio.p_max_w * (y_max(k) * kLn2 - 1.0));
    if (value(k) > 0.0) hi = std::max(hi, value(k) * y_max(k) * c);
  }

  // A vehicle with a bit value sends everything when its cost per bit at the
  // time price is below that value; the demand for time falls as the price rises.
  std::vector<char> in(static_cast<std::size_t>(n));
  auto demand = [&](double price, std::vector<char>& sel) {
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      sel[static_cast<std::size_t>(k)] = 0;
      if (y_max(k) <= 0.0) continue;
      const double y = spectral_at(price, phis(k), y_max(k));
      out.spectral(k) = y;
      if (value(k) > 0.0 && (phis(k) * std::exp2(y) + price) / (y * c) >= value(k)) continue;
      sel[static_cast<std::size_t>(k)] = 1;
      sum += bits(k) / (y * c);
    }
    return sum;
  };

  double price = 0.0;
  if (demand(0.0, in) > 1.0) {
    double lo = 0.0;
    if (demand(hi, in) > 1.0 + 1e-12) throw InfeasibleError("cell cannot carry its assigned bits");
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (demand(mid, in) > 1.0) lo = mid;
      else hi = mid;
    }
    std::vector<char> in_lo(static_cast<std::size_t>(n));
    demand(lo, in_lo);
    price = hi;
    double used = demand(price, in);
    // Vehicles leaving between lo and hi are indifferent; give them what is left.
    for (int k = 0; k < n; ++k) {
      if (in[static_cast<std::size_t>(k)] || !in_lo[static_cast<std::size_t>(k)]) continue;
      const double share = std::min(1.0 - used, bits(k) / (out.spectral(k) * c));
      if (share <= 0.0) break;
      out.taus(k) = share;
      rates(k) = share * out.spectral(k) * c;
      used += share;
    }
  }
  out.price = price;
  for (int k = 0; k < n; ++k) {
    if (in[static_cast<std::size_t>(k)]) {
      rates(k) = bits(k);
      out.taus(k) = bits(k) / (out.spectral(k) * c);
    }
  }
  const double total = out.taus.sum();
  if (total > 1.0) {
    out.taus /= total;
    for (int k = 0; k < n; ++k) rates(k) = std::min(rates(k), out.taus(k) * out.spectral(k) * c);
  }
  for (int k = 0; k < n; ++k)
    if (rates(k) > 0.0) out.energy += out.taus(k) * phis(k) * std::exp2(out.spectral(k));
  return out;
}

BinaryMatrix round_association(const Matrix& fractional) {
  BinaryMatrix E = BinaryMatrix::Zero(fractional.rows(), fractional.cols());
  for (int n = 0; n < fractional.rows(); ++n) {
    int best = 0;
    for (int m = 1; m < fractional.cols(); ++m)
      if (fractional(n, m) > fractional(n, best)) best = m;
    E(n, best) = 1;
  }
  return E;
}

Vector solve_time_given_association(const BinaryMatrix& E, const Vector& rates, const Matrix& phis,
                                    const SolverSettings& settings, const RadioParams& radio) {
  const int N = static_cast<int>(E.rows());
  const int M = static_cast<int>(E.cols());
  Vector taus = Vector::Zero(N);
  for (int m = 0; m < M; ++m) {
    Vector bits = Vector::Zero(N);
    Vector ph = Vector::Ones(N);
    bool any = false;
    for (int n = 0; n < N; ++n) {
      if (E(n, m) == 0 || rates(n) <= 0.0) continue;
      bits(n) = rates(n);
      ph(n) = phis(n, m);
      any = true;
    }
    if (!any) continue;
    try {
      const CellAllocation a = allocate_cell_time(bits, ph, radio, settings.bisection_tolerance);
      for (int n = 0; n < N; ++n)
        if (bits(n) > 0.0) taus(n) = a.taus(n);
    } catch (const InfeasibleError& e) {
      throw InfeasibleError(e.what(), "BS " + std::to_string(m));
    }
  }
  return taus;
}

double slot_energy_total(const BinaryMatrix& E, const Vector& taus, const Vector& rates,
                         const Matrix& phis, const RadioParams& radio) {
  double e = 0.0;
  for (int n = 0; n < E.rows(); ++n) {
    if (rates(n) <= 0.0) continue;
    int m = 0;
    while (m + 1 < E.cols() && E(n, m) == 0) ++m;
    e += slot_energy(rates(n), taus(n), phis(n, m), radio);
  }
  return e;
}

RelaxedBsTime solve_bs_time_relaxed(const Vector& rates, const Matrix& phis,
                                    const SolverSettings& settings, const RadioParams& radio,
                                    const Matrix* warm) {
  const int N = static_cast<int>(phis.rows());
  const int M = static_cast<int>(phis.cols());
  const double c = radio.slot_bits();
  RelaxedBsTime out;
  out.fractions = Matrix::Constant(N, M, 1.0 / M);
  out.pair_time = Matrix::Zero(N, M);

  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> allowed(N, M);
  Matrix y_max = Matrix::Zero(N, M);
  bool any = false;
  for (int n = 0; n < N; ++n) {
    bool reach = false;
    for (int m = 0; m < M; ++m) {
      allowed(n, m) = rates(n) > 0.0 && phis(n, m) < radio.p_max_w;
      if (allowed(n, m)) {
        y_max(n, m) = std::log2(radio.p_max_w / phis(n, m));
        reach = true;
      }
    }
    if (rates(n) > 0.0) {
      any = true;
      if (!reach) throw InfeasibleError("vehicle cannot reach any BS within peak power",
                                        "vehicle " + std::to_string(n));
    }
  }
  if (!any) return out;

  Matrix e = Matrix::Zero(N, M);
  for (int n = 0; n < N; ++n) {
    if (rates(n) <= 0.0) continue;
    if (warm) {
      e.row(n) = warm->row(n);
      project_row(e.row(n), allowed.row(n));
    } else {
      int best = -1;
      for (int m = 0; m < M; ++m)
        if (allowed(n, m) && (best < 0 || phis(n, m) < phis(n, best))) best = m;
      e(n, best) = 1.0;
    }
  }

  auto loads = [&](const Matrix& x) {
    Vector l = Vector::Zero(M);
    for (int n = 0; n < N; ++n)
      for (int m = 0; m < M; ++m)
        if (allowed(n, m)) l(m) += x(n, m) * rates(n) / (y_max(n, m) * c);
    return l;
  };

  // Feasibility phase: push the peak-power time requirements under 1.
  const double target = 1.0 - 1e-9;
  Vector l = loads(e);
  for (int it = 0; it < 2000 && l.maxCoeff() > target; ++it) {
    Matrix g = Matrix::Zero(N, M);
    for (int n = 0; n < N; ++n)
      for (int m = 0; m < M; ++m)
        if (allowed(n, m)) g(n, m) = std::max(l(m) - target, 0.0) * rates(n) / (y_max(n, m) * c);
    const double scale = g.cwiseAbs().maxCoeff();
    if (scale <= 0.0) break;
    e -= (0.25 / scale) * std::max(l.maxCoeff() - target, 1e-6) * g;
    for (int n = 0; n < N; ++n)
      if (rates(n) > 0.0) project_row(e.row(n), allowed.row(n));
    l = loads(e);
  }
  if (l.maxCoeff() > 1.0 + 1e-12) {
    int worst = 0;
    l.maxCoeff(&worst);
    throw InfeasibleError("rates exceed the aggregate capacity at peak power", "BS " + std::to_string(worst));
  }

  Vector prices = Vector::Zero(M);
  Matrix taus = Matrix::Zero(N, M);
  auto objective = [&](const Matrix& x, Vector& price_out, Matrix& tau_out) {
    double f = 0.0;
    for (int m = 0; m < M; ++m) {
      Vector bits = Vector::Zero(N);
      Vector ph = Vector::Ones(N);
      for (int n = 0; n < N; ++n)
        if (allowed(n, m) && x(n, m) > 0.0) {
          bits(n) = x(n, m) * rates(n);
          ph(n) = phis(n, m);
        }
      try {
        const CellAllocation a = allocate_cell_time(bits, ph, radio, settings.bisection_tolerance);
        f += a.energy;
        price_out(m) = a.price;
        tau_out.col(m) = a.taus;
      } catch (const InfeasibleError&) {
        return kInf;
      }
    }
    return f;
  };
  auto gradient = [&](const Vector& price) {
    Matrix g = Matrix::Zero(N, M);
    for (int n = 0; n < N; ++n)
      for (int m = 0; m < M; ++m)
        if (allowed(n, m)) {
          const double y = spectral_at(price(m), phis(n, m), y_max(n, m));
          g(n, m) = rates(n) * phis(n, m) * std::exp2(y) * kLn2 / c;
        }
    return g;
  };

  double f = objective(e, prices, taus);
  if (!std::isfinite(f)) throw InfeasibleError("rates exceed the aggregate capacity at peak power");
  double step = 1.0;
  int it = 0;
  for (; it < settings.max_gradient_iters; ++it) {
    const Matrix g = gradient(prices);
    const double scale = g.cwiseAbs().maxCoeff();
    if (scale <= 0.0) break;
    const Matrix gn = g / scale;

    Matrix probe = e - gn;
    for (int n = 0; n < N; ++n)
      if (rates(n) > 0.0) project_row(probe.row(n), allowed.row(n));
    if ((probe - e).cwiseAbs().maxCoeff() < settings.gradient_tolerance) break;

    bool moved = false;
    while (step > 1e-10) {
      Matrix trial = e - step * gn;
      for (int n = 0; n < N; ++n)
        if (rates(n) > 0.0) project_row(trial.row(n), allowed.row(n));
      const Matrix dir = trial - e;
      const double decrease = (g.array() * dir.array()).sum();
      Vector p2 = prices;
      Matrix t2 = taus;
      const double f2 = objective(trial, p2, t2);
      if (std::isfinite(f2) && f2 <= f + 1e-4 * decrease) {
        moved = f - f2 > 1e-15 * std::max(1.0, std::abs(f));
        e = trial;
        f = f2;
        prices = p2;
        taus = t2;
        step = std::min(2.0 * step, 4.0);
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }

  out.fractions = e;
  for (int n = 0; n < N; ++n)
    if (rates(n) <= 0.0) out.fractions.row(n).setConstant(1.0 / M);
  out.pair_time = taus;
  out.energy = f;
  out.iterations = it;
  return out;
}

}  // namespace vehoff
