#include "vehoff/mobility.hpp"

#include <cmath>

namespace vehoff {

TransitionMatrix TransitionMatrix::advance(int n) {
  Matrix p = Matrix::Zero(n, n);
  for (int j = 0; j + 1 < n; ++j) p(j, j + 1) = 1.0;
  p(n - 1, n - 1) = 1.0;
  return TransitionMatrix(std::move(p));
}

int step_position(const TransitionMatrix& P, int current, double u) {
  const int n = P.size();
  double acc = 0.0;
  int last_positive = current;
  for (int i = 0; i < n; ++i) {
    const double p = P.probs(current, i);
    if (p <= 0.0) continue;
    acc += p;
    last_positive = i;
    if (u < acc) return i;
  }
  // u landed in the rounding slack above the row sum.
  return last_positive;
}

Trajectory sample_trajectory(const Route& route, const TransitionMatrix& P, int start, int horizon,
                             Rng& rng) {
  (void)route;
  Trajectory tr;
  tr.positions.reserve(static_cast<std::size_t>(horizon));
  int cur = start;
  for (int t = 0; t < horizon; ++t) {
    if (t > 0) cur = step_position(P, cur, uniform01(rng));
    tr.positions.push_back(cur);
  }
  return tr;
}

Vector k_step_distribution(const TransitionMatrix& P, int start, int k) {
  Vector p = Vector::Zero(P.size());
  p(start) = 1.0;
  for (int s = 0; s < k; ++s) p = P.probs.transpose() * p;
  return p;
}

std::vector<Point> average_trajectory(const Route& route, const TransitionMatrix& P, int start,
                                      int t0, int horizon) {
  const int n = route.size();
  Eigen::Matrix<double, Eigen::Dynamic, 2> coords(n, 2);
  for (int i = 0; i < n; ++i) coords.row(i) = route.waypoints[static_cast<std::size_t>(i)].transpose();

  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(horizon - t0 + 1));
  out.push_back(route.waypoints[static_cast<std::size_t>(start)]);
  Vector p = Vector::Zero(n);
  p(start) = 1.0;
  for (int t = t0 + 1; t <= horizon; ++t) {
    p = P.probs.transpose() * p;
    out.push_back(coords.transpose() * p);
  }
  return out;
}

double conditional_distance_moment(const Route& route, const TransitionMatrix& P, int start, int k,
                                   const Point& bs_pos, double gamma, double d_min) {
  const Vector p = k_step_distribution(P, start, k);
  double m = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    if (p(i) == 0.0) continue;
    const double d = std::max((route.waypoints[static_cast<std::size_t>(i)] - bs_pos).norm(), d_min);
    m += p(i) * std::pow(d, gamma);
  }
  return m;
}

}  // namespace vehoff
