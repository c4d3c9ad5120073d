#pragma once

#include "vehoff/rng.hpp"
#include "vehoff/types.hpp"

#include <vector>

namespace vehoff {

struct Route {
  std::vector<Point> waypoints;
  int start_index = 0;

  int size() const { return static_cast<int>(waypoints.size()); }
};

// Storage is row-stochastic: probs(j, i) = P[next = i | current = j]. Each row
// is the conditional distribution of the next waypoint.
struct TransitionMatrix {
  Matrix probs;

  TransitionMatrix() = default;
  explicit TransitionMatrix(Matrix p) : probs(std::move(p)) {}

  int size() const { return static_cast<int>(probs.rows()); }
  static TransitionMatrix identity(int n) { return TransitionMatrix(Matrix::Identity(n, n)); }
  /// Chain that advances one waypoint per slot and stops at the last one.
  static TransitionMatrix advance(int n);
};

struct Trajectory {
  std::vector<int> positions;  // waypoint index per slot, positions[0] = start
};

/// Next waypoint from `current` given a uniform draw in [0, 1), by inverse CDF
/// over the conditional row.
int step_position(const TransitionMatrix& P, int current, double u);

Trajectory sample_trajectory(const Route& route, const TransitionMatrix& P, int start, int horizon,
                             Rng& rng);

/// Distribution over waypoints after k steps from `start`.
Vector k_step_distribution(const TransitionMatrix& P, int start, int k);

/// Expected coordinates for slots t0..horizon given the waypoint at t0. Entry 0
/// is the start coordinate.
std::vector<Point> average_trajectory(const Route& route, const TransitionMatrix& P, int start,
                                      int t0, int horizon);

/// E[max(|l_{t+k} - bs|, d_min)^gamma | l_t = start].
double conditional_distance_moment(const Route& route, const TransitionMatrix& P, int start, int k,
                                   const Point& bs_pos, double gamma, double d_min = 0.0);

}  // namespace vehoff
