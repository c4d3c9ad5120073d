#pragma once

#include "vehoff/scenario.hpp"

#include <vector>

namespace vehoff {

// Straight road along x with BSs evenly spaced beside it. Vehicles start
// spread along the road, alternating direction, and advance a random number
// of waypoints per slot.
struct SyntheticOptions {
  int vehicles = 5;
  int bs = 3;
  int horizon = 20;
  int super_slot = 5;
  double spacing_m = 5.0;                           // between waypoints
  std::vector<double> advance{0.2, 0.2, 0.2, 0.2, 0.2};  // P[advance k waypoints]
  double bs_spacing_m = 200.0;
  double bs_offset_m = 25.0;
  double task_bits = 2e8;
  double energy_weight = 2.0;
  double residual_weight = 5.0;
  double residual_unit_bits = 1e6;
  double bandwidth_hz = 20e6;
  double path_loss_const = 1.855e5;  // Phi is about 10 mW at 50 m
  double path_loss_exp = 4.0;
  double noise_w = 1e-3;
  double fading_mean_power = 6.0;
  double p_max_w = 5.0;
};

Scenario make_synthetic_scenario(const SyntheticOptions& o);

/// Transition matrix of the random-advance chain on n waypoints; mass that
/// would run past the last waypoint stays there.
TransitionMatrix advance_chain(int n, const std::vector<double>& advance);

}  // namespace vehoff
