#include "vehoff/synthetic.hpp"

#include <algorithm>

namespace vehoff {

TransitionMatrix advance_chain(int n, const std::vector<double>& advance) {
  Matrix P = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (std::size_t k = 0; k < advance.size(); ++k) P(j, std::min(j + static_cast<int>(k), n - 1)) += advance[k];
  for (int j = 0; j < n; ++j) P.row(j) /= P.row(j).sum();
  return TransitionMatrix(std::move(P));
}

Scenario make_synthetic_scenario(const SyntheticOptions& o) {
  Scenario s;
  const double road = o.bs_spacing_m * o.bs;
  for (int m = 0; m < o.bs; ++m) s.bs_positions.emplace_back(o.bs_spacing_m * (m + 0.5), o.bs_offset_m);

  const int reach = static_cast<int>(o.advance.size()) - 1;
  const int W = o.horizon * std::max(reach, 1) + 1;
  const TransitionMatrix P = advance_chain(W, o.advance);
  for (int n = 0; n < o.vehicles; ++n) {
    const double x0 = road * (n + 0.5) / o.vehicles;
    const double dir = n % 2 == 0 ? 1.0 : -1.0;
    Route r;
    for (int i = 0; i < W; ++i) r.waypoints.emplace_back(x0 + dir * o.spacing_m * i, 0.0);
    r.start_index = 0;
    s.routes.push_back(std::move(r));
    s.transitions.push_back(P);
    s.tasks.push_back(TaskSpec{1, o.task_bits});
  }

  RadioParams& rp = s.radio;
  rp.bandwidth_hz = o.bandwidth_hz;
  rp.path_loss_const = o.path_loss_const;
  rp.path_loss_exp = o.path_loss_exp;
  rp.noise_plus_interference_w = o.noise_w;
  rp.fading_mean_power = o.fading_mean_power;
  rp.p_max_w = o.p_max_w;
  rp.slot_seconds = 1.0;
  rp.min_distance_m = 1.0;

  s.weights.energy_weight = o.energy_weight;
  s.weights.residual_weight = o.residual_weight;
  s.weights.residual_unit_bits = o.residual_unit_bits;
  s.time.horizon_slots = o.horizon;
  s.time.super_slot_len = o.super_slot;
  return s;
}

}  // namespace vehoff
