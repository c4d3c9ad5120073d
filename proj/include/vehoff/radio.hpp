#pragma once

#include "vehoff/types.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace vehoff {

struct RadioParams {
  double bandwidth_hz = 20e6;
  double path_loss_const = 1.0;
  double path_loss_exp = 4.0;
  // Noise plus the stationary co-channel interference power, in watts.
  double noise_plus_interference_w = 1e-3;
  // Optional per-BS override of the noise floor; empty means use the scalar.
  std::vector<double> per_bs_noise_w;
  // Mean of |h|^2 for Rayleigh fading.
  double fading_mean_power = 1.0;
  double p_max_w = 5.0;
  double slot_seconds = 1.0;
  double min_distance_m = 1.0;

  double noise_w(int bs) const {
    return per_bs_noise_w.empty() ? noise_plus_interference_w
                                  : per_bs_noise_w[static_cast<std::size_t>(bs)];
  }
  /// Bits carried per unit of spectral efficiency over a whole slot (T_s B).
  double slot_bits() const { return slot_seconds * bandwidth_hz; }
};

inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

template <typename Scalar>
Scalar clamped_distance(const Point2<Scalar>& a, const Point2<Scalar>& b, Scalar d_min) {
  using std::max;
  return max(static_cast<Scalar>((a - b).norm()), d_min);
}

/// G / max(|v - bs|, d_min)^gamma.
template <typename Scalar>
Scalar path_loss(const Point2<Scalar>& vehicle, const Point2<Scalar>& bs, Scalar gain_const,
                 Scalar exponent, Scalar d_min = Scalar(1)) {
  using std::pow;
  return gain_const / pow(clamped_distance(vehicle, bs, d_min), exponent);
}

/// E[log2(gain |h|^2 / noise)] for |h|^2 exponential with the given mean.
template <typename Scalar>
Scalar fading_log_moment(Scalar mean_power, Scalar noise_w, Scalar gain) {
  using std::log2;
  return log2(gain * mean_power / noise_w) -
         static_cast<Scalar>(kEulerGamma / std::numbers::ln2);
}

/// Same expectation for an arbitrary |h|^2 density, by tanh-sinh quadrature
/// over (0, inf).
double fading_log_moment_numeric(const std::function<double(double)>& density, double noise_w,
                                 double gain);

/// Energy factor Phi = 2^{-E[log2(g |h|^2 / noise)]} in watts, closed form
/// noise e^{gamma_E} / (g nu).
template <typename Scalar>
Scalar phi_from_gain(Scalar gain, Scalar mean_power, Scalar noise_w) {
  using std::exp;
  return noise_w * exp(static_cast<Scalar>(kEulerGamma)) / (gain * mean_power);
}

inline double phi_factor(const Point& vehicle, const Point& bs, const RadioParams& radio,
                         int bs_index = 0) {
  const double g = path_loss(vehicle, bs, radio.path_loss_const, radio.path_loss_exp,
                             radio.min_distance_m);
  return phi_from_gain(g, radio.fading_mean_power, radio.noise_w(bs_index));
}

/// Phi per unit of |l - l_m|^gamma; multiply by a distance moment to get the
/// expected energy factor.
inline double phi_per_distance_moment(const RadioParams& radio, int bs_index = 0) {
  return phi_from_gain(radio.path_loss_const, radio.fading_mean_power, radio.noise_w(bs_index));
}

/// High-SNR inversion: power needed to carry `bits` in `tau` of a slot.
template <typename Scalar>
Scalar power_for_rate(Scalar bits, Scalar tau, Scalar phi, const RadioParams& radio) {
  using std::exp2;
  if (tau <= Scalar(0)) {
    if (bits > Scalar(0)) throw InfeasibleError("positive rate with zero time share");
    return Scalar(0);
  }
  return phi * exp2(bits / (tau * static_cast<Scalar>(radio.slot_bits())));
}

/// Largest rate schedulable within `tau` at peak power `p_max`.
template <typename Scalar>
Scalar max_rate(Scalar tau, Scalar phi, Scalar p_max, const RadioParams& radio) {
  using std::log2;
  if (tau <= Scalar(0) || p_max <= phi) return Scalar(0);
  return tau * static_cast<Scalar>(radio.slot_bits()) * log2(p_max / phi);
}

/// Transmit energy P * tau of one slot. A vehicle sending nothing is silent.
template <typename Scalar>
Scalar slot_energy(Scalar bits, Scalar tau, Scalar phi, const RadioParams& radio) {
  if (bits <= Scalar(0)) return Scalar(0);
  return tau * power_for_rate(bits, tau, phi, radio);
}

}  // namespace vehoff
