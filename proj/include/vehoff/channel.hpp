#pragma once

#include "vehoff/scenario.hpp"

#include <vector>

namespace vehoff {

/// Precomputed energy factors for one scenario. The chain is homogeneous, so
/// every look-ahead quantity depends only on (vehicle, start waypoint, steps).
/// Immutable once built; share it across trials.
class ChannelModel {
 public:
  explicit ChannelModel(const Scenario& s);

  int n_vehicles() const { return static_cast<int>(actual_.size()); }
  int n_bs() const { return n_bs_; }
  int max_steps() const { return max_steps_; }

  /// Phi at the waypoint itself.
  double actual_phi(int n, int waypoint, int bs) const { return actual_[n](waypoint, bs); }
  /// Phi built from E[distance^gamma] k steps after `start`.
  double expected_phi(int n, int start, int k, int bs) const {
    return expected_[n][static_cast<std::size_t>(start)](k, bs);
  }
  /// Phi evaluated at the average position k steps after `start`.
  double average_phi(int n, int start, int k, int bs) const {
    return average_[n][static_cast<std::size_t>(start)](k, bs);
  }
  Point average_position(int n, int start, int k) const {
    return avg_pos_[n][static_cast<std::size_t>(start)].row(k).transpose();
  }

 private:
  int n_bs_ = 0;
  int max_steps_ = 0;
  std::vector<Matrix> actual_;                 // [n](waypoint, bs)
  std::vector<std::vector<Matrix>> expected_;  // [n][start](k, bs)
  std::vector<std::vector<Matrix>> average_;   // [n][start](k, bs)
  std::vector<std::vector<Eigen::Matrix<double, Eigen::Dynamic, 2>>> avg_pos_;
};

}  // namespace vehoff
