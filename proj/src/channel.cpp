#include "vehoff/channel.hpp"

#include <cmath>

namespace vehoff {

ChannelModel::ChannelModel(const Scenario& s) : n_bs_(s.n_bs()), max_steps_(s.horizon()) {
  const RadioParams& radio = s.radio;
  const int N = s.n_vehicles();
  const int M = s.n_bs();
  actual_.resize(N);
  expected_.resize(N);
  average_.resize(N);
  avg_pos_.resize(N);

  for (int n = 0; n < N; ++n) {
    const Route& route = s.routes[n];
    const Matrix& P = s.transitions[n].probs;
    const int W = route.size();

    Eigen::Matrix<double, Eigen::Dynamic, 2> coords(W, 2);
    Matrix dist_pow(W, M);
    actual_[n].resize(W, M);
    for (int i = 0; i < W; ++i) {
      coords.row(i) = route.waypoints[i].transpose();
      for (int m = 0; m < M; ++m) {
        const double d = std::max((route.waypoints[i] - s.bs_positions[m]).norm(),
                                  radio.min_distance_m);
        dist_pow(i, m) = std::pow(d, radio.path_loss_exp);
        actual_[n](i, m) = phi_factor(route.waypoints[i], s.bs_positions[m], radio, m);
      }
    }
    Eigen::RowVectorXd scale(M);
    for (int m = 0; m < M; ++m) scale(m) = phi_per_distance_moment(radio, m);

    expected_[n].resize(W);
    average_[n].resize(W);
    avg_pos_[n].resize(W);
    for (int start = 0; start < W; ++start) {
      Matrix dist(max_steps_ + 1, W);
      Vector p = Vector::Zero(W);
      p(start) = 1.0;
      for (int k = 0; k <= max_steps_; ++k) {
        if (k > 0) p = P.transpose() * p;
        dist.row(k) = p.transpose();
      }
      Matrix& ex = expected_[n][start];
      ex = (dist * dist_pow).array().rowwise() * scale.array();
      // The step-0 row is exact; avoid the round trip through the moment.
      ex.row(0) = actual_[n].row(start);

      auto& pos = avg_pos_[n][start];
      pos = dist * coords;
      pos.row(0) = coords.row(start);
      Matrix& av = average_[n][start];
      av.resize(max_steps_ + 1, M);
      for (int k = 0; k <= max_steps_; ++k)
        for (int m = 0; m < M; ++m)
          av(k, m) = phi_factor(pos.row(k).transpose(), s.bs_positions[m], radio, m);
    }
  }
}

}  // namespace vehoff
