#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace vehoff {

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

using Point = Point2<double>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IndexVector = Eigen::VectorXi;
using BinaryMatrix = Eigen::MatrixXi;

/// Raised when a requested allocation cannot be carried under the peak-power
/// and time-share constraints. `where` names the binding cell or slot.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, std::string where = {})
      : std::runtime_error(what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

}  // namespace vehoff
