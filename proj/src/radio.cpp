#include "vehoff/radio.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>

namespace vehoff {

double fading_log_moment_numeric(const std::function<double(double)>& density, double noise_w,
                                 double gain) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double scale = std::log2(gain / noise_w);
  auto f = [&](double x) {
    const double p = density(x);
    return p == 0.0 ? 0.0 : p * (scale + std::log2(x));
  };
  return integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

}  // namespace vehoff
