#include "specfun.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/digamma.hpp>

#include "errors.hpp"

namespace fraclap {

FractionalOrder::FractionalOrder(double s) : s_(s) {
  if (!(s > 0.0 && s < 1.0)) {
    std::ostringstream os;
    os << "fractional order s=" << s << " must lie in the open interval (0,1)";
    fail(ErrorKind::Validation, os.str());
  }
}

Dimension::Dimension(int n) : n_(n) {
  if (n < 1) fail(ErrorKind::Validation, "dimension N must be >= 1, got " + std::to_string(n));
}

double gamma_fn(double x) { return std::tgamma(x); }

double digamma_fn(double x) { return boost::math::digamma(x); }

double c_ns(Dimension n, FractionalOrder order) {
  const double s = order.value();
  const double half_n = 0.5 * n.value();
  return s * (1.0 - s) * std::pow(std::numbers::pi, -half_n) * std::exp2(2.0 * s) * gamma_fn(half_n + s) /
         gamma_fn(2.0 - s);
}

double dc_ns(Dimension n, FractionalOrder order) {
  const double s = order.value();
  const double log_derivative = (1.0 - 2.0 * s) / (s * (1.0 - s)) + 2.0 * std::numbers::ln2 +
                                digamma_fn(0.5 * n.value() + s) + digamma_fn(2.0 - s);
  return c_ns(n, order) * log_derivative;
}

double psi_sigma(double r, double sigma) {
  require(r > 0.0, "psi_sigma requires r > 0");
  const double z = -2.0 * sigma * std::log(r);
  if (std::abs(z) < 1e-6) return 1.0 + z / 2.0 + z * z / 6.0;
  return std::expm1(z) / z;
}

LogDecayBound log_decay_bound(double r, double eps0, double pivot) {
  require(r > 0.0 && eps0 > 0.0 && pivot > 0.0, "log_decay_bound requires positive r, eps0 and pivot");
  LogDecayBound out;
  out.abs_log = std::abs(std::log(r));
  const double scale = 1.0 / (std::numbers::e * eps0);
  if (r <= pivot) out.below_pivot = scale * std::pow(r, -eps0);
  if (r >= pivot) out.above_pivot = scale * std::pow(r, eps0);
  return out;
}

}  // namespace fraclap
