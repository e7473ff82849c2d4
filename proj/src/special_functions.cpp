#include "rrf/special_functions.hpp"

#include "rrf/linalg.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <string>

namespace rrf::special {

namespace {

std::string fmt(double v) { return std::to_string(v); }

}  // namespace

double erf(double x) {
  if (std::isnan(x)) throw DomainError("erf: NaN argument");
  return std::erf(x);
}

double erf_inv(double y) {
  if (!(std::abs(y) < 1.0)) throw DomainError("erf_inv: argument " + fmt(y) + " outside (-1, 1)");
  return boost::math::erf_inv(y);
}

double gamma_q(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("gamma_q: a must be positive");
  if (!(x >= 0.0)) throw DomainError("gamma_q: x must be non-negative");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(a, x);
}

double gamma_q_inv(double a, double y) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("gamma_q_inv: a must be positive");
  if (!(y > 0.0 && y <= 1.0)) {
    throw DomainError("gamma_q_inv: probability " + fmt(y) + " outside (0, 1]");
  }
  if (y == 1.0) return 0.0;
  return boost::math::gamma_q_inv(a, y);
}

}  // namespace rrf::special
