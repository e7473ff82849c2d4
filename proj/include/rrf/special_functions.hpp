#pragma once

namespace rrf::special {

/// Error function.
double erf(double x);

/// Inverse error function on (-1, 1). Throws DomainError for |y| >= 1.
double erf_inv(double y);

/// Upper regularized incomplete gamma function Q(a, x) = Gamma(a, x) / Gamma(a).
double gamma_q(double a, double x);

/// x with Q(a, x) = y, for 0 < y <= 1.
double gamma_q_inv(double a, double y);

}  // namespace rrf::special
