#include "rrf/linalg.hpp"
#include "rrf/special_functions.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace rrf;

namespace {

// Maclaurin series of erf, summed until the terms vanish.
double erf_series(double x) {
  double term = x;
  double sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= -x * x / n;
    const double add = term / (2 * n + 1);
    sum += add;
    if (std::abs(add) < 1e-18 * std::abs(sum)) break;
  }
  return 2.0 / std::sqrt(std::numbers::pi) * sum;
}

// Q(a, x) by composite Simpson quadrature of the integral definition.
double gamma_q_quadrature(double a, double x) {
  const double upper = x + 60.0 + 20.0 * std::sqrt(a);
  const int n = 200000;
  const double h = (upper - x) / n;
  auto f = [a](double t) { return std::exp((a - 1) * std::log(t) - t - std::lgamma(a)); };
  double s = f(x) + f(upper);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * f(x + i * h);
  return s * h / 3;
}

}  // namespace

TEST_CASE("erf values") {
  CHECK(special::erf(0.0) == 0.0);
  CHECK(std::abs(special::erf(1.0) - 0.8427007929497149) <= 1e-15);
  // The series cancels badly beyond |x| = 2.
  for (double x = -2.0; x <= 2.0; x += 0.125) {
    CHECK(std::abs(special::erf(x) - erf_series(x)) <= 1e-14);
    CHECK(special::erf(-x) == -special::erf(x));
  }
  CHECK(std::abs(special::erf(3.0) - 0.9999779095030014) <= 1e-15);
  for (double x = -6.0; x < 6.0; x += 0.1) CHECK(special::erf(x) <= special::erf(x + 0.1));
  CHECK_THROWS_AS(special::erf(std::nan("")), DomainError);
}

TEST_CASE("erf_inv values and round trips") {
  CHECK(special::erf_inv(0.0) == 0.0);
  CHECK(special::erf_inv(0.6826894921370859) == doctest::Approx(0.7071067811865476).epsilon(1e-14));
  for (double y = -0.9999; y < 1.0; y += 0.01) {
    CHECK(std::abs(special::erf(special::erf_inv(y)) - y) <= 1e-13);
    CHECK(special::erf_inv(-y) == doctest::Approx(-special::erf_inv(y)).epsilon(1e-15));
  }
  // Values of eps^(1/n_t) close to one.
  for (double y : {1.0 - 1e-6, 1.0 - 1e-10, 1.0 - 1e-14}) {
    CHECK(std::abs(special::erf(special::erf_inv(y)) - y) <= 1e-13);
  }
  for (double x = -3.0; x <= 3.0; x += 0.05) {
    CHECK(std::abs(special::erf_inv(special::erf(x)) - x) <= 1e-12);
  }
  CHECK_THROWS_AS(special::erf_inv(1.0), DomainError);
  CHECK_THROWS_AS(special::erf_inv(-1.5), DomainError);
}

TEST_CASE("gamma_q values") {
  CHECK(special::gamma_q(1.0, std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(special::gamma_q(0.5, 1.0) - 0.15729920705028513) <= 1e-15);
  for (double a : {0.5, 1.0, 7.5, 1993.5}) CHECK(special::gamma_q(a, 0.0) == 1.0);
  for (double x = 0.0; x < 10.0; x += 0.5) {
    CHECK(special::gamma_q(1.0, x) == doctest::Approx(std::exp(-x)).epsilon(1e-13));
    CHECK(special::gamma_q(0.5, x) == doctest::Approx(1.0 - erf_series(std::sqrt(x))).epsilon(1e-12));
  }
  CHECK_THROWS_AS(special::gamma_q(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(special::gamma_q(1.0, -1.0), DomainError);
}

TEST_CASE("gamma_q against the integral definition") {
  for (double a : {0.5, 3.0, 40.0}) {
    for (double f : {0.5, 1.0, 2.0}) {
      const double x = a * f;
      CHECK(std::abs(special::gamma_q(a, x) - gamma_q_quadrature(a, x)) <= 1e-10);
    }
  }
}

TEST_CASE("gamma_q is decreasing and has a median near a") {
  for (double a : {0.5, 5.0, 160.5}) {
    double prev = 1.0;
    for (double x = 0.0; x < 4 * a + 20; x += a / 10 + 0.05) {
      const double q = special::gamma_q(a, x);
      CHECK(q <= prev);
      prev = q;
    }
  }
  for (double a : {10.0, 100.0, 1000.0, 10000.0}) {
    const double q = special::gamma_q(a, a);
    CHECK(q > 0.3);
    CHECK(q < 0.7);
  }
}

TEST_CASE("gamma_q_inv values and round trips") {
  CHECK(special::gamma_q_inv(1.0, 0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(special::gamma_q_inv(0.5, 0.15729920705028513) == doctest::Approx(1.0).epsilon(1e-12));
  for (double a : {0.5, 3.0, 1993.5}) CHECK(special::gamma_q_inv(a, 1.0) == 0.0);
  for (double a : {0.5, 1.0, 5.0, 160.5, 1993.5}) {
    for (double y : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.9}) {
      CHECK(std::abs(special::gamma_q(a, special::gamma_q_inv(a, y)) - y) <= 1e-11);
    }
    for (double f : {0.8, 1.0, 1.3, 2.0}) {
      const double x = a * f;
      const double q = special::gamma_q(a, x);
      // x is not determined by q to 1e-10 once q is this close to one.
      if (q > 0.99) continue;
      CHECK(special::gamma_q_inv(a, q) == doctest::Approx(x).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(special::gamma_q_inv(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(special::gamma_q_inv(1.0, 1.5), DomainError);
}
