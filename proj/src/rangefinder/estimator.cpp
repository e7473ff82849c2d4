#include "rrf/rangefinder.hpp"
#include "rrf/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace rrf {

namespace {

double test_quantile(int n_t, double eps_testfail) {
  if (n_t < 1) throw DomainError("estimator: n_t must be at least 1");
  if (!(eps_testfail > 0.0)) throw DomainError("estimator: failure probability must be positive");
  const double y = std::pow(eps_testfail, 1.0 / n_t);
  if (!(y < 1.0)) throw DomainError("estimator: eps_testfail^(1/n_t) must be below 1");
  return special::erf_inv(y);
}

}  // namespace

double c_est(int n_t, double eps_testfail, double lambda_min_source) {
  if (!(lambda_min_source > 0.0)) throw DomainError("c_est: lambda_min must be positive");
  return 1.0 / (std::sqrt(2.0 * lambda_min_source) * test_quantile(n_t, eps_testfail));
}

double c_eff(int n_t, double eps_testfail, double lambda_min_source, double lambda_max_source,
             Index n_o) {
  if (n_o < 1) throw DomainError("c_eff: N_O must be at least 1");
  if (!(lambda_min_source > 0.0) || lambda_max_source < lambda_min_source) {
    throw DomainError("c_eff: invalid Gram eigenvalue bounds");
  }
  const double e = test_quantile(n_t, eps_testfail);
  const double q = special::gamma_q_inv(0.5 * static_cast<double>(n_o), eps_testfail / n_t);
  return std::sqrt(q * (lambda_max_source / lambda_min_source) / (e * e));
}

NormEstimate norm_estimate(const LinearOperator& op, int n_t, double eps_testfail, RngStream& rng) {
  NormEstimate out;
  out.c_est = c_est(n_t, eps_testfail, op.source_space().lambda_min());
  const auto& range = op.range_space();
  for (int i = 0; i < n_t; ++i) {
    out.max_test_norm = std::max(out.max_test_norm, range.norm(op.apply(rng.normal_vector(op.source_dim()))));
  }
  out.delta = out.c_est * out.max_test_norm;
  return out;
}

ResidualOperator::ResidualOperator(const LinearOperator& op, const OrthonormalBasis& basis)
    : op_(op), basis_(basis) {
  if (!basis.empty() && basis.dim() != op.range_dim()) {
    throw DimensionError("ResidualOperator: basis does not live in the range space");
  }
}

Vector ResidualOperator::apply(const Eigen::Ref<const Vector>& x) const {
  Vector y = op_.apply(x);
  if (!basis_.empty()) basis_.project_out_in_place(y);
  return y;
}

double a_priori_bound(const Vector& sigma, Index n, double cond_range, double cond_source) {
  if (n < 4) throw DomainError("a_priori_bound: requires n >= 4");
  if (!(cond_range >= 1.0) || !(cond_source >= 1.0)) {
    throw DomainError("a_priori_bound: condition numbers must be >= 1");
  }
  auto s = [&](Index j) { return j <= sigma.size() ? sigma[j - 1] : 0.0; };  // 1-based
  double best = std::numeric_limits<double>::infinity();
  for (Index k = 2; k <= n - 2; ++k) {
    const Index p = n - k;
    double tail = 0.0;
    for (Index j = k + 1; j <= sigma.size(); ++j) tail += s(j) * s(j);
    const double term =
        (1.0 + std::sqrt(static_cast<double>(k) / static_cast<double>(p - 1))) * s(k + 1) +
        std::numbers::e * std::sqrt(static_cast<double>(n)) / static_cast<double>(p) * std::sqrt(tail);
    best = std::min(best, term);
  }
  return std::sqrt(cond_range * cond_source) * best;
}

double effectivity(const LinearOperator& op, const OrthonormalBasis& basis, int n_t,
                   double eps_testfail, RngStream& rng, const ProjectionErrorOracle& oracle) {
  const double error = oracle(basis);
  if (!(error >= 1e-13 * oracle.norm()) || error == 0.0) {
    throw DomainError("effectivity: error at numerical noise floor");
  }
  const ResidualOperator residual(op, basis);
  return norm_estimate(residual, n_t, eps_testfail, rng).delta / error;
}

}  // namespace rrf
