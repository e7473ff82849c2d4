#include "rrf/oracle.hpp"

#include "rrf/csv.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

namespace rrf::oracle {

namespace {

// `floor` is relative to lambda_1.
void clamp_and_root(SpectralData& d, double floor) {
  const double top = d.lambda.size() ? std::max(d.lambda[0], 0.0) : 0.0;
  d.sigma.resize(d.lambda.size());
  for (Index j = 0; j < d.lambda.size(); ++j) {
    if (d.lambda[j] < floor * top) d.lambda[j] = 0.0;
    d.sigma[j] = std::sqrt(d.lambda[j]);
  }
}

void check_shapes(const DenseMatrix& t, const InnerProductSpace& source, const InnerProductSpace& range) {
  if (t.cols() != source.dim() || t.rows() != range.dim()) {
    throw DimensionError("oracle: operator does not match the spaces");
  }
  if (source.dim() > 10000) throw DimensionError("oracle: source dimension above the dense limit");
}

}  // namespace

SpectralData transfer_eigenproblem(const DenseMatrix& t, const InnerProductSpace& source,
                                   const InnerProductSpace& range) {
  check_shapes(t, source, range);
  const DenseMatrix a = t.transpose() * (range.gram() * t);
  const DenseMatrix ms(source.gram());
  auto eig = linalg::generalized_symmetric_eig(a, ms);
  SpectralData d;
  d.lambda = std::move(eig.values);
  d.zeta = std::move(eig.vectors);
  clamp_and_root(d, kNoiseFloor);
  d.phi = t * d.zeta;
  return d;
}

SpectralData weighted_svd(const DenseMatrix& t, const InnerProductSpace& source,
                          const InnerProductSpace& range) {
  check_shapes(t, source, range);
  const DenseMatrix ms(source.gram());
  Eigen::LLT<DenseMatrix> ls(ms);
  if (ls.info() != Eigen::Success) throw DomainError("weighted_svd: M_S not positive definite");
  const DenseMatrix ft = range.dense_factor().transpose() * t;
  const DenseMatrix g = ls.matrixL().solve(ft.transpose()).transpose();
  const auto svd = linalg::dense_svd(g);

  SpectralData d;
  d.lambda = svd.sigma.array().square();
  d.zeta = ls.matrixU().solve(svd.vt.transpose());
  clamp_and_root(d, kNoiseFloor * kNoiseFloor);
  d.phi = t * d.zeta;
  return d;
}

OrthonormalBasis optimal_basis(const SpectralData& data, Index n, const InnerProductSpace& range) {
  OrthonormalBasis b(range.dim());
  for (Index j = 0; j < std::min(n, data.sigma.size()); ++j) {
    if (data.sigma[j] <= 0.0) break;
    const Vector v = data.phi.col(j) / range.norm(data.phi.col(j));
    b.append_unchecked(v, range.apply_gram(v));
  }
  return b;
}

double analytic_sigma(int i, double half_length, double width) {
  if (i < 1) throw DomainError("analytic_sigma: index starts at 1");
  if (!(half_length > 0.0) || !(width > 0.0)) throw DomainError("analytic_sigma: L and W must be positive");
  return 1.0 / (std::numbers::sqrt2 * std::cosh((i - 1) * std::numbers::pi * half_length / width));
}

void write_spectrum_csv(std::ostream& os, const SpectralData& data) {
  csv::Writer w(os, {"index", "lambda", "sigma"});
  for (Index j = 0; j < data.lambda.size(); ++j) {
    w.row({csv::cell(j + 1), csv::cell(data.lambda[j]), csv::cell(data.sigma[j])});
  }
}

}  // namespace rrf::oracle
