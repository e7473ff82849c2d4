#include "rrf/linalg.hpp"
#include "rrf/sparse_solver.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace rrf::linalg {

Tolerances& default_tolerances() {
  static Tolerances tol;
  return tol;
}

bool all_finite(const Eigen::Ref<const DenseMatrix>& a) { return a.allFinite(); }

SvdResult dense_svd(const Eigen::Ref<const DenseMatrix>& a) {
  if (!all_finite(a)) throw DomainError("dense_svd: non-finite entries");
  SvdResult out;
  if (a.rows() == 0 || a.cols() == 0) {
    const Index k = std::min(a.rows(), a.cols());
    out.u = DenseMatrix::Zero(a.rows(), k);
    out.sigma = Vector::Zero(k);
    out.vt = DenseMatrix::Zero(k, a.cols());
    return out;
  }
  Eigen::BDCSVD<DenseMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw ConvergenceError("dense_svd: bidiagonal divide-and-conquer did not converge");
  }
  out.u = svd.matrixU();
  out.sigma = svd.singularValues();
  out.vt = svd.matrixV().transpose();
  return out;
}

Vector singular_values(const Eigen::Ref<const DenseMatrix>& a) {
  if (!all_finite(a)) throw DomainError("singular_values: non-finite entries");
  if (a.rows() == 0 || a.cols() == 0) return Vector::Zero(std::min(a.rows(), a.cols()));
  Eigen::BDCSVD<DenseMatrix> svd(a);
  if (svd.info() != Eigen::Success) {
    throw ConvergenceError("singular_values: bidiagonal divide-and-conquer did not converge");
  }
  return svd.singularValues();
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

ExtremalEigenvalues dense_extremes(const DenseMatrix& m, int kernel_dim) {
  const Index n = m.rows();
  if (n == 0) throw DimensionError("gram_extremal_eigenvalues: empty matrix");
  if (kernel_dim < 0 || kernel_dim >= n) {
    throw DimensionError("gram_extremal_eigenvalues: kernel dimension out of range");
  }
  const Vector values = symmetric_eig(m, false).values;
  // Backward error of Householder + QL is a modest multiple of n eps ||M||.
  const double lmax = values[0];
  const double slack = 4.0 * static_cast<double>(n) * kEps * std::abs(lmax);
  const double lmin = values[n - 1 - kernel_dim];
  if (!(lmin > slack)) {
    throw DomainError("gram_extremal_eigenvalues: matrix is not positive definite");
  }
  return {lmin - slack, lmax + slack};
}

ExtremalEigenvalues iterative_extremes(const SparseMatrix& m) {
  const Index n = m.rows();
  constexpr int kMaxIter = 5000;
  constexpr double kRelTol = 1e-12;

  // Deterministic start with components in every direction.
  Vector x(n);
  for (Index i = 0; i < n; ++i) x[i] = 1.0 + 0.5 * std::sin(1.0 + 3.0 * static_cast<double>(i));
  x.normalize();

  double rho_max = 0.0;
  double res_max = 0.0;
  for (int it = 0; it < kMaxIter; ++it) {
    Vector y = m * x;
    const double rho = x.dot(y);
    res_max = (y - rho * x).norm();
    x = y / y.norm();
    if (it > 0 && std::abs(rho - rho_max) <= kRelTol * std::abs(rho) && res_max <= 1e-6 * rho) {
      rho_max = rho;
      break;
    }
    rho_max = rho;
  }

  Factorization lu(m);
  Vector z(n);
  for (Index i = 0; i < n; ++i) z[i] = 1.0 + 0.5 * std::cos(2.0 + 5.0 * static_cast<double>(i));
  z.normalize();
  double rho_min = 0.0;
  double res_min = 0.0;
  for (int it = 0; it < kMaxIter; ++it) {
    Vector y = lu.solve(z);
    z = y / y.norm();
    const Vector mz = m * z;
    const double rho = z.dot(mz);
    res_min = (mz - rho * z).norm();
    if (it > 0 && std::abs(rho - rho_min) <= kRelTol * std::abs(rho) && res_min <= 1e-6 * rho) {
      rho_min = rho;
      break;
    }
    rho_min = rho;
  }
  if (!(rho_min > 0.0)) {
    throw DomainError("gram_extremal_eigenvalues: matrix is not positive definite");
  }
  // Rayleigh quotients approach lambda_min from above and lambda_max from below; the
  // margin covers the remaining quadratic convergence error.
  return {rho_min * (1.0 - 1e-9), rho_max * (1.0 + 1e-9)};
}

}  // namespace

ExtremalEigenvalues gram_extremal_eigenvalues(const Eigen::Ref<const DenseMatrix>& m,
                                              int kernel_dim) {
  if (m.rows() != m.cols()) throw DimensionError("gram_extremal_eigenvalues: not square");
  if (!all_finite(m)) throw DomainError("gram_extremal_eigenvalues: non-finite entries");
  return dense_extremes(m, kernel_dim);
}

ExtremalEigenvalues gram_extremal_eigenvalues(const SparseMatrix& m, int kernel_dim) {
  if (m.rows() != m.cols()) throw DimensionError("gram_extremal_eigenvalues: not square");
  if (m.rows() <= kDenseEigenThreshold) return dense_extremes(DenseMatrix(m), kernel_dim);
  if (kernel_dim != 0) {
    throw DimensionError(
        "gram_extremal_eigenvalues: kernel deflation only supported below the dense threshold");
  }
  return iterative_extremes(m);
}

}  // namespace rrf::linalg
