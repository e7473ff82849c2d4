#include "rrf/rangefinder.hpp"

namespace rrf {

ProjectionErrorOracle::ProjectionErrorOracle(const LinearOperator& op) {
  init(assemble_dense(op), op.source_space(), op.range_space());
}

ProjectionErrorOracle::ProjectionErrorOracle(const DenseMatrix& t, const InnerProductSpace& source,
                                             const InnerProductSpace& range) {
  init(t, source, range);
}

void ProjectionErrorOracle::init(const DenseMatrix& t, const InnerProductSpace& source,
                                 const InnerProductSpace& range) {
  if (t.rows() != range.dim() || t.cols() != source.dim()) {
    throw DimensionError("ProjectionErrorOracle: operator does not match the spaces");
  }
  const DenseMatrix ms(source.gram());
  Eigen::LLT<DenseMatrix> ls(ms);
  if (ls.info() != Eigen::Success) throw DomainError("ProjectionErrorOracle: M_S not definite");
  range_factor_t_ = range.dense_factor().transpose();
  // G = F^T T L_S^-T, computed as (L_S^-1 (F^T T)^T)^T
  const DenseMatrix ft = range_factor_t_ * t;
  const DenseMatrix g = ls.matrixL().solve(ft.transpose()).transpose();
  const auto svd = linalg::dense_svd(g);
  sigma_ = svd.sigma;
  Index k = 0;
  const double cut = sigma_.size() ? 1e-16 * sigma_[0] : 0.0;
  while (k < sigma_.size() && sigma_[k] > cut) ++k;
  us_ = svd.u.leftCols(k) * sigma_.head(k).asDiagonal();
}

double ProjectionErrorOracle::operator()(const OrthonormalBasis& basis) const {
  if (us_.cols() == 0) return 0.0;
  if (basis.empty()) return sigma_[0];
  if (basis.dim() != range_factor_t_.cols()) {
    throw DimensionError("projection_error: basis does not live in the range space");
  }
  const DenseMatrix q = range_factor_t_ * basis.vectors();
  DenseMatrix w = us_ - q * (q.transpose() * us_);
  // a second pass keeps the residual accurate when Q is only nearly orthonormal
  w -= q * (q.transpose() * w);
  const Vector s = linalg::singular_values(w);
  return s.size() ? s[0] : 0.0;
}

double projection_error(const LinearOperator& op, const OrthonormalBasis& basis) {
  return ProjectionErrorOracle(op)(basis);
}

}  // namespace rrf
