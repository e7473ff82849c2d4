#include "rrf/linalg.hpp"

#include <cmath>
#include <mutex>

namespace rrf {

struct InnerProductSpace::Cache {
  std::once_flag extremes_once;
  linalg::ExtremalEigenvalues extremes{0.0, 0.0};
  std::once_flag factor_once;
  DenseMatrix factor;
};

InnerProductSpace::InnerProductSpace(SparseMatrix gram, int kernel_dim)
    : gram_(std::move(gram)), kernel_dim_(kernel_dim), cache_(std::make_shared<Cache>()) {
  if (gram_.rows() != gram_.cols()) throw DimensionError("InnerProductSpace: Gram not square");
  if (kernel_dim_ < 0 || (gram_.rows() > 0 && kernel_dim_ >= gram_.rows())) {
    throw DimensionError("InnerProductSpace: kernel dimension out of range");
  }
  gram_.makeCompressed();
  double max_abs = 0.0;
  for (Index k = 0; k < gram_.nonZeros(); ++k) {
    if (!std::isfinite(gram_.valuePtr()[k])) {
      throw DomainError("InnerProductSpace: non-finite Gram entry");
    }
    max_abs = std::max(max_abs, std::abs(gram_.valuePtr()[k]));
  }
  const SparseMatrix asym = SparseMatrix(gram_.transpose()) - gram_;
  double asym_max = 0.0;
  for (Index k = 0; k < asym.nonZeros(); ++k) {
    asym_max = std::max(asym_max, std::abs(asym.valuePtr()[k]));
  }
  if (asym_max > 1e-12 * max_abs) throw DomainError("InnerProductSpace: Gram not symmetric");
}

InnerProductSpace InnerProductSpace::euclidean(Index n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return InnerProductSpace(std::move(id));
}

double InnerProductSpace::inner(const Eigen::Ref<const Vector>& u,
                                const Eigen::Ref<const Vector>& v) const {
  if (u.size() != dim() || v.size() != dim()) throw DimensionError("inner: length mismatch");
  return u.dot(gram_ * v);
}

double InnerProductSpace::norm(const Eigen::Ref<const Vector>& v) const {
  return std::sqrt(std::max(0.0, inner(v, v)));
}

Vector InnerProductSpace::apply_gram(const Eigen::Ref<const Vector>& v) const {
  if (v.size() != dim()) throw DimensionError("apply_gram: length mismatch");
  return gram_ * v;
}

double InnerProductSpace::lambda_min() const {
  std::call_once(cache_->extremes_once,
                 [&] { cache_->extremes = linalg::gram_extremal_eigenvalues(gram_, kernel_dim_); });
  return cache_->extremes.min;
}

double InnerProductSpace::lambda_max() const {
  lambda_min();
  return cache_->extremes.max;
}

const DenseMatrix& InnerProductSpace::dense_factor() const {
  std::call_once(cache_->factor_once, [&] {
    const DenseMatrix m(gram_);
    if (kernel_dim_ == 0) {
      Eigen::LLT<DenseMatrix> llt(m);
      if (llt.info() == Eigen::Success) {
        cache_->factor = llt.matrixL();
        return;
      }
    }
    // M = P^T L D L^T P, so F = P^T L D^{1/2}.
    Eigen::LDLT<DenseMatrix> ldlt(m);
    if (ldlt.info() != Eigen::Success) throw DomainError("dense_factor: factorization failed");
    const Vector d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
    DenseMatrix l = ldlt.matrixL();
    l = l * d.asDiagonal();
    cache_->factor = ldlt.transpositionsP().transpose() * l;
  });
  return cache_->factor;
}

}  // namespace rrf
