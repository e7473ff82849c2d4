#include "rrf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rrf {

namespace {

// Rounding level of v^T M v: |v|^T |M| |v| scaled by eps and the row length.
double gram_rounding_level(const SparseMatrix& m, const Vector& v) {
  double sum = 0.0;
  Index longest = 0;
  for (Index c = 0; c < m.outerSize(); ++c) {
    Index count = 0;
    for (SparseMatrix::InnerIterator it(m, c); it; ++it, ++count) {
      sum += std::abs(v[it.row()] * it.value() * v[it.col()]);
    }
    longest = std::max(longest, count);
  }
  return static_cast<double>(longest + 2) * std::numeric_limits<double>::epsilon() * sum;
}

}  // namespace

Vector OrthonormalBasis::coefficients(const Eigen::Ref<const Vector>& v) const {
  if (v.size() != dim()) throw DimensionError("coefficients: length mismatch");
  return gram_vectors_.transpose() * v;
}

Vector OrthonormalBasis::project_out(const Eigen::Ref<const Vector>& v) const {
  Vector w = v;
  project_out_in_place(w);
  return w;
}

void OrthonormalBasis::project_out_in_place(Eigen::Ref<Vector> v) const {
  if (v.size() != dim()) throw DimensionError("project_out: length mismatch");
  if (empty()) return;
  const Vector c = gram_vectors_.transpose() * v;
  v.noalias() -= vectors_ * c;
}

double OrthonormalBasis::orthonormality_residual() const {
  if (empty()) return 0.0;
  const DenseMatrix g = vectors_.transpose() * gram_vectors_;
  return (g - DenseMatrix::Identity(size(), size())).cwiseAbs().maxCoeff();
}

OrthonormalBasis OrthonormalBasis::prefix(Index k) const {
  if (k < 0 || k > size()) throw DimensionError("prefix: size out of range");
  OrthonormalBasis out(dim());
  out.vectors_ = vectors_.leftCols(k);
  out.gram_vectors_ = gram_vectors_.leftCols(k);
  return out;
}

void OrthonormalBasis::append_unchecked(const Eigen::Ref<const Vector>& b,
                                        const Eigen::Ref<const Vector>& mb) {
  if (b.size() != dim() || mb.size() != dim()) throw DimensionError("append: length mismatch");
  const Index k = size();
  vectors_.conservativeResize(Eigen::NoChange, k + 1);
  gram_vectors_.conservativeResize(Eigen::NoChange, k + 1);
  vectors_.col(k) = b;
  gram_vectors_.col(k) = mb;
}

ExtendResult orthonormalize_extend(OrthonormalBasis& basis, const Eigen::Ref<const Vector>& v,
                                   const InnerProductSpace& space, const linalg::Tolerances& tol) {
  if (space.dim() != basis.dim() || v.size() != basis.dim()) {
    throw DimensionError("orthonormalize_extend: dimension mismatch");
  }
  if (!v.allFinite()) throw DomainError("orthonormalize_extend: non-finite vector");

  const double original = space.norm(v);
  if (original == 0.0) return ExtendResult::rejected;

  Vector w = v;
  double before = original;
  double after = original;
  constexpr int kMaxPasses = 4;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    basis.project_out_in_place(w);
    after = space.norm(w);
    if (after >= tol.reorthogonalize_ratio * before) break;
    before = after;
  }
  if (after < tol.drop_ratio * original) return ExtendResult::rejected;
  // the remainder is lost in the rounding of its own norm
  if (after * after <= gram_rounding_level(space.gram(), w)) return ExtendResult::rejected;

  w /= after;
  const Vector mw = space.apply_gram(w);
  basis.append_unchecked(w, mw);
  return ExtendResult::extended;
}

}  // namespace rrf
