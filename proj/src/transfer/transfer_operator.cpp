#include "rrf/transfer.hpp"

#include <cmath>

namespace rrf {

MatrixOperator::MatrixOperator(DenseMatrix matrix, InnerProductSpace source, InnerProductSpace range)
    : matrix_(std::move(matrix)), source_(std::move(source)), range_(std::move(range)) {
  if (matrix_.cols() != source_.dim() || matrix_.rows() != range_.dim()) {
    throw DimensionError("MatrixOperator: matrix does not match the spaces");
  }
}

MatrixOperator::MatrixOperator(DenseMatrix matrix)
    : MatrixOperator(matrix, InnerProductSpace::euclidean(matrix.cols()),
                     InnerProductSpace::euclidean(matrix.rows())) {}

Vector MatrixOperator::apply(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != matrix_.cols()) throw DimensionError("MatrixOperator: wrong input length");
  return matrix_ * x;
}

DenseMatrix assemble_dense(const LinearOperator& op, Index max_source_dim) {
  const Index ns = op.source_dim();
  if (ns > max_source_dim) {
    throw DimensionError("assemble_dense: source dimension " + std::to_string(ns) +
                         " exceeds the dense limit " + std::to_string(max_source_dim));
  }
  DenseMatrix out(op.range_dim(), ns);
  Vector e = Vector::Zero(ns);
  for (Index j = 0; j < ns; ++j) {
    e[j] = 1.0;
    out.col(j) = op.apply(e);
    e[j] = 0.0;
  }
  return out;
}

Vector kernel_projection(const Eigen::Ref<const Vector>& v, const Eigen::Ref<const DenseMatrix>& eta,
                         const SparseMatrix& q) {
  if (eta.cols() == 0) return v;
  if (eta.rows() != v.size() || q.rows() != v.size() || q.cols() != v.size()) {
    throw DimensionError("kernel_projection: dimension mismatch");
  }
  const DenseMatrix qeta = q * eta;
  const DenseMatrix g = eta.transpose() * qeta;
  if ((g - DenseMatrix::Identity(eta.cols(), eta.cols())).cwiseAbs().maxCoeff() > 1e-10) {
    throw DomainError("kernel_projection: kernel basis is not orthonormal");
  }
  return v - eta * (qeta.transpose() * v);
}

TransferOperator::TransferOperator(TransferSetup setup)
    : TransferOperator(std::move(setup), nullptr) {}

TransferOperator::TransferOperator(TransferSetup setup,
                                   std::shared_ptr<const Factorization> factorization)
    : setup_(std::move(setup)), factorization_(std::move(factorization)) {
  validate();
  if (!factorization_) factorization_ = factorize(setup_.system);
  if (factorization_->dim() != setup_.system.rows()) {
    throw DimensionError("TransferOperator: factorization does not match the system");
  }
  if (setup_.placement != KernelPlacement::none && setup_.kernel_basis.cols() > 0) {
    kernel_gram_basis_ = setup_.kernel_gram * setup_.kernel_basis;
  }
}

void TransferOperator::validate() const {
  const Index n = setup_.system.rows();
  if (setup_.system.cols() != n) throw DimensionError("TransferOperator: system not square");
  if (static_cast<Index>(setup_.source_dofs.size()) != setup_.source_space.dim() ||
      static_cast<Index>(setup_.range_dofs.size()) != setup_.range_space.dim()) {
    throw DimensionError("TransferOperator: DOF maps do not match the spaces");
  }
  for (int d : setup_.source_dofs) {
    if (d < 0 || d >= n) throw DimensionError("TransferOperator: source DOF out of range");
  }
  for (int d : setup_.range_dofs) {
    if (d < 0 || d >= n) throw DimensionError("TransferOperator: range DOF out of range");
  }
  if (setup_.placement == KernelPlacement::none || setup_.kernel_basis.cols() == 0) return;
  const Index expected = setup_.placement == KernelPlacement::range_domain
                             ? static_cast<Index>(setup_.range_dofs.size())
                             : n;
  if (setup_.kernel_basis.rows() != expected || setup_.kernel_gram.rows() != expected) {
    throw DimensionError("TransferOperator: kernel basis has the wrong length");
  }
  const DenseMatrix g = setup_.kernel_basis.transpose() * (setup_.kernel_gram * setup_.kernel_basis);
  if ((g - DenseMatrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() > 1e-10) {
    throw DomainError("TransferOperator: kernel basis is not orthonormal");
  }
}

Vector TransferOperator::solve_volume(const Eigen::Ref<const Vector>& rhs) const {
  return factorization_->solve(rhs);
}

Vector TransferOperator::project_range(const Eigen::Ref<const Vector>& v) const {
  if (setup_.placement != KernelPlacement::range_domain || kernel_gram_basis_.cols() == 0) return v;
  return v - setup_.kernel_basis * (kernel_gram_basis_.transpose() * v);
}

Vector TransferOperator::to_range(const Eigen::Ref<const Vector>& volume) const {
  if (volume.size() != volume_dim()) throw DimensionError("to_range: wrong volume length");
  Vector x = volume;
  if (setup_.placement == KernelPlacement::oversampling_domain && kernel_gram_basis_.cols() > 0) {
    x -= setup_.kernel_basis * (kernel_gram_basis_.transpose() * x);
  }
  Vector r(static_cast<Index>(setup_.range_dofs.size()));
  for (std::size_t k = 0; k < setup_.range_dofs.size(); ++k) {
    r[static_cast<Index>(k)] = x[setup_.range_dofs[k]];
  }
  return project_range(r);
}

Vector TransferOperator::apply(const Eigen::Ref<const Vector>& zeta) const {
  if (zeta.size() != source_dim()) throw DimensionError("TransferOperator: wrong source length");
  Vector b = Vector::Zero(volume_dim());
  for (std::size_t k = 0; k < setup_.source_dofs.size(); ++k) {
    b[setup_.source_dofs[k]] = zeta[static_cast<Index>(k)];
  }
  return to_range(factorization_->solve(b));
}

}  // namespace rrf
