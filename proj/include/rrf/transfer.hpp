#pragma once

#include "rrf/fem2d.hpp"
#include "rrf/linalg.hpp"
#include "rrf/sparse_solver.hpp"

#include <memory>
#include <vector>

namespace rrf {

/// Linear map between two inner product spaces, applied matrix-free.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual const InnerProductSpace& source_space() const = 0;
  virtual const InnerProductSpace& range_space() const = 0;
  virtual Vector apply(const Eigen::Ref<const Vector>& x) const = 0;

  Index source_dim() const { return source_space().dim(); }
  Index range_dim() const { return range_space().dim(); }
};

/// Explicit matrix between two spaces.
class MatrixOperator final : public LinearOperator {
 public:
  MatrixOperator(DenseMatrix matrix, InnerProductSpace source, InnerProductSpace range);
  /// Matrix with Euclidean source and range.
  explicit MatrixOperator(DenseMatrix matrix);

  const InnerProductSpace& source_space() const override { return source_; }
  const InnerProductSpace& range_space() const override { return range_; }
  Vector apply(const Eigen::Ref<const Vector>& x) const override;
  const DenseMatrix& matrix() const { return matrix_; }

 private:
  DenseMatrix matrix_;
  InnerProductSpace source_;
  InnerProductSpace range_;
};

/// Column j is op.apply(e_j). Refuses source dimensions above `max_source_dim`.
DenseMatrix assemble_dense(const LinearOperator& op, Index max_source_dim = 10000);

/// Where the kernel of the PDE operator is removed.
enum class KernelPlacement {
  none,                 // plain restriction of the harmonic extension
  range_domain,         // project after restricting to the range DOFs
  oversampling_domain,  // project on the whole volume, then restrict
};

/// v - sum_k (v, eta_k)_Q eta_k. `eta` columns must be Q-orthonormal.
Vector kernel_projection(const Eigen::Ref<const Vector>& v, const Eigen::Ref<const DenseMatrix>& eta,
                         const SparseMatrix& q);

struct TransferSetup {
  SparseMatrix system;           // operator with identity rows on Dirichlet and Gamma_out DOFs
  std::vector<int> source_dofs;  // volume index of each source coefficient
  std::vector<int> range_dofs;   // volume index of each range coefficient
  InnerProductSpace source_space;
  InnerProductSpace range_space;
  KernelPlacement placement = KernelPlacement::none;
  // Kernel basis and the Gram of its quotient inner product. Lives on the range DOFs for
  // range_domain and on all volume DOFs for oversampling_domain.
  DenseMatrix kernel_basis;
  SparseMatrix kernel_gram;
};

/// Maps Dirichlet data on Gamma_out to the kernel-projected restriction of the harmonic
/// extension. Immutable after construction; apply may be called concurrently.
class TransferOperator final : public LinearOperator {
 public:
  explicit TransferOperator(TransferSetup setup);
  /// Reuses an existing factorization of `setup.system`.
  TransferOperator(TransferSetup setup, std::shared_ptr<const Factorization> factorization);

  const InnerProductSpace& source_space() const override { return setup_.source_space; }
  const InnerProductSpace& range_space() const override { return setup_.range_space; }
  Vector apply(const Eigen::Ref<const Vector>& zeta) const override;

  /// Volume solution of the constrained system with the given right-hand side.
  Vector solve_volume(const Eigen::Ref<const Vector>& rhs) const;
  /// Restriction of a volume vector to the range DOFs, with the kernel projection applied.
  Vector to_range(const Eigen::Ref<const Vector>& volume) const;
  /// Kernel projection on range coefficients (identity unless placement is range_domain).
  Vector project_range(const Eigen::Ref<const Vector>& v) const;

  Index volume_dim() const { return setup_.system.rows(); }
  KernelPlacement placement() const { return setup_.placement; }
  const std::vector<int>& source_dofs() const { return setup_.source_dofs; }
  const std::vector<int>& range_dofs() const { return setup_.range_dofs; }
  const Factorization& factorization() const { return *factorization_; }
  const DenseMatrix& kernel_basis() const { return setup_.kernel_basis; }

 private:
  void validate() const;

  TransferSetup setup_;
  std::shared_ptr<const Factorization> factorization_;
  DenseMatrix kernel_gram_basis_;  // Q * eta
};

/// The rectangle (-L, L) x (0, W) with Gamma_out = {x = +-L}, homogeneous Neumann on the
/// rest, and the range on the interface {x = 0}. Both spaces carry the L2 trace product.
struct InterfaceProblemConfig {
  double half_length = 1.0;  // L
  double width = 1.0;        // W
  int inverse_h = 40;
  double kappa = 0.0;  // Helmholtz wave number, 0 for Laplace
};

struct InterfaceProblem {
  InterfaceProblemConfig config;
  std::shared_ptr<const fem::RectMesh> mesh;
  std::shared_ptr<const TransferOperator> op;
};

/// Mesh only, for counting.
fem::RectMesh interface_problem_mesh(const InterfaceProblemConfig& config);

InterfaceProblem build_interface_problem(const InterfaceProblemConfig& config);

}  // namespace rrf
