#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace rrf {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

// Error categories shared by all modules.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct SingularSystemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace linalg {

// Accuracy targets for the dense kernels; overridable through the experiment config.
struct Tolerances {
  double reorthogonalize_ratio = 0.1;  // project again if the norm dropped below this fraction
  double drop_ratio = 1e-14;           // reject if the final norm is below this fraction
  double singular_pivot = 1e-14;       // relative to max|A|
};

Tolerances& default_tolerances();

bool all_finite(const Eigen::Ref<const DenseMatrix>& a);

struct SvdResult {
  DenseMatrix u;
  Vector sigma;  // non-increasing
  DenseMatrix vt;
};

/// Thin SVD, A = U diag(sigma) V^T.
SvdResult dense_svd(const Eigen::Ref<const DenseMatrix>& a);

/// Singular values only, non-increasing.
Vector singular_values(const Eigen::Ref<const DenseMatrix>& a);

struct EigenResult {
  Vector values;        // non-increasing
  DenseMatrix vectors;  // columns, orthonormal w.r.t. the B-inner product
};

/// Standard symmetric eigenproblem A z = lambda z by Householder tridiagonalization
/// followed by implicit QL with Wilkinson shifts. Values non-increasing.
EigenResult symmetric_eig(const Eigen::Ref<const DenseMatrix>& a, bool compute_vectors = true);

/// Generalized symmetric-definite eigenproblem A z = lambda M z through the Cholesky
/// reduction M = L L^T, A~ = L^-1 A L^-T. Eigenvectors satisfy z_i^T M z_j = delta_ij.
EigenResult generalized_symmetric_eig(const Eigen::Ref<const DenseMatrix>& a,
                                      const Eigen::Ref<const DenseMatrix>& m);

struct ExtremalEigenvalues {
  double min;
  double max;
};

/// Certified bracket of the extremal eigenvalues of an SPD matrix: `min` is rounded down
/// and `max` rounded up by the a posteriori error bound of the eigensolver used.
/// `kernel_dim` smallest eigenvalues are skipped (semidefinite Gram matrices whose
/// kernel is known, e.g. energy products that vanish on constants).
ExtremalEigenvalues gram_extremal_eigenvalues(const SparseMatrix& m, int kernel_dim = 0);
ExtremalEigenvalues gram_extremal_eigenvalues(const Eigen::Ref<const DenseMatrix>& m,
                                              int kernel_dim = 0);

/// Size up to which the extremal eigenvalues are obtained from a dense eigensolve.
inline constexpr Index kDenseEigenThreshold = 2000;

}  // namespace linalg

/// A finite dimensional Hilbert space R^N with inner product (u, v) = u^T M v.
///
/// The Gram matrix is symmetric positive definite, or positive semidefinite with a
/// known kernel dimension (energy products on floating subdomains). Derived data
/// (extremal eigenvalues, dense factor) is computed lazily and cached; the object is
/// safe for concurrent readers.
class InnerProductSpace {
 public:
  InnerProductSpace() = default;
  explicit InnerProductSpace(SparseMatrix gram, int kernel_dim = 0);

  static InnerProductSpace euclidean(Index n);

  Index dim() const { return gram_.rows(); }
  int kernel_dim() const { return kernel_dim_; }
  const SparseMatrix& gram() const { return gram_; }

  double inner(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v) const;
  double norm(const Eigen::Ref<const Vector>& v) const;
  Vector apply_gram(const Eigen::Ref<const Vector>& v) const;

  double lambda_min() const;
  double lambda_max() const;
  double condition() const { return lambda_max() / lambda_min(); }

  /// Dense square factor F with M = F F^T (lower-triangular Cholesky factor when M is
  /// definite; pivoted LDL^T based factor when semidefinite).
  const DenseMatrix& dense_factor() const;

 private:
  struct Cache;
  SparseMatrix gram_;
  int kernel_dim_ = 0;
  std::shared_ptr<Cache> cache_;
};

/// Ordered M-orthonormal vectors, with M·b cached for cheap inner products.
class OrthonormalBasis {
 public:
  OrthonormalBasis() = default;
  explicit OrthonormalBasis(Index dim) : vectors_(dim, 0), gram_vectors_(dim, 0) {}

  Index dim() const { return vectors_.rows(); }
  Index size() const { return vectors_.cols(); }
  bool empty() const { return size() == 0; }

  const DenseMatrix& vectors() const { return vectors_; }
  /// Columns M·b_i.
  const DenseMatrix& gram_vectors() const { return gram_vectors_; }

  /// Coefficients (b_i, v)_M.
  Vector coefficients(const Eigen::Ref<const Vector>& v) const;
  /// v - P v with P the M-orthogonal projection onto the span.
  Vector project_out(const Eigen::Ref<const Vector>& v) const;
  void project_out_in_place(Eigen::Ref<Vector> v) const;

  /// max_{i,j} |(b_i, b_j)_M - delta_ij|.
  double orthonormality_residual() const;

  /// Basis of the first k vectors.
  OrthonormalBasis prefix(Index k) const;

  void append_unchecked(const Eigen::Ref<const Vector>& b, const Eigen::Ref<const Vector>& mb);

 private:
  DenseMatrix vectors_;
  DenseMatrix gram_vectors_;
};

enum class ExtendResult { extended, rejected };

/// Gram-Schmidt with re-iteration: project v onto the M-orthogonal complement of the
/// basis, repeat while the norm drops below `reorthogonalize_ratio` of the previous
/// norm, reject when the final norm is below `drop_ratio` times the incoming norm.
ExtendResult orthonormalize_extend(OrthonormalBasis& basis, const Eigen::Ref<const Vector>& v,
                                   const InnerProductSpace& space,
                                   const linalg::Tolerances& tol = linalg::default_tolerances());

}  // namespace rrf
