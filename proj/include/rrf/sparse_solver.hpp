#pragma once

#include "rrf/linalg.hpp"

#include <memory>

namespace rrf {

/// Completed sparse LU factorization with partial pivoting (UMFPACK).
///
/// Does not assume symmetry or definiteness, so indefinite Helmholtz systems are fine.
/// A factorization is immutable once built; `solve` only reads it and allocates its own
/// workspace, so one instance can be shared by any number of concurrent solvers.
class Factorization {
 public:
  /// Throws SingularSystemError when a pivot falls below `singular_pivot * max|A|`.
  explicit Factorization(const SparseMatrix& a,
                         double singular_pivot = linalg::default_tolerances().singular_pivot);
  ~Factorization();

  Factorization(const Factorization&) = delete;
  Factorization& operator=(const Factorization&) = delete;
  Factorization(Factorization&&) noexcept;
  Factorization& operator=(Factorization&&) noexcept;

  Index dim() const { return n_; }

  Vector solve(const Eigen::Ref<const Vector>& b) const;
  /// Solves A^T x = b with the same factors.
  Vector solve_transposed(const Eigen::Ref<const Vector>& b) const;

  /// min |U_ii| / max |A_ij| of the computed factors.
  double relative_min_pivot() const { return relative_min_pivot_; }

 private:
  Vector solve_impl(const Eigen::Ref<const Vector>& b, bool transposed) const;

  Index n_ = 0;
  SparseMatrix a_;  // compressed copy; UMFPACK solves need the original arrays
  void* numeric_ = nullptr;
  double relative_min_pivot_ = 0.0;
};

/// Convenience wrapper used throughout: factorize once, share the handle.
std::shared_ptr<const Factorization> factorize(const SparseMatrix& a);

}  // namespace rrf
