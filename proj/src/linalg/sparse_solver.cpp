#include "rrf/sparse_solver.hpp"

#include <umfpack.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace rrf {

namespace {

constexpr const char* kSingularMessage = "near-resonant or singular system";

}  // namespace

Factorization::Factorization(const SparseMatrix& a, double singular_pivot) {
  if (a.rows() != a.cols()) throw DimensionError("factorize: matrix not square");
  n_ = a.rows();
  a_ = a;
  a_.makeCompressed();
  if (n_ == 0) return;

  double max_abs = 0.0;
  for (Index k = 0; k < a_.nonZeros(); ++k) {
    const double v = a_.valuePtr()[k];
    if (!std::isfinite(v)) throw DomainError("factorize: non-finite entry");
    max_abs = std::max(max_abs, std::abs(v));
  }
  if (max_abs == 0.0) throw SingularSystemError(kSingularMessage);

  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  // Unscaled factors, so the diagonal of U is directly comparable with max|A|.
  control[UMFPACK_SCALE] = UMFPACK_SCALE_NONE;

  const int n = static_cast<int>(n_);
  const int* ap = a_.outerIndexPtr();
  const int* ai = a_.innerIndexPtr();
  const double* ax = a_.valuePtr();

  void* symbolic = nullptr;
  int status = umfpack_di_symbolic(n, n, ap, ai, ax, &symbolic, control, info);
  if (status != UMFPACK_OK) {
    if (symbolic) umfpack_di_free_symbolic(&symbolic);
    throw SingularSystemError(std::string("factorize: symbolic analysis failed (status ") +
                              std::to_string(status) + ")");
  }
  status = umfpack_di_numeric(ap, ai, ax, symbolic, &numeric_, control, info);
  umfpack_di_free_symbolic(&symbolic);
  if (status == UMFPACK_WARNING_singular_matrix) {
    umfpack_di_free_numeric(&numeric_);
    throw SingularSystemError(kSingularMessage);
  }
  if (status != UMFPACK_OK) {
    if (numeric_) umfpack_di_free_numeric(&numeric_);
    throw SingularSystemError(std::string("factorize: numeric factorization failed (status ") +
                              std::to_string(status) + ")");
  }

  std::vector<double> udiag(static_cast<std::size_t>(n));
  status = umfpack_di_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr,
                                  nullptr, udiag.data(), nullptr, nullptr, numeric_);
  if (status != UMFPACK_OK) {
    umfpack_di_free_numeric(&numeric_);
    throw SingularSystemError("factorize: cannot read pivots");
  }
  double min_pivot = std::abs(udiag[0]);
  for (double d : udiag) min_pivot = std::min(min_pivot, std::abs(d));
  relative_min_pivot_ = min_pivot / max_abs;
  if (relative_min_pivot_ < singular_pivot) {
    umfpack_di_free_numeric(&numeric_);
    throw SingularSystemError(kSingularMessage);
  }
}

Factorization::~Factorization() {
  if (numeric_) umfpack_di_free_numeric(&numeric_);
}

Factorization::Factorization(Factorization&& other) noexcept
    : n_(other.n_),
      a_(std::move(other.a_)),
      numeric_(other.numeric_),
      relative_min_pivot_(other.relative_min_pivot_) {
  other.numeric_ = nullptr;
  other.n_ = 0;
}

Factorization& Factorization::operator=(Factorization&& other) noexcept {
  if (this != &other) {
    if (numeric_) umfpack_di_free_numeric(&numeric_);
    n_ = other.n_;
    a_ = std::move(other.a_);
    numeric_ = other.numeric_;
    relative_min_pivot_ = other.relative_min_pivot_;
    other.numeric_ = nullptr;
    other.n_ = 0;
  }
  return *this;
}

Vector Factorization::solve(const Eigen::Ref<const Vector>& b) const { return solve_impl(b, false); }

Vector Factorization::solve_transposed(const Eigen::Ref<const Vector>& b) const {
  return solve_impl(b, true);
}

Vector Factorization::solve_impl(const Eigen::Ref<const Vector>& b, bool transposed) const {
  if (b.size() != n_) throw DimensionError("solve: right-hand side has wrong length");
  Vector x(n_);
  if (n_ == 0) return x;
  const Vector rhs = b;  // contiguous copy

  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  control[UMFPACK_SCALE] = UMFPACK_SCALE_NONE;
  std::vector<int> wi(static_cast<std::size_t>(n_));
  std::vector<double> w(static_cast<std::size_t>(5 * n_));

  const int status =
      umfpack_di_wsolve(transposed ? UMFPACK_At : UMFPACK_A, a_.outerIndexPtr(),
                        a_.innerIndexPtr(), a_.valuePtr(), x.data(), rhs.data(), numeric_, control,
                        info, wi.data(), w.data());
  if (status != UMFPACK_OK) throw SingularSystemError(kSingularMessage);
  return x;
}

std::shared_ptr<const Factorization> factorize(const SparseMatrix& a) {
  return std::make_shared<const Factorization>(a);
}

}  // namespace rrf
