#pragma once

#include "rrf/linalg.hpp"
#include "rrf/random.hpp"
#include "rrf/transfer.hpp"

#include <atomic>
#include <vector>

namespace rrf {

/// Scaling constant of the norm estimator:
/// 1 / (sqrt(2 lambda_min^S) erfinv(eps_testfail^(1/n_t))).
double c_est(int n_t, double eps_testfail, double lambda_min_source);

/// Bound on the effectivity of the norm estimator,
/// [Qinv(N_O/2, eps/n_t) (lambda_max/lambda_min) erfinv(eps^(1/n_t))^-2]^(1/2).
double c_eff(int n_t, double eps_testfail, double lambda_min_source, double lambda_max_source,
             Index n_o);

struct NormEstimate {
  double delta = 0.0;          // c_est * max_test_norm
  double max_test_norm = 0.0;  // max_i ||O r_i||_R
  double c_est = 0.0;
};

/// Probabilistic upper bound of the operator norm from n_t Gaussian test vectors.
/// It fails to bound the norm with probability at most eps_testfail.
NormEstimate norm_estimate(const LinearOperator& op, int n_t, double eps_testfail, RngStream& rng);

struct RangeStep {
  Index basis_size = 0;
  double max_test_norm = 0.0;
  double estimate = 0.0;
  Index evaluations = 0;
};

/// M_R-orthonormal basis produced by the range finder, with its history.
struct RangeBasis {
  OrthonormalBasis basis;
  std::vector<RangeStep> trace;  // one entry per loop test, starting with the empty basis
  Index evaluations = 0;         // operator applications, rejected draws included
  Index rejected = 0;            // draws dropped as numerically dependent
  bool exhausted = false;        // stopped at the rank bound or after repeated rejections
  int n_t = 0;
  double eps_testfail = 0.0;
  Index rank_bound = 0;
  double c_est = 0.0;
  double final_estimate = 0.0;

  Index size() const { return basis.size(); }
};

struct AdaptiveOptions {
  double tol = 1e-4;
  int n_t = 10;
  double eps_algofail = 1e-15;
  Index rank_bound = 0;  // 0 selects min(N_S, N_R)
  int max_consecutive_rejections = 5;
  linalg::Tolerances tolerances = linalg::default_tolerances();
};

/// Adaptive randomized range approximation. Test vectors are drawn first, then basis
/// vectors are added until c_est * max ||t_i||_R <= tol. With probability at least
/// 1 - eps_algofail the returned basis satisfies ||T - P T|| <= tol.
RangeBasis adaptive_randomized_range(const LinearOperator& op, const AdaptiveOptions& options,
                                     RngStream& rng);

/// The result adaptive_randomized_range would have produced with the same random stream
/// and a tolerance tol >= the one `full` was computed with.
RangeBasis adaptive_prefix(const RangeBasis& full, double tol);

/// Span of T applied to n Gaussian vectors, without stopping test.
RangeBasis fixed_rank_range(const LinearOperator& op, Index n, RngStream& rng,
                            const linalg::Tolerances& tol = linalg::default_tolerances());

/// (I - P) O for the M-orthogonal projection P onto a basis.
class ResidualOperator final : public LinearOperator {
 public:
  ResidualOperator(const LinearOperator& op, const OrthonormalBasis& basis);

  const InnerProductSpace& source_space() const override { return op_.source_space(); }
  const InnerProductSpace& range_space() const override { return op_.range_space(); }
  Vector apply(const Eigen::Ref<const Vector>& x) const override;

 private:
  const LinearOperator& op_;
  const OrthonormalBasis& basis_;
};

/// Forwards to another operator and counts applications.
class CountingOperator final : public LinearOperator {
 public:
  explicit CountingOperator(const LinearOperator& op) : op_(op) {}

  const InnerProductSpace& source_space() const override { return op_.source_space(); }
  const InnerProductSpace& range_space() const override { return op_.range_space(); }
  Vector apply(const Eigen::Ref<const Vector>& x) const override {
    count_.fetch_add(1, std::memory_order_relaxed);
    return op_.apply(x);
  }
  Index count() const { return count_.load(); }

 private:
  const LinearOperator& op_;
  mutable std::atomic<Index> count_{0};
};

/// Exact ||T - P T|| in the S -> R operator norm for many bases of one operator.
///
/// Precomputes G = F^T T L_S^-T with M_R = F F^T, M_S = L_S L_S^T and its SVD; for a basis
/// B the error is the largest singular value of (I - Q Q^T) U S with Q = F^T B.
class ProjectionErrorOracle {
 public:
  explicit ProjectionErrorOracle(const LinearOperator& op);
  ProjectionErrorOracle(const DenseMatrix& t, const InnerProductSpace& source,
                        const InnerProductSpace& range);

  double operator()(const OrthonormalBasis& basis) const;

  /// Weighted singular values of T, non-increasing.
  const Vector& singular_values() const { return sigma_; }
  double norm() const { return sigma_.size() ? sigma_[0] : 0.0; }

 private:
  void init(const DenseMatrix& t, const InnerProductSpace& source, const InnerProductSpace& range);

  DenseMatrix range_factor_t_;  // F^T
  DenseMatrix us_;              // U_k S_k
  Vector sigma_;
};

double projection_error(const LinearOperator& op, const OrthonormalBasis& basis);

/// Expected-error bound for n >= 4 random vectors:
/// sqrt(cond_R cond_S) min_{k+p=n, k,p>=2} [(1 + sqrt(k/(p-1))) s_{k+1}
///   + (e sqrt(n)/p) (sum_{j>k} s_j^2)^(1/2)].
/// `sigma` holds s_1, s_2, ... (0-based storage); missing tail values count as zero.
double a_priori_bound(const Vector& sigma, Index n, double cond_range, double cond_source);

/// Ratio of the estimate Delta(T - P T) to the true error.
/// Throws when the true error is below 1e-13 sigma_1.
double effectivity(const LinearOperator& op, const OrthonormalBasis& basis, int n_t,
                   double eps_testfail, RngStream& rng, const ProjectionErrorOracle& oracle);

}  // namespace rrf
