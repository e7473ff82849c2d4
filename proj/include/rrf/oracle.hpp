#pragma once

#include "rrf/linalg.hpp"

#include <iosfwd>

namespace rrf::oracle {

/// Spectral decomposition of a transfer operator between weighted spaces.
struct SpectralData {
  Vector lambda;       // eigenvalues of T^t M_R T z = lambda M_S z, non-increasing, >= 0
  Vector sigma;        // sqrt(lambda)
  DenseMatrix zeta;    // source vectors, M_S-orthonormal columns
  DenseMatrix phi;     // T zeta_j; (phi_i, phi_j)_R = delta_ij lambda_j
};

/// Eigenvalues below this fraction of the largest one are reported as zero. The SVD route
/// resolves sigma itself to this relative accuracy and applies the floor to sigma.
inline constexpr double kNoiseFloor = 1e-14;

/// Dense generalized eigenproblem T^t M_R T zeta = lambda M_S zeta.
SpectralData transfer_eigenproblem(const DenseMatrix& t, const InnerProductSpace& source,
                                   const InnerProductSpace& range);

/// SVD of the congruent matrix F^T T L_S^-T with M_R = F F^T and M_S = L_S L_S^T.
SpectralData weighted_svd(const DenseMatrix& t, const InnerProductSpace& source,
                          const InnerProductSpace& range);

/// First n columns of phi scaled to unit R-norm; columns with sigma = 0 are skipped.
OrthonormalBasis optimal_basis(const SpectralData& data, Index n, const InnerProductSpace& range);

/// 1 / (sqrt(2) cosh((i - 1) pi L / W)), the singular values of the interface problem.
double analytic_sigma(int i, double half_length, double width);

/// CSV with columns index, lambda, sigma (1-based index).
void write_spectrum_csv(std::ostream& os, const SpectralData& data);

}  // namespace rrf::oracle
