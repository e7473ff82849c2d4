#include "rrf/oracle.hpp"
#include "rrf/random.hpp"
#include "rrf/transfer.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace rrf;

namespace {

InnerProductSpace random_space(Index n, std::uint64_t seed) {
  RngStream rng(seed, 0);
  DenseMatrix g(n, n);
  for (Index j = 0; j < n; ++j) g.col(j) = rng.normal_vector(n);
  const DenseMatrix m = g * g.transpose() + DenseMatrix::Identity(n, n);
  return InnerProductSpace(SparseMatrix(m.sparseView()));
}

DenseMatrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  RngStream rng(seed, 1);
  DenseMatrix a(rows, cols);
  for (Index j = 0; j < cols; ++j) a.col(j) = rng.normal_vector(rows);
  return a;
}

}  // namespace

TEST_CASE("transfer eigenproblem: trivial cases") {
  const InnerProductSpace e3 = InnerProductSpace::euclidean(3);
  const oracle::SpectralData id = oracle::transfer_eigenproblem(DenseMatrix::Identity(3, 3), e3, e3);
  for (Index i = 0; i < 3; ++i) CHECK(id.lambda[i] == doctest::Approx(1.0));
  DenseMatrix d = DenseMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 3.0;
  const InnerProductSpace e2 = InnerProductSpace::euclidean(2);
  const oracle::SpectralData s = oracle::transfer_eigenproblem(d, e2, e2);
  CHECK(s.lambda[0] == doctest::Approx(9.0));
  CHECK(s.lambda[1] == doctest::Approx(1.0));
  const oracle::SpectralData w = oracle::weighted_svd(DenseMatrix::Identity(3, 3), e3, e3);
  for (Index i = 0; i < 3; ++i) CHECK(w.sigma[i] == doctest::Approx(1.0));
}

TEST_CASE("eigenproblem and weighted SVD agree on random instances") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const InnerProductSpace source = random_space(4, 10 + seed);
    const InnerProductSpace range = random_space(6, 20 + seed);
    const DenseMatrix t = random_matrix(6, 4, seed);
    const oracle::SpectralData eig = oracle::transfer_eigenproblem(t, source, range);
    const oracle::SpectralData svd = oracle::weighted_svd(t, source, range);
    const DenseMatrix ms = source.gram(), mr = range.gram();
    for (Index j = 0; j < 4; ++j) {
      CHECK(svd.sigma[j] == doctest::Approx(eig.sigma[j]).epsilon(1e-8));
      const Vector z = eig.zeta.col(j);
      const Vector res = t.transpose() * mr * t * z - eig.lambda[j] * ms * z;
      CHECK(res.norm() <= 1e-9 * eig.lambda[0]);
    }
    for (const oracle::SpectralData* s : {&eig, &svd}) {
      const DenseMatrix g = s->phi.transpose() * mr * s->phi;
      const DenseMatrix z = s->zeta.transpose() * ms * s->zeta;
      for (Index i = 0; i < 4; ++i) {
        for (Index j = 0; j < 4; ++j) {
          CHECK(std::abs(g(i, j) - (i == j ? s->lambda[j] : 0.0)) <= 1e-8 * s->lambda[0]);
          CHECK(std::abs(z(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-8);
        }
      }
    }
    const OrthonormalBasis b = oracle::optimal_basis(svd, 3, range);
    CHECK(b.orthonormality_residual() <= 1e-8);
  }
}

TEST_CASE("eigenvalues are non-negative and the floor clamps noise") {
  const InnerProductSpace e = InnerProductSpace::euclidean(5);
  DenseMatrix t = DenseMatrix::Zero(5, 5);
  t(0, 0) = 1.0;
  t(1, 1) = 1e-6;
  t(2, 2) = 1e-8;
  const oracle::SpectralData s = oracle::transfer_eigenproblem(t, e, e);
  for (Index i = 0; i < 5; ++i) CHECK(s.lambda[i] >= 0.0);
  CHECK(s.sigma[1] == doctest::Approx(1e-6).epsilon(1e-6));
  CHECK(s.lambda[2] == 0.0);
  // The SVD route applies the floor to sigma itself.
  const oracle::SpectralData w = oracle::weighted_svd(t, e, e);
  CHECK(w.sigma[2] == doctest::Approx(1e-8).epsilon(1e-6));
}

TEST_CASE("analytic singular values") {
  CHECK(oracle::analytic_sigma(1, 1.0, 1.0) == doctest::Approx(0.70710678118654752).epsilon(1e-15));
  CHECK(oracle::analytic_sigma(2, 1.0, 1.0) == doctest::Approx(1.0 / (std::sqrt(2.0) * 11.591953275521519)).epsilon(1e-13));
  CHECK(oracle::analytic_sigma(2, 1.0, 1.0) == doctest::Approx(0.061009).epsilon(1e-4));
  CHECK(oracle::analytic_sigma(3, 1.0, 1.0) == doctest::Approx(2.641e-3).epsilon(1e-3));
  CHECK_THROWS_AS(oracle::analytic_sigma(0, 1.0, 1.0), DomainError);
}

TEST_CASE("discrete spectrum converges to the analytic one") {
  std::vector<Vector> errors;
  for (int inverse_h : {20, 40, 80}) {
    const InterfaceProblem p = build_interface_problem({1.0, 1.0, inverse_h, 0.0});
    const oracle::SpectralData s =
        oracle::weighted_svd(assemble_dense(*p.op), p.op->source_space(), p.op->range_space());
    Vector e(8);
    for (int i = 1; i <= 8; ++i) {
      const double exact = oracle::analytic_sigma(i, 1.0, 1.0);
      e[i - 1] = std::abs(s.sigma[i - 1] - exact) / exact;
    }
    errors.push_back(e);
  }
  // The constant mode is exact on every mesh.
  for (const Vector& e : errors) CHECK(e[0] <= 1e-12);
  for (Index i = 1; i < 8; ++i) {
    CAPTURE(i);
    CHECK(errors[1][i] < errors[0][i]);
    CHECK(errors[2][i] < errors[1][i]);
  }
}

TEST_CASE("spectrum CSV") {
  oracle::SpectralData s;
  s.lambda = Vector::Constant(2, 4.0);
  s.lambda[1] = 1e-6;
  s.sigma = s.lambda.cwiseSqrt();
  std::ostringstream os;
  oracle::write_spectrum_csv(os, s);
  CHECK(os.str() == "index,lambda,sigma\n1,4,2\n2,1.000000000000e-06,0.001\n");
}
