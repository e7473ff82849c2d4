#include "rrf/fem2d.hpp"
#include "rrf/random.hpp"
#include "rrf/sparse_solver.hpp"

#include <doctest.h>

#include <cmath>

using namespace rrf;
using namespace rrf::fem;

namespace {

RectMesh unit_square(int inverse_h, ElementKind kind = ElementKind::q1, BoundarySpec bc = {}) {
  return RectMesh({0.0, 1.0, 0.0, 1.0}, 1.0 / inverse_h, kind, bc);
}

double max_abs_diff(const SparseMatrix& a, const SparseMatrix& b) {
  return DenseMatrix(a - b).cwiseAbs().maxCoeff();
}

// L2 error of the Q1 interpolant of nodal values u_h against u(x) = x (1 - x), by 3-point
// Gauss quadrature on every square.
double l2_error_q1(const RectMesh& mesh, const Vector& uh) {
  const double g[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  const double w[3] = {5.0 / 9, 8.0 / 9, 5.0 / 9};
  const double h = mesh.h();
  double sum = 0.0;
  for (int j = 0; j < mesh.ny(); ++j) {
    for (int i = 0; i < mesh.nx(); ++i) {
      const double u00 = uh[mesh.corner_node(i, j)], u10 = uh[mesh.corner_node(i + 1, j)];
      const double u01 = uh[mesh.corner_node(i, j + 1)], u11 = uh[mesh.corner_node(i + 1, j + 1)];
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          const double s = 0.5 * (g[a] + 1), t = 0.5 * (g[b] + 1);
          const double x = (i + s) * h;
          const double v = u00 * (1 - s) * (1 - t) + u10 * s * (1 - t) + u01 * (1 - s) * t + u11 * s * t;
          const double e = v - x * (1 - x);
          sum += w[a] * w[b] * e * e * h * h / 4;
        }
      }
    }
  }
  return std::sqrt(sum);
}

}  // namespace

TEST_CASE("mesh counts") {
  const RectMesh one = unit_square(1);
  CHECK(one.num_nodes() == 4);
  CHECK(one.num_squares() == 1);

  BoundarySpec bc;
  bc.left = bc.right = BoundaryTag::gamma_out;
  const RectMesh ex1({-1.0, 1.0, 0.0, 1.0}, 1.0 / 160, ElementKind::q1, bc);
  CHECK(ex1.num_nodes() == 51681);
  CHECK(ex1.nodes_with_tag(BoundaryTag::gamma_out).size() == 322);
  CHECK(ex1.nodes_on_line(true, 0.0).size() == 161);

  const RectMesh ex4 = unit_square(200, ElementKind::p1_crisscross, BoundarySpec::all(BoundaryTag::sigma_d));
  CHECK(ex4.num_nodes() == 80401);
  CHECK(ex4.nodes_with_tag(BoundaryTag::sigma_d).size() == 800);
}

TEST_CASE("node count formulas on random grids") {
  RngStream rng(8, 0);
  for (int k = 0; k < 20; ++k) {
    const int nx = 1 + static_cast<int>(rng.uniform() * 30);
    const int ny = 1 + static_cast<int>(rng.uniform() * 30);
    const RectMesh q({0.0, double(nx), 0.0, double(ny)}, 1.0, ElementKind::q1);
    const RectMesh p({0.0, double(nx), 0.0, double(ny)}, 1.0, ElementKind::p1_crisscross);
    CHECK(q.num_nodes() == (nx + 1) * (ny + 1));
    CHECK(p.num_nodes() == (nx + 1) * (ny + 1) + nx * ny);
  }
}

TEST_CASE("boundary tags") {
  BoundarySpec bc;
  bc.left = BoundaryTag::sigma_d;
  bc.right = BoundaryTag::gamma_out;
  const RectMesh m = unit_square(4, ElementKind::q1, bc);
  // Corners: Dirichlet beats Gamma_out beats Neumann.
  CHECK(m.tag(m.corner_node(0, 0)) == BoundaryTag::sigma_d);
  CHECK(m.tag(m.corner_node(4, 4)) == BoundaryTag::gamma_out);
  CHECK(m.tag(m.corner_node(2, 0)) == BoundaryTag::sigma_n);
  CHECK(m.tag(m.corner_node(2, 2)) == BoundaryTag::interior);
  CHECK(m.nodes_with_tag(BoundaryTag::sigma_d).size() == 5);
  CHECK(m.nodes_with_tag(BoundaryTag::gamma_out).size() == 5);
}

TEST_CASE("non-conforming mesh size is rejected") {
  CHECK_THROWS_AS(RectMesh({0.0, 1.0, 0.0, 1.0}, 0.3, ElementKind::q1), DomainError);
}

TEST_CASE("single square Laplace element matrix") {
  const RectMesh m = unit_square(1);
  const DenseMatrix a = assemble_system(m, PdeSpec::laplace());
  // nodes: 0 (0,0), 1 (1,0), 2 (0,1), 3 (1,1)
  for (int i = 0; i < 4; ++i) CHECK(a(i, i) == doctest::Approx(2.0 / 3));
  CHECK(a(0, 3) == doctest::Approx(-1.0 / 3));
  CHECK(a(1, 2) == doctest::Approx(-1.0 / 3));
  CHECK(a(0, 1) == doctest::Approx(-1.0 / 6));
  CHECK(a(0, 2) == doctest::Approx(-1.0 / 6));
  CHECK((a * Vector::Ones(4)).norm() <= 1e-14);
}

TEST_CASE("PDE variants reduce to Laplace") {
  const RectMesh m = unit_square(5);
  const SparseMatrix lap = assemble_system(m, PdeSpec::laplace());
  CHECK(max_abs_diff(assemble_system(m, PdeSpec::helmholtz(0.0)), lap) == 0.0);
  CHECK(max_abs_diff(assemble_system(m, PdeSpec::diffusion({1.0, {}})), lap) <= 1e-15);
  CHECK_THROWS_AS(PdeSpec::helmholtz(-1.0).validate(), DomainError);
  CHECK_THROWS_AS(PdeSpec::diffusion({0.0, {}}).validate(), DomainError);
}

TEST_CASE("helmholtz operator subtracts the mass matrix") {
  const RectMesh m = unit_square(3);
  const SparseMatrix k = assemble_operator(m, PdeSpec::laplace());
  const SparseMatrix h = assemble_operator(m, PdeSpec::helmholtz(2.0));
  CHECK(max_abs_diff(h, k - 4.0 * assemble_mass(m)) <= 1e-14);
  CHECK((assemble_mass(m) * Vector::Ones(m.num_nodes())).sum() == doctest::Approx(1.0));
}

TEST_CASE("constrained rows are identity rows, the rest is symmetric") {
  BoundarySpec bc;
  bc.left = BoundaryTag::sigma_d;
  bc.right = BoundaryTag::gamma_out;
  const RectMesh m = unit_square(4, ElementKind::p1_crisscross, bc);
  const DenseMatrix a = assemble_system(m, PdeSpec::laplace());
  for (Index r = 0; r < m.num_nodes(); ++r) {
    const BoundaryTag t = m.tag(r);
    if (t == BoundaryTag::sigma_d || t == BoundaryTag::gamma_out) {
      CHECK(a.row(r).cwiseAbs().sum() == 1.0);
      CHECK(a(r, r) == 1.0);
    } else {
      for (Index c = 0; c < m.num_nodes(); ++c) {
        const BoundaryTag tc = m.tag(c);
        if (tc == BoundaryTag::sigma_d || tc == BoundaryTag::gamma_out) continue;
        CHECK(a(r, c) == doctest::Approx(a(c, r)));
      }
    }
  }
  const DenseMatrix k = assemble_operator(m, PdeSpec::laplace());
  CHECK(Eigen::SelfAdjointEigenSolver<DenseMatrix>(k).eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("interface L2 mass matrices") {
  const RectMesh m = unit_square(2);
  const std::vector<Segment> seg = {{{0.0, 0.0}, {0.0, 1.0}}};
  const std::vector<int> dofs = segment_nodes(m, seg);
  REQUIRE(dofs.size() == 3);
  const DenseMatrix mass = assemble_interface_mass(m, seg, dofs);
  const double h = 0.5;
  DenseMatrix expected(3, 3);
  expected << 2, 1, 0, 1, 4, 1, 0, 1, 2;
  expected *= h / 6;
  CHECK((mass - expected).cwiseAbs().maxCoeff() <= 1e-15);

  const RectMesh single = unit_square(1);
  const std::vector<Segment> edge = {{{0.0, 0.0}, {1.0, 0.0}}};
  const DenseMatrix two = assemble_interface_mass(single, edge, segment_nodes(single, edge));
  CHECK(two(0, 0) == doctest::Approx(2.0 / 6));
  CHECK(two(0, 1) == doctest::Approx(1.0 / 6));

  const std::vector<Segment> diagonal = {{{0.0, 0.0}, {1.0, 1.0}}};
  CHECK_THROWS_AS(assemble_interface_mass(m, diagonal, dofs), DomainError);
}

TEST_CASE("interface mass lambda_min scales with h") {
  double previous = 0.0;
  for (int inverse_h : {10, 20, 40}) {
    const RectMesh m = unit_square(inverse_h);
    const std::vector<Segment> seg = {{{0.5, 0.0}, {0.5, 1.0}}};
    const InnerProductSpace s = assemble_interface_l2(m, seg, segment_nodes(m, seg));
    if (previous > 0.0) CHECK(s.lambda_min() / previous == doctest::Approx(0.5).epsilon(0.1));
    previous = s.lambda_min();
  }
}

TEST_CASE("energy product") {
  const RectMesh m = unit_square(1);
  const std::vector<int> all = {0, 1, 2, 3};
  const Box region{0.0, 1.0, 0.0, 1.0};
  const InnerProductSpace e = assemble_energy_product(m, region, PdeSpec::laplace(), all, 1);
  CHECK(max_abs_diff(e.gram(), assemble_operator(m, PdeSpec::laplace())) <= 1e-15);
  CHECK(e.norm(Vector::Ones(4)) == doctest::Approx(0.0));
  const InnerProductSpace big =
      assemble_energy_product(m, region, PdeSpec::diffusion({1e5, {}}), all, 1);
  CHECK(max_abs_diff(big.gram(), 1e5 * e.gram()) <= 1e-9);
  CHECK_THROWS_AS(assemble_energy_product(m, region, PdeSpec::laplace(), {}, 0), DomainError);
}

TEST_CASE("piecewise constant fields and their averages") {
  PiecewiseConstant k{1.0, {{{0.0, 0.5, 0.0, 1.0}, 3.0}}};
  CHECK(k({0.25, 0.5}) == 3.0);
  CHECK(k({0.75, 0.5}) == 1.0);
  CHECK(k.average({0.0, 1.0, 0.0, 1.0}) == doctest::Approx(2.0));
  CHECK(k.average({0.25, 0.75, 0.0, 1.0}) == doctest::Approx(2.0));
  CHECK(k.average({0.6, 0.9, 0.2, 0.4}) == doctest::Approx(1.0));
  // A later box overrides an earlier one.
  PiecewiseConstant layered{1.0, {{{0.0, 1.0, 0.0, 1.0}, 2.0}, {{0.5, 1.0, 0.0, 1.0}, 4.0}}};
  CHECK(layered.average({0.0, 1.0, 0.0, 1.0}) == doctest::Approx(3.0));
  CHECK(layered({0.75, 0.5}) == 4.0);
  CHECK(layered.min_value() == 1.0);
  CHECK(layered.max_value() == 4.0);
  CHECK_THROWS_AS(k.average({0.5, 0.5, 0.0, 1.0}), DomainError);
  // A box edge one ulp off a square edge leaves no sliver.
  const double edge = std::nextafter(0.9, 1.0);
  const PiecewiseConstant f{0.0, {{{edge, 1.0, 0.0, 1.0}, 1.0}}};
  CHECK(f.average({0.8, 0.9, 0.0, 0.1}) == 0.0);
  CHECK(f.average({0.9, 1.0, 0.0, 0.1}) == 1.0);
  const PiecewiseConstant g{0.0, {{{0.0, std::nextafter(0.9, 0.0), 0.0, 1.0}, 1.0}}};
  CHECK(g.average({0.9, 1.0, 0.0, 0.1}) == 0.0);
}

TEST_CASE("load vector integrates the source") {
  const RectMesh m = unit_square(8, ElementKind::p1_crisscross);
  CHECK(assemble_load(m, {1.0, {}}).sum() == doctest::Approx(1.0));
  const PiecewiseConstant half{0.0, {{{0.0, 0.5, 0.0, 1.0}, 2.0}}};
  CHECK(assemble_load(m, half).sum() == doctest::Approx(1.0));
}

TEST_CASE("submatrix and constrain_rows") {
  DenseMatrix a(3, 3);
  a << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  const DenseMatrix s = submatrix(a.sparseView(), {0, 2}, {1, 2});
  CHECK(s(0, 0) == 2);
  CHECK(s(1, 1) == 9);
  const DenseMatrix c = constrain_rows(a.sparseView(), {1});
  CHECK(c(1, 0) == 0);
  CHECK(c(1, 1) == 1);
  CHECK(c(0, 1) == 2);
  CHECK_THROWS_AS(constrain_rows(a.sparseView(), {3}), DimensionError);
}

TEST_CASE("Q1 discretization converges at second order in L2") {
  BoundarySpec bc;
  bc.left = bc.right = BoundaryTag::sigma_d;
  double errors[3];
  const int levels[3] = {8, 16, 32};
  for (int l = 0; l < 3; ++l) {
    const RectMesh m = unit_square(levels[l], ElementKind::q1, bc);
    const SparseMatrix a = assemble_system(m, PdeSpec::laplace());
    Vector rhs = assemble_load(m, {2.0, {}});
    for (int node : m.nodes_with_tag(BoundaryTag::sigma_d)) rhs[node] = 0.0;
    const Factorization f(a);
    errors[l] = l2_error_q1(m, f.solve(rhs));
  }
  CHECK(std::log2(errors[0] / errors[1]) >= 1.8);
  CHECK(std::log2(errors[1] / errors[2]) >= 1.8);
}
