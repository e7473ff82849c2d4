#include "rrf/gfem.hpp"
#include "rrf/oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace rrf;
using namespace rrf::gfem;

namespace {

const GfemProblem& poisson_20() {
  static const GfemProblem p = build_problem(poisson_config(20));
  return p;
}

// 3 x 3 patches of size 0.5 on a 1/h = 8 mesh.
GfemConfig coarse_config() {
  GfemConfig c = poisson_config(8);
  c.patch_size = 0.5;
  c.patch_step = 0.25;
  c.oversampling = 0.25;
  return c;
}

}  // namespace

TEST_CASE("patch layout of the full-size geometry") {
  const GfemConfig c = poisson_config(200);
  const fem::RectMesh mesh(c.domain, 1.0 / 200, fem::ElementKind::p1_crisscross,
                           fem::BoundarySpec::all(fem::BoundaryTag::sigma_d));
  const std::vector<GfemPatch> patches = build_patches(c, mesh);
  REQUIRE(patches.size() == 81);
  const GfemPatch& interior = patches[4 * 9 + 4];
  CHECK(interior.omega_star.width() == doctest::Approx(0.4));
  CHECK(interior.omega_star.height() == doctest::Approx(0.4));
  CHECK_FALSE(interior.touches_dirichlet);
  CHECK(interior.star_mesh->nodes_with_tag(fem::BoundaryTag::gamma_out).size() == 320);
  // Crisscross range space on a 0.2 x 0.2 patch: corners and centres.
  CHECK(interior.range_global.size() == 41 * 41 + 40 * 40);
  const GfemPatch& corner = patches.front();
  CHECK(corner.omega_star.width() == doctest::Approx(0.3));
  CHECK(corner.omega_star.height() == doctest::Approx(0.3));
  CHECK(corner.touches_dirichlet);
}

TEST_CASE("one-dimensional partition of unity") {
  const PartitionOfUnity1d two({{0.0, 0.6}, {0.4, 1.0}}, 0.0, 1.0);
  CHECK(two(0, 0.2) == 1.0);
  CHECK(two(1, 0.2) == 0.0);
  CHECK(two(0, 0.5) == doctest::Approx(0.5));
  CHECK(two(1, 0.45) == doctest::Approx(0.25));
  for (double x = 0.0; x <= 1.0; x += 0.01) CHECK(two(0, x) + two(1, x) == doctest::Approx(1.0).epsilon(1e-15));

  const PartitionOfUnity1d one({{0.0, 1.0}}, 0.0, 1.0);
  for (double x : {0.0, 0.3, 1.0}) CHECK(one(0, x) == 1.0);
  CHECK_THROWS_AS(PartitionOfUnity1d({{0.0, 0.4}, {0.5, 1.0}}, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(PartitionOfUnity1d({{0.1, 1.0}}, 0.0, 1.0), DomainError);
}

TEST_CASE("tensor partition of unity") {
  const GfemConfig c = poisson_config(100);
  const PartitionOfUnity1d px = axis_partition(c, true), py = axis_partition(c, false);
  CHECK(px.size() == 9);
  // (0.45, 0.55) lies in the overlap of two intervals on each axis.
  double sum = 0.0;
  int covering = 0;
  for (std::size_t i = 0; i < px.size(); ++i) {
    for (std::size_t j = 0; j < py.size(); ++j) {
      const double w = px(i, 0.45) * py(j, 0.55);
      if (w > 0.0) ++covering;
      CHECK(w >= 0.0);
      CHECK(w <= 1.0);
      sum += w;
    }
  }
  CHECK(covering == 4);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));

  const PouCheck check = check_partition_of_unity(poisson_20());
  CHECK(check.max_sum_deviation <= 1e-12);
  CHECK(check.min_weight >= 0.0);
  CHECK(check.max_weight <= 1.0);
}

TEST_CASE("tolerance cascade") {
  const GfemProblem& p = poisson_20();
  const std::vector<CascadeEntry> a = tolerance_cascade(1e-2, p);
  const std::vector<CascadeEntry> b = tolerance_cascade(5e-3, p);
  REQUIRE(a.size() == 81);
  CHECK(p.overlap_count == 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].relative < 1e-2 / 36);
    CHECK(b[i].relative == doctest::Approx(0.5 * a[i].relative).epsilon(1e-15));
    CHECK(b[i].operator_tol == doctest::Approx(0.5 * a[i].operator_tol).epsilon(1e-15));
  }

  GfemConfig single = poisson_config(10);
  single.patch_size = 1.0;
  single.patch_step = 1.0;
  single.oversampling = 0.0;
  const GfemProblem one = build_problem(single);
  REQUIRE(one.patches.size() == 1);
  CHECK(tolerance_cascade(1e-3, one).front().relative == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK_THROWS_AS(tolerance_cascade(0.0, one), DomainError);
}

TEST_CASE("local spaces are augmented by the data function and the constant") {
  const GfemProblem& p = poisson_20();
  const std::vector<CascadeEntry> cascade = tolerance_cascade(1e-3, p);
  const std::size_t interior = 4 * 9 + 4;
  RngStream rng(1, interior);
  const LocalSpace s = local_space(p, interior, cascade[interior].operator_tol, rng);
  CHECK(p.patches[interior].data_function.norm() > 0.0);
  CHECK(s.vectors.cols() == s.randomized.size() + 2);
  CHECK(s.energy_basis.orthonormality_residual() <= 1e-10);
  CHECK(local_relative_error(p, interior, s) >= 0.0);

  GfemConfig c = poisson_config(20);
  c.load = {0.0, {}};
  const GfemProblem homogeneous = build_problem(c);
  RngStream r0(1, 0);
  const LocalSpace corner = local_space(homogeneous, 0, 1e-3, r0);
  CHECK(homogeneous.patches[0].touches_dirichlet);
  CHECK(corner.vectors.cols() == corner.randomized.size());
}

TEST_CASE("local errors agree with a least-squares fit") {
  const GfemProblem p = build_problem(channels_config(50));
  const std::vector<CascadeEntry> cascade = tolerance_cascade(1e-4, p);
  for (std::size_t i : {std::size_t{40}, std::size_t{42}, std::size_t{69}}) {
    CAPTURE(i);
    RngStream rng(1, i);
    const LocalSpace s = local_space(p, i, cascade[i].operator_tol, rng);
    const SparseMatrix& k = p.patches[i].op->range_space().gram();
    const DenseMatrix& v = s.energy_basis.vectors();
    const Vector& u = p.truth_range[i];
    const DenseMatrix g = v.transpose() * (k * v);
    Vector r = u - v * g.ldlt().solve(v.transpose() * (k * u));
    r.array() -= r.mean();
    const double expected = std::sqrt(std::max(0.0, r.dot(k * r))) / p.star_energy[i];
    const double got = local_relative_error(p, i, s);
    CHECK(got == doctest::Approx(expected).epsilon(1e-4));
    CHECK(got <= 1e-4);
  }
}

TEST_CASE("interior transfer spectra decay exponentially") {
  const GfemProblem p = build_problem(poisson_config(50));
  const GfemPatch& patch = p.patches[4 * 9 + 4];
  const ProjectionErrorOracle oracle(*patch.op);
  const Vector& s = oracle.singular_values();
  for (Index i = 1; i < 30; ++i) CHECK(s[i] <= s[i - 1] * (1.0 + 1e-10));
  CHECK(s[19] / s[0] <= 5e-2);
  CHECK(s[29] / s[0] <= 1e-3);
}

TEST_CASE("full local spaces reproduce the finite element solution") {
  const GfemProblem p = build_problem(coarse_config());
  std::vector<LocalSpace> spaces(p.patches.size());
  for (std::size_t i = 0; i < spaces.size(); ++i) {
    const Index n = p.patches[i].range_dim();
    spaces[i].vectors = DenseMatrix::Identity(n, n);
  }
  const GfemSolution s = assemble_and_solve(p, spaces);
  CHECK(s.relative_energy_error <= 1e-10);
  CHECK(s.dropped > 0);
}

TEST_CASE("sweeps match single runs and tighter tolerances do not hurt") {
  const GfemProblem& p = poisson_20();
  const std::vector<double> tols = {1e-2, 1e-3, 1e-4};
  const std::vector<GfemRun> sweep = run_sweep(p, tols, 3);
  REQUIRE(sweep.size() == 3);
  for (std::size_t k = 0; k < tols.size(); ++k) {
    const GfemRun single = run(p, tols[k], 3);
    CHECK(single.solution.relative_energy_error == doctest::Approx(sweep[k].solution.relative_energy_error).epsilon(1e-8));
    for (std::size_t i = 0; i < single.patches.size(); ++i) {
      CHECK(single.patches[i].n == sweep[k].patches[i].n);
      CHECK(single.patches[i].evaluations == sweep[k].patches[i].evaluations);
    }
    CHECK(sweep[k].solution.relative_energy_error <= tols[k]);
  }
  CHECK(sweep[1].solution.relative_energy_error <= sweep[0].solution.relative_energy_error + 1e-12);
  CHECK(sweep[2].solution.relative_energy_error <= sweep[1].solution.relative_energy_error + 1e-12);
}

// Seed whose sparse factorization blames independent columns for a rounding-level pivot.
TEST_CASE("global solve keeps columns that are not dependent") {
  const GfemProblem p = build_problem(channels_config(100));
  const GfemRun r = run(p, 1e-4, 1045);
  CHECK(r.max_local_error <= 1e-4);
  CHECK(r.solution.relative_energy_error <= 1e-4);
}

TEST_CASE("data functions vanish where the load does") {
  const GfemProblem p = build_problem(channels_config(50));
  int zero = 0;
  for (const GfemPatch& patch : p.patches) {
    const bool loaded = patch.omega_star.x_lo < 0.1 || patch.omega_star.x_hi > 0.9;
    if (!loaded) {
      CHECK(patch.data_function.cwiseAbs().maxCoeff() == 0.0);
      ++zero;
    }
  }
  CHECK(zero > 0);
}

TEST_CASE("channels coefficient field") {
  const GfemConfig c = channels_config(100);
  CHECK(c.coefficient.max_value() == 1e5);
  CHECK(c.coefficient.min_value() == 1.0);
  CHECK(c.load.max_value() > 0.0);
  CHECK(c.load.min_value() < 0.0);
}
