#pragma once

#include "rrf/fem2d.hpp"
#include "rrf/random.hpp"
#include "rrf/rangefinder.hpp"
#include "rrf/transfer.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace rrf::gfem {

struct GfemConfig {
  fem::Box domain{0.0, 1.0, 0.0, 1.0};
  int inverse_h = 100;
  double patch_size = 0.2;
  double patch_step = 0.1;    // distance between neighbouring patch origins
  double oversampling = 0.1;  // enlargement of each patch, clipped to the domain
  fem::PiecewiseConstant coefficient;            // k
  fem::PiecewiseConstant load{0.0, {}};          // f
  int n_t = 20;
  double eps_algofail = 1e-15;  // for all patches together
  int threads = 1;
};

/// k = 1, f = 1.
GfemConfig poisson_config(int inverse_h = 100);
/// High conductivity channels (k = 1e5) with a heating and a cooling strip.
GfemConfig channels_config(int inverse_h = 100);

/// Interval [lo, hi] of a one-dimensional cover.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Flat-top partition of unity subordinate to a cover of [domain_lo, domain_hi] by
/// intervals. Each raw weight is 1 away from the overlaps, decays linearly to 0 across the
/// overlap with its neighbours and is not ramped at the domain ends; the weights are then
/// divided by their sum.
class PartitionOfUnity1d {
 public:
  PartitionOfUnity1d() = default;
  PartitionOfUnity1d(std::vector<Interval> intervals, double domain_lo, double domain_hi);

  std::size_t size() const { return intervals_.size(); }
  const Interval& interval(std::size_t p) const { return intervals_[p]; }
  double operator()(std::size_t p, double x) const;

 private:
  double raw(std::size_t p, double x) const;

  std::vector<Interval> intervals_;
  std::vector<double> ramp_left_, ramp_right_;
  double lo_ = 0.0, hi_ = 0.0;
};

/// Cover of one axis of the domain by patch intervals, with its partition of unity.
/// Throws DomainError when the intervals leave a gap.
PartitionOfUnity1d axis_partition(const GfemConfig& config, bool x_axis);

/// Overlapping patches omega_i with oversampling domains omega_i*.
struct GfemPatch {
  int id = 0;
  int ix = 0, iy = 0;  // position in the tensor layout
  fem::Box omega;
  fem::Box omega_star;
  bool touches_dirichlet = false;  // the boundary of omega_i meets the global boundary

  std::shared_ptr<const fem::RectMesh> star_mesh;
  std::vector<int> star_to_global;  // global node of every star-mesh node
  std::shared_ptr<const TransferOperator> op;
  std::vector<int> range_star;    // star-mesh node of every range DOF
  std::vector<int> range_global;  // global node of every range DOF
  Vector pou;                     // partition of unity weight at the range DOFs
  double pou_gradient = 0.0;      // max |grad rho_i| of the nodal interpolant
  double contrast = 1.0;          // max k / min k on omega_i
  Vector data_function;           // u^f on the range DOFs
  Vector kernel_vector;           // L2-normalized constant, empty if touches_dirichlet

  Index source_dim() const { return op->source_dim(); }
  Index range_dim() const { return op->range_dim(); }
};

/// Layout, meshes, operators and the finite element reference of one GFEM problem; all of
/// it is independent of the random draws and can be shared between runs.
struct GfemProblem {
  GfemConfig config;
  std::shared_ptr<const fem::RectMesh> mesh;
  fem::PdeSpec pde;
  SparseMatrix stiffness;  // without boundary conditions
  Vector load;
  std::vector<int> dirichlet;
  Vector truth;  // finite element solution u_gl
  double truth_energy = 0.0;
  PartitionOfUnity1d pou_x, pou_y;
  std::vector<GfemPatch> patches;
  int overlap_count = 0;  // C_pou: max number of patches over a point

  // per patch reference quantities of u_gl
  std::vector<double> star_energy;  // ||k^1/2 grad u_gl|| on omega_i*
  std::vector<double> trace_norm;   // ||u_gl|| in the source space of patch i
  std::vector<Vector> truth_range;  // u_gl on the range DOFs

  // Stiffness between the range DOFs of two overlapping patches i <= j, restricted to
  // the rows and columns where it is nonzero.
  struct Coupling {
    std::size_t i = 0, j = 0;
    std::vector<Index> rows, cols;  // range DOF positions in patch i and patch j
    SparseMatrix block;
  };
  std::vector<Coupling> couplings;

  /// rho_i at a point.
  double pou_weight(const GfemPatch& p, fem::Point x) const;
};

GfemProblem build_problem(const GfemConfig& config);

/// Patch layout only (no operators), for counting and for the partition of unity.
std::vector<GfemPatch> build_patches(const GfemConfig& config, const fem::RectMesh& mesh);

/// Max over all mesh nodes of |sum_i rho_i - 1|, and min/max of the weights.
struct PouCheck {
  double max_sum_deviation = 0.0;
  double min_weight = 0.0;
  double max_weight = 0.0;
};
PouCheck check_partition_of_unity(const GfemProblem& problem);

struct CascadeEntry {
  double relative = 0.0;   // target relative local error
  double absolute = 0.0;   // relative * ||k^1/2 grad u_ref||_{omega_i*}
  double operator_tol = 0.0;  // tolerance for ||T_i - P T_i||
};

/// Heuristic split of the global tolerance. With s = max_i (1 + |grad rho_i| diam(omega_i)
/// / pi * sqrt(contrast_i)):
///   relative = tol / (C_pou sqrt(m) s),
///   operator_tol = relative * ||u_ref||_{E, omega_i*} / ||u_ref|_{Gamma_out,i}||_S.
std::vector<CascadeEntry> tolerance_cascade(double tol_gfem, const GfemProblem& problem);

/// Local reduced space: randomized range basis plus the data function and the constant.
struct LocalSpace {
  RangeBasis randomized;
  OrthonormalBasis energy_basis;  // randomized basis extended by the data function
  DenseMatrix vectors;            // all columns on the range DOFs
  double operator_tol = 0.0;
};

LocalSpace local_space(const GfemProblem& problem, std::size_t patch, double operator_tol,
                       RngStream& rng);

/// min over the local space of ||k^1/2 grad (u_gl - v)||_{omega_i} / ||k^1/2 grad u_gl||_{omega_i*}.
double local_relative_error(const GfemProblem& problem, std::size_t patch, const LocalSpace& space);

struct GfemSolution {
  Vector u;  // global nodal values
  double relative_energy_error = 0.0;
  Index dimension = 0;
  Index dropped = 0;  // columns removed as dependent
};

/// Galerkin solve on span{I_h(rho_i v)} and the relative energy error against u_gl.
GfemSolution assemble_and_solve(const GfemProblem& problem, const std::vector<LocalSpace>& spaces);

struct PatchRecord {
  int patch = 0;
  Index n = 0;
  Index evaluations = 0;
  double operator_tol = 0.0;
  double local_error = 0.0;
};

struct GfemRun {
  std::uint64_t seed = 0;
  double tol_gfem = 0.0;
  GfemSolution solution;
  std::vector<PatchRecord> patches;
  double max_local_error = 0.0;
};

/// One GFEM approximation: local spaces for every patch (patch i draws from stream i of
/// the seed), then the global solve.
GfemRun run(const GfemProblem& problem, double tol_gfem, std::uint64_t seed);

/// run() for several tolerances with one seed. The randomized spaces of the looser
/// tolerances are prefixes of the tightest one, so each patch runs the range finder once.
std::vector<GfemRun> run_sweep(const GfemProblem& problem, const std::vector<double>& tolerances,
                               std::uint64_t seed);

void write_patch_csv(std::ostream& os, const std::vector<GfemRun>& runs);
void write_global_csv(std::ostream& os, const std::vector<GfemRun>& runs);

}  // namespace rrf::gfem
