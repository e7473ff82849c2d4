#include "rrf/gfem.hpp"

#include "rrf/csv.hpp"
#include "rrf/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <cholmod.h>
#include <lapacke.h>

namespace rrf::gfem {

GfemConfig poisson_config(int inverse_h) {
  GfemConfig c;
  c.inverse_h = inverse_h;
  c.coefficient = {1.0, {}};
  c.load = {1.0, {}};
  return c;
}

GfemConfig channels_config(int inverse_h) {
  GfemConfig c;
  c.inverse_h = inverse_h;
  constexpr double kHigh = 1e5;
  c.coefficient = {1.0,
                   {{{0.02, 0.1, 0.02, 0.98}, kHigh},
                    {{0.9, 0.98, 0.02, 0.98}, kHigh},
                    {{0.11, 0.89, 0.475, 0.485}, kHigh},
                    {{0.1, 0.9, 0.495, 0.505}, kHigh},
                    {{0.11, 0.89, 0.515, 0.525}, kHigh}}};
  c.load = {0.0, {{{0.9, 0.98, 0.02, 0.98}, 1.0}, {{0.02, 0.1, 0.02, 0.98}, -1.0}}};
  return c;
}

namespace {

Vector gather(const Vector& v, const std::vector<int>& idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Index>(k)] = v[idx[k]];
  return out;
}

std::vector<int> constrained_nodes(const fem::RectMesh& m) {
  std::vector<int> out;
  for (Index k = 0; k < m.num_nodes(); ++k) {
    if (m.tag(k) == fem::BoundaryTag::gamma_out || m.tag(k) == fem::BoundaryTag::sigma_d) {
      out.push_back(static_cast<int>(k));
    }
  }
  return out;
}

void build_patch_operator(const GfemProblem& problem, GfemPatch& p) {
  const fem::RectMesh& star = *p.star_mesh;
  const fem::Box& s = p.omega_star;
  const fem::Box& d = problem.config.domain;
  const double tol = 1e-9 * star.h();

  std::vector<fem::Segment> outer;
  if (s.x_lo > d.x_lo + tol) outer.push_back({{s.x_lo, s.y_lo}, {s.x_lo, s.y_hi}});
  if (s.x_hi < d.x_hi - tol) outer.push_back({{s.x_hi, s.y_lo}, {s.x_hi, s.y_hi}});
  if (s.y_lo > d.y_lo + tol) outer.push_back({{s.x_lo, s.y_lo}, {s.x_hi, s.y_lo}});
  if (s.y_hi < d.y_hi - tol) outer.push_back({{s.x_lo, s.y_hi}, {s.x_hi, s.y_hi}});

  TransferSetup t;
  t.system = fem::assemble_system(star, problem.pde);
  t.source_dofs = star.nodes_with_tag(fem::BoundaryTag::gamma_out);
  t.range_dofs = p.range_star;
  t.source_space = fem::assemble_interface_l2(star, outer, t.source_dofs);
  t.range_space = fem::assemble_energy_product(star, p.omega, problem.pde, p.range_star,
                                               p.touches_dirichlet ? 0 : 1);
  if (!p.touches_dirichlet) {
    t.placement = KernelPlacement::range_domain;
    t.kernel_gram = fem::submatrix(fem::assemble_mass(star, &p.omega), p.range_star, p.range_star);
    const double area = p.omega.width() * p.omega.height();
    t.kernel_basis = DenseMatrix::Constant(static_cast<Index>(p.range_star.size()), 1, 1.0 / std::sqrt(area));
    p.kernel_vector = t.kernel_basis.col(0);
  }
  p.op = std::make_shared<const TransferOperator>(std::move(t));

  Vector rhs = fem::assemble_load(star, problem.config.load);
  for (int k : constrained_nodes(star)) rhs[k] = 0.0;
  p.data_function = gather(p.op->solve_volume(rhs), p.range_star);
}

}  // namespace

GfemProblem build_problem(const GfemConfig& config) {
  GfemProblem pr;
  pr.config = config;
  pr.pde = fem::PdeSpec::diffusion(config.coefficient);
  pr.mesh = std::make_shared<const fem::RectMesh>(config.domain, 1.0 / config.inverse_h,
                                                  fem::ElementKind::p1_crisscross,
                                                  fem::BoundarySpec::all(fem::BoundaryTag::sigma_d));
  const auto& mesh = *pr.mesh;
  pr.stiffness = fem::assemble_stiffness(mesh, pr.pde);
  pr.load = fem::assemble_load(mesh, config.load);
  pr.dirichlet = mesh.nodes_with_tag(fem::BoundaryTag::sigma_d);

  Vector rhs = pr.load;
  for (int k : pr.dirichlet) rhs[k] = 0.0;
  pr.truth = Factorization(fem::constrain_rows(pr.stiffness, pr.dirichlet)).solve(rhs);
  pr.truth_energy = std::sqrt(std::max(0.0, pr.truth.dot(pr.stiffness * pr.truth)));

  pr.pou_x = axis_partition(config, true);
  pr.pou_y = axis_partition(config, false);
  pr.patches = build_patches(config, mesh);

  const std::size_t m = pr.patches.size();
  pr.star_energy.assign(m, 0.0);
  pr.trace_norm.assign(m, 0.0);
  pr.truth_range.assign(m, Vector());
  parallel_for(m, config.threads, [&](std::size_t i) {
    GfemPatch& p = pr.patches[i];
    build_patch_operator(pr, p);
    const Vector u_star = gather(pr.truth, p.star_to_global);
    const SparseMatrix k_star = fem::assemble_stiffness(*p.star_mesh, pr.pde);
    const Vector centred = u_star.array() - u_star.mean();
    pr.star_energy[i] = std::sqrt(std::max(0.0, centred.dot(k_star * centred)));
    pr.trace_norm[i] = p.op->source_space().norm(gather(u_star, p.op->source_dofs()));
    pr.truth_range[i] = gather(pr.truth, p.range_global);
  });

  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      const fem::Box& a = pr.patches[i].omega;
      const fem::Box& b = pr.patches[j].omega;
      // the weights vanish on the patch boundaries, so touching patches do not couple
      if (std::min(a.x_hi, b.x_hi) <= std::max(a.x_lo, b.x_lo) ||
          std::min(a.y_hi, b.y_hi) <= std::max(a.y_lo, b.y_lo)) {
        continue;
      }
      GfemProblem::Coupling c;
      c.i = i;
      c.j = j;
      const SparseMatrix full =
          fem::submatrix(pr.stiffness, pr.patches[i].range_global, pr.patches[j].range_global);
      std::vector<int> row_pos(static_cast<std::size_t>(full.rows()), -1);
      std::vector<int> col_pos(static_cast<std::size_t>(full.cols()), -1);
      for (Index col = 0; col < full.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(full, col); it; ++it) {
          row_pos[static_cast<std::size_t>(it.row())] = 0;
          col_pos[static_cast<std::size_t>(col)] = 0;
        }
      }
      for (std::size_t r = 0; r < row_pos.size(); ++r) {
        if (row_pos[r] == 0) {
          row_pos[r] = static_cast<int>(c.rows.size());
          c.rows.push_back(static_cast<Index>(r));
        }
      }
      for (std::size_t r = 0; r < col_pos.size(); ++r) {
        if (col_pos[r] == 0) {
          col_pos[r] = static_cast<int>(c.cols.size());
          c.cols.push_back(static_cast<Index>(r));
        }
      }
      std::vector<Triplet> t;
      for (Index col = 0; col < full.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(full, col); it; ++it) {
          t.emplace_back(row_pos[static_cast<std::size_t>(it.row())],
                         col_pos[static_cast<std::size_t>(col)], it.value());
        }
      }
      c.block.resize(static_cast<Index>(c.rows.size()), static_cast<Index>(c.cols.size()));
      c.block.setFromTriplets(t.begin(), t.end());
      if (c.block.nonZeros() > 0) pr.couplings.push_back(std::move(c));
    }
  }

  for (int j = 0; j < mesh.ny(); ++j) {
    for (int i = 0; i < mesh.nx(); ++i) {
      const fem::Point c = mesh.square_centre(i, j);
      int count = 0;
      for (const auto& p : pr.patches) count += p.omega.contains_open(c) ? 1 : 0;
      pr.overlap_count = std::max(pr.overlap_count, count);
    }
  }
  return pr;
}

std::vector<CascadeEntry> tolerance_cascade(double tol_gfem, const GfemProblem& problem) {
  if (!(tol_gfem > 0.0)) throw DomainError("tolerance_cascade: tolerance must be positive");
  const auto m = static_cast<double>(problem.patches.size());
  double s = 1.0;
  for (const auto& p : problem.patches) {
    const double diam = std::hypot(p.omega.width(), p.omega.height());
    s = std::max(s, 1.0 + p.pou_gradient * diam / std::numbers::pi * std::sqrt(p.contrast));
  }
  const double relative = tol_gfem / (std::max(1, problem.overlap_count) * std::sqrt(m) * s);
  std::vector<CascadeEntry> out(problem.patches.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].relative = relative;
    out[i].absolute = relative * problem.star_energy[i];
    const double trace = problem.trace_norm[i];
    out[i].operator_tol =
        trace > 0.0 ? out[i].absolute / trace : std::numeric_limits<double>::infinity();
    if (!(out[i].operator_tol > 0.0)) out[i].operator_tol = std::numeric_limits<double>::min();
  }
  return out;
}

namespace {

AdaptiveOptions patch_options(const GfemProblem& problem, double operator_tol) {
  AdaptiveOptions opts;
  opts.tol = operator_tol;
  opts.n_t = problem.config.n_t;
  opts.eps_algofail = problem.config.eps_algofail / static_cast<double>(problem.patches.size());
  return opts;
}

LocalSpace augment(const GfemPatch& p, RangeBasis randomized, double operator_tol) {
  LocalSpace out;
  out.operator_tol = operator_tol;
  out.randomized = std::move(randomized);
  out.energy_basis = out.randomized.basis;
  if (p.data_function.size() > 0 && p.data_function.allFinite()) {
    orthonormalize_extend(out.energy_basis, p.data_function, p.op->range_space());
  }
  const Index extra = p.kernel_vector.size() > 0 ? 1 : 0;
  out.vectors.resize(p.op->range_dim(), out.energy_basis.size() + extra);
  out.vectors.leftCols(out.energy_basis.size()) = out.energy_basis.vectors();
  if (extra) out.vectors.rightCols(1) = p.kernel_vector;
  return out;
}

}  // namespace

LocalSpace local_space(const GfemProblem& problem, std::size_t patch, double operator_tol,
                       RngStream& rng) {
  const GfemPatch& p = problem.patches.at(patch);
  return augment(p, adaptive_randomized_range(*p.op, patch_options(problem, operator_tol), rng),
                 operator_tol);
}

double local_relative_error(const GfemProblem& problem, std::size_t patch, const LocalSpace& space) {
  const GfemPatch& p = problem.patches.at(patch);
  const double denom = problem.star_energy.at(patch);
  if (denom == 0.0) return 0.0;
  Vector r = space.energy_basis.project_out(problem.truth_range.at(patch));
  // constants carry no energy away from Sigma_D; removing them keeps r^T K r above rounding
  if (!p.touches_dirichlet) r.array() -= r.mean();
  return p.op->range_space().norm(r) / denom;
}

namespace {

// Pivots of the Jacobi-scaled system below this value mark dependent columns.
constexpr double kDropTolerance = 1e-13;
// Scaled Galerkin residual, over all columns, above which the dropped columns were not
// dependent after all.
constexpr double kResidualTolerance = 1e-8;

// Jacobi-scaled principal submatrix of k on `sel`, and the scaling.
SparseMatrix scaled_block(const SparseMatrix& k, const std::vector<Index>& sel, Vector& scale) {
  const auto m = static_cast<Index>(sel.size());
  std::vector<Index> position(static_cast<std::size_t>(k.cols()), -1);
  scale.resize(m);
  for (Index a = 0; a < m; ++a) {
    position[static_cast<std::size_t>(sel[a])] = a;
    scale[a] = 1.0 / std::sqrt(k.coeff(sel[a], sel[a]));
  }
  std::vector<Triplet> t;
  for (Index c = 0; c < k.outerSize(); ++c) {
    const Index b = position[static_cast<std::size_t>(c)];
    if (b < 0) continue;
    for (SparseMatrix::InnerIterator it(k, c); it; ++it) {
      const Index a = position[static_cast<std::size_t>(it.row())];
      if (a >= 0) t.emplace_back(static_cast<int>(a), static_cast<int>(b), scale[a] * scale[b] * it.value());
    }
  }
  SparseMatrix out(m, m);
  out.setFromTriplets(t.begin(), t.end());
  return SparseMatrix(0.5 * (out + SparseMatrix(out.transpose())));
}

// RAII wrapper of a CHOLMOD workspace.
class Cholmod {
 public:
  Cholmod() {
    cholmod_start(&c_);
    c_.supernodal = CHOLMOD_SUPERNODAL;
    c_.final_ll = 1;
    c_.print = 0;  // non-definite systems are handled by the caller
    c_.nmethods = 1;
    c_.method[0].ordering = CHOLMOD_AMD;
  }
  ~Cholmod() {
    if (factor_) cholmod_free_factor(&factor_, &c_);
    cholmod_finish(&c_);
  }
  Cholmod(const Cholmod&) = delete;
  Cholmod& operator=(const Cholmod&) = delete;

  // Factorizes the lower triangle of a; returns the pivots (squared diagonal of L) in
  // factorization order and that order, or the failing position when a is not definite.
  bool factorize(const SparseMatrix& lower, Vector& pivots, std::vector<int>& order, int& failed) {
    cholmod_sparse a = view(lower);
    if (factor_) cholmod_free_factor(&factor_, &c_);
    factor_ = cholmod_analyze(&a, &c_);
    if (!factor_) throw std::runtime_error("cholmod_analyze failed");
    cholmod_factorize(&a, factor_, &c_);
    const auto n = static_cast<Index>(lower.rows());
    const int* perm = static_cast<const int*>(factor_->Perm);
    order.assign(perm, perm + n);
    failed = -1;
    if (c_.status == CHOLMOD_NOT_POSDEF) {
      failed = static_cast<int>(factor_->minor);
      return false;
    }
    if (c_.status < CHOLMOD_OK) throw std::runtime_error("cholmod_factorize failed");
    // diagonal of the supernodal factor; each supernode is a dense column-major block
    const int* super = static_cast<const int*>(factor_->super);
    const int* pi = static_cast<const int*>(factor_->pi);
    const int* px = static_cast<const int*>(factor_->px);
    const double* x = static_cast<const double*>(factor_->x);
    pivots.resize(n);
    for (std::size_t sn = 0; sn < factor_->nsuper; ++sn) {
      const int rows = pi[sn + 1] - pi[sn];
      for (int k = super[sn]; k < super[sn + 1]; ++k) {
        const int local = k - super[sn];
        const double d = x[px[sn] + local * rows + local];
        pivots[k] = d * d;
      }
    }
    return true;
  }

  Vector solve(const Vector& b) {
    cholmod_dense rhs{};
    rhs.nrow = rhs.d = static_cast<std::size_t>(b.size());
    rhs.ncol = 1;
    rhs.nzmax = rhs.nrow;
    rhs.x = const_cast<double*>(b.data());
    rhs.xtype = CHOLMOD_REAL;
    rhs.dtype = CHOLMOD_DOUBLE;
    cholmod_dense* x = cholmod_solve(CHOLMOD_A, factor_, &rhs, &c_);
    if (!x) throw std::runtime_error("cholmod_solve failed");
    Vector out = Eigen::Map<const Vector>(static_cast<const double*>(x->x), b.size());
    cholmod_free_dense(&x, &c_);
    return out;
  }

 private:
  static cholmod_sparse view(const SparseMatrix& a) {
    cholmod_sparse s{};
    s.nrow = static_cast<std::size_t>(a.rows());
    s.ncol = static_cast<std::size_t>(a.cols());
    s.nzmax = static_cast<std::size_t>(a.nonZeros());
    s.p = const_cast<int*>(a.outerIndexPtr());
    s.i = const_cast<int*>(a.innerIndexPtr());
    s.x = const_cast<double*>(a.valuePtr());
    s.stype = -1;
    s.itype = CHOLMOD_INT;
    s.xtype = CHOLMOD_REAL;
    s.dtype = CHOLMOD_DOUBLE;
    s.sorted = 1;
    s.packed = 1;
    return s;
  }

  cholmod_common c_{};
  cholmod_factor* factor_ = nullptr;
};

// Principal submatrix of a compressed column matrix on the sorted index set `sel`.
SparseMatrix principal(const SparseMatrix& a, const std::vector<Index>& sel) {
  std::vector<int> position(static_cast<std::size_t>(a.cols()), -1);
  for (std::size_t j = 0; j < sel.size(); ++j) position[static_cast<std::size_t>(sel[j])] = static_cast<int>(j);
  std::vector<int> outer{0};
  std::vector<int> inner;
  std::vector<double> values;
  for (const Index c : sel) {
    for (SparseMatrix::InnerIterator it(a, c); it; ++it) {
      const int r = position[static_cast<std::size_t>(it.row())];
      if (r < 0) continue;
      inner.push_back(r);
      values.push_back(it.value());
    }
    outer.push_back(static_cast<int>(inner.size()));
  }
  const auto m = static_cast<Index>(sel.size());
  const Eigen::Map<const SparseMatrix> view(m, m, static_cast<Index>(values.size()), outer.data(),
                                            inner.data(), values.data());
  return SparseMatrix(view);
}

// Sparse Cholesky in fill-reducing order. Columns with a pivot below the drop tolerance
// are removed from `keep` and the factorization is repeated. False if it does not settle
// or the solution leaves a residual on the dropped columns.
bool sparse_solve(const SparseMatrix& k, const Vector& f, std::vector<Index>& keep, Vector& coeff) {
  constexpr int kMaxAttempts = 32;
  Vector full_scale;
  const std::vector<Index> initial = keep;
  const SparseMatrix full = scaled_block(k, initial, full_scale).triangularView<Eigen::Lower>();
  std::vector<Index> local(initial.size());
  for (std::size_t j = 0; j < local.size(); ++j) local[j] = static_cast<Index>(j);
  Cholmod chol;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const SparseMatrix lower = principal(full, local);
    Vector scale(static_cast<Index>(local.size()));
    for (std::size_t j = 0; j < local.size(); ++j) scale[static_cast<Index>(j)] = full_scale[local[j]];
    Vector pivots;
    std::vector<int> order;
    int failed = -1;
    std::vector<bool> bad(keep.size(), false);
    bool any = false;
    if (!chol.factorize(lower, pivots, order, failed)) {
      bad[static_cast<std::size_t>(order[static_cast<std::size_t>(failed)])] = true;
      any = true;
    } else {
      for (Index j = 0; j < pivots.size(); ++j) {
        if (!(pivots[j] > kDropTolerance)) {
          bad[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])] = true;
          any = true;
        }
      }
    }
    if (!any) {
      Vector rhs(static_cast<Index>(keep.size()));
      for (std::size_t j = 0; j < keep.size(); ++j) rhs[static_cast<Index>(j)] = scale[static_cast<Index>(j)] * f[keep[j]];
      const Vector y = chol.solve(rhs);
      if (!y.allFinite()) return false;
      coeff = Vector::Zero(k.cols());
      for (std::size_t j = 0; j < keep.size(); ++j) coeff[keep[j]] = scale[static_cast<Index>(j)] * y[static_cast<Index>(j)];
      // Without pivoting a rounding-level pivot can pass and a later, independent column
      // gets the blame. Dropped columns must satisfy their equations too.
      const Vector r = k * coeff - f;
      double residual = 0.0;
      double load = 0.0;
      for (std::size_t j = 0; j < initial.size(); ++j) {
        const Index c = initial[j];
        residual = std::max(residual, full_scale[static_cast<Index>(j)] * std::abs(r[c]));
        load = std::max(load, full_scale[static_cast<Index>(j)] * std::abs(f[c]));
      }
      return residual <= kResidualTolerance * load;
    }
    std::vector<Index> next;
    for (std::size_t j = 0; j < local.size(); ++j) {
      if (!bad[j]) next.push_back(local[j]);
    }
    local = std::move(next);
    keep.clear();
    for (const Index j : local) keep.push_back(initial[static_cast<std::size_t>(j)]);
  }
  return false;
}

// Dense Cholesky with diagonal pivoting (LAPACK dpstrf); stops at the first pivot below
// the drop tolerance and discards the remaining columns.
void dense_pivoted_solve(const SparseMatrix& k, const Vector& f, std::vector<Index>& keep, Vector& coeff) {
  Vector scale;
  DenseMatrix a = DenseMatrix(scaled_block(k, keep, scale));
  const auto m = static_cast<lapack_int>(keep.size());
  std::vector<lapack_int> piv(keep.size());
  lapack_int rank = 0;
  if (m > 0) {
    const lapack_int info =
        LAPACKE_dpstrf(LAPACK_COL_MAJOR, 'L', m, a.data(), m, piv.data(), &rank, kDropTolerance);
    if (info < 0) throw std::logic_error("dpstrf: invalid argument");
  }
  Vector y(rank);
  for (lapack_int j = 0; j < rank; ++j) {
    const Index p = piv[static_cast<std::size_t>(j)] - 1;
    y[j] = scale[p] * f[keep[static_cast<std::size_t>(p)]];
  }
  const auto l = a.topLeftCorner(rank, rank).triangularView<Eigen::Lower>();
  l.solveInPlace(y);
  l.transpose().solveInPlace(y);
  if (!y.allFinite()) throw SingularSystemError("GFEM reduced system is singular");

  coeff = Vector::Zero(k.cols());
  std::vector<Index> kept;
  for (lapack_int j = 0; j < rank; ++j) {
    const Index p = piv[static_cast<std::size_t>(j)] - 1;
    const Index col = keep[static_cast<std::size_t>(p)];
    coeff[col] = scale[p] * y[j];
    kept.push_back(col);
  }
  std::sort(kept.begin(), kept.end());
  keep = std::move(kept);
}

}  // namespace

GfemSolution assemble_and_solve(const GfemProblem& problem, const std::vector<LocalSpace>& spaces) {
  if (spaces.size() != problem.patches.size()) {
    throw DimensionError("assemble_and_solve: one local space per patch expected");
  }
  const std::size_t m = spaces.size();
  std::vector<DenseMatrix> weighted(m);  // rho_i v for the columns of patch i
  std::vector<Index> offset(m + 1, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const GfemPatch& p = problem.patches[i];
    if (spaces[i].vectors.rows() != p.range_dim()) {
      throw DimensionError("assemble_and_solve: local space size");
    }
    weighted[i] = p.pou.asDiagonal() * spaces[i].vectors;
    offset[i + 1] = offset[i] + weighted[i].cols();
  }
  const Index cols = offset[m];

  std::vector<Triplet> t;
  for (const auto& c : problem.couplings) {
    const DenseMatrix block = weighted[c.i](c.rows, Eigen::all).transpose() *
                              (c.block * weighted[c.j](c.cols, Eigen::all));
    for (Index a = 0; a < block.rows(); ++a) {
      for (Index b = 0; b < block.cols(); ++b) {
        const int row = static_cast<int>(offset[c.i] + a);
        const int col = static_cast<int>(offset[c.j] + b);
        t.emplace_back(row, col, block(a, b));
        if (c.i != c.j) t.emplace_back(col, row, block(a, b));
      }
    }
  }
  SparseMatrix k(cols, cols);
  k.setFromTriplets(t.begin(), t.end());
  Vector f(cols);
  for (std::size_t i = 0; i < m; ++i) {
    const GfemPatch& p = problem.patches[i];
    f.segment(offset[i], weighted[i].cols()) =
        weighted[i].transpose() * gather(problem.load, p.range_global);
  }

  GfemSolution out;
  out.dimension = cols;

  std::vector<Index> active;
  for (Index j = 0; j < cols; ++j) {
    if (k.coeff(j, j) > 0.0) active.push_back(j);
  }
  std::vector<Index> keep = active;
  Vector coeff;
  if (!sparse_solve(k, f, keep, coeff)) {
    keep = active;
    dense_pivoted_solve(k, f, keep, coeff);
  }
  out.dropped = cols - static_cast<Index>(keep.size());
  if (keep.size() < active.size()) {
    std::clog << "warning: GFEM system singular, dropped " << active.size() - keep.size()
              << " dependent columns\n";
  }

  out.u = Vector::Zero(problem.mesh->num_nodes());
  for (std::size_t i = 0; i < m; ++i) {
    const Vector local = weighted[i] * coeff.segment(offset[i], weighted[i].cols());
    const auto& nodes = problem.patches[i].range_global;
    for (std::size_t r = 0; r < nodes.size(); ++r) out.u[nodes[r]] += local[static_cast<Index>(r)];
  }
  const Vector e = problem.truth - out.u;
  const double err = std::sqrt(std::max(0.0, e.dot(problem.stiffness * e)));
  out.relative_energy_error = problem.truth_energy > 0.0 ? err / problem.truth_energy : err;
  return out;
}

std::vector<GfemRun> run_sweep(const GfemProblem& problem, const std::vector<double>& tolerances,
                               std::uint64_t seed) {
  if (tolerances.empty()) return {};
  const std::size_t m = problem.patches.size();
  std::vector<std::vector<CascadeEntry>> cascades;
  for (double tol : tolerances) cascades.push_back(tolerance_cascade(tol, problem));
  const std::size_t tightest = static_cast<std::size_t>(
      std::min_element(tolerances.begin(), tolerances.end()) - tolerances.begin());

  std::vector<GfemRun> out(tolerances.size());
  std::vector<std::vector<LocalSpace>> spaces(tolerances.size(), std::vector<LocalSpace>(m));
  for (std::size_t t = 0; t < tolerances.size(); ++t) {
    out[t].seed = seed;
    out[t].tol_gfem = tolerances[t];
    out[t].patches.resize(m);
  }
  parallel_for(m, problem.config.threads, [&](std::size_t i) {
    const GfemPatch& p = problem.patches[i];
    RngStream rng(seed, i);
    const RangeBasis full = adaptive_randomized_range(
        *p.op, patch_options(problem, cascades[tightest][i].operator_tol), rng);
    for (std::size_t t = 0; t < tolerances.size(); ++t) {
      const double operator_tol = cascades[t][i].operator_tol;
      spaces[t][i] = augment(p, adaptive_prefix(full, operator_tol), operator_tol);
      PatchRecord& r = out[t].patches[i];
      r.patch = static_cast<int>(i);
      r.n = spaces[t][i].randomized.size();
      r.evaluations = spaces[t][i].randomized.evaluations;
      r.operator_tol = operator_tol;
      r.local_error = local_relative_error(problem, i, spaces[t][i]);
    }
  });
  for (std::size_t t = 0; t < tolerances.size(); ++t) {
    for (const auto& r : out[t].patches) out[t].max_local_error = std::max(out[t].max_local_error, r.local_error);
    out[t].solution = assemble_and_solve(problem, spaces[t]);
  }
  return out;
}

GfemRun run(const GfemProblem& problem, double tol_gfem, std::uint64_t seed) {
  return run_sweep(problem, {tol_gfem}, seed).front();
}

void write_patch_csv(std::ostream& os, const std::vector<GfemRun>& runs) {
  csv::Writer w(os, {"seed", "tol_gfem", "patch", "n", "evaluations", "operator_tol", "local_error"});
  for (const auto& run : runs) {
    for (const auto& r : run.patches) {
      w.row({csv::cell(run.seed), csv::cell(run.tol_gfem), csv::cell(r.patch), csv::cell(r.n),
             csv::cell(r.evaluations), csv::cell(r.operator_tol), csv::cell(r.local_error)});
    }
  }
}

void write_global_csv(std::ostream& os, const std::vector<GfemRun>& runs) {
  csv::Writer w(os, {"seed", "tol_gfem", "dimension", "dropped", "relative_error",
                     "max_local_error", "amplification"});
  for (const auto& run : runs) {
    const double amp = run.max_local_error > 0.0
                           ? run.solution.relative_energy_error / run.max_local_error
                           : 0.0;
    w.row({csv::cell(run.seed), csv::cell(run.tol_gfem), csv::cell(run.solution.dimension),
           csv::cell(run.solution.dropped), csv::cell(run.solution.relative_energy_error),
           csv::cell(run.max_local_error), csv::cell(amp)});
  }
}

}  // namespace rrf::gfem
