#include "rrf/gfem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rrf::gfem {

PartitionOfUnity1d::PartitionOfUnity1d(std::vector<Interval> intervals, double domain_lo,
                                       double domain_hi)
    : intervals_(std::move(intervals)), lo_(domain_lo), hi_(domain_hi) {
  if (intervals_.empty()) throw DomainError("partition of unity: no intervals");
  std::sort(intervals_.begin(), intervals_.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  const double tol = 1e-12 * std::max(1.0, hi_ - lo_);
  if (intervals_.front().lo > lo_ + tol || intervals_.back().hi < hi_ - tol) {
    throw DomainError("partition of unity: gap in cover");
  }
  double reach = intervals_.front().hi;
  for (std::size_t p = 1; p < intervals_.size(); ++p) {
    if (intervals_[p].lo > reach + tol) throw DomainError("partition of unity: gap in cover");
    reach = std::max(reach, intervals_[p].hi);
  }
  const std::size_t n = intervals_.size();
  ramp_left_.assign(n, 0.0);
  ramp_right_.assign(n, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    const Interval& a = intervals_[p];
    for (std::size_t q = 0; q < n; ++q) {
      if (q == p) continue;
      const Interval& b = intervals_[q];
      if (b.lo < a.lo && b.hi > a.lo) ramp_left_[p] = std::max(ramp_left_[p], std::min(b.hi, a.hi) - a.lo);
      if (b.hi > a.hi && b.lo < a.hi) ramp_right_[p] = std::max(ramp_right_[p], a.hi - std::max(b.lo, a.lo));
    }
    if (a.lo <= lo_ + tol) ramp_left_[p] = 0.0;
    if (a.hi >= hi_ - tol) ramp_right_[p] = 0.0;
  }
}

double PartitionOfUnity1d::raw(std::size_t p, double x) const {
  const Interval& a = intervals_[p];
  if (x < a.lo || x > a.hi) return 0.0;
  double w = 1.0;
  if (ramp_left_[p] > 0.0) w = std::min(w, (x - a.lo) / ramp_left_[p]);
  if (ramp_right_[p] > 0.0) w = std::min(w, (a.hi - x) / ramp_right_[p]);
  return std::max(w, 0.0);
}

double PartitionOfUnity1d::operator()(std::size_t p, double x) const {
  const double w = raw(p, x);
  if (w == 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t q = 0; q < intervals_.size(); ++q) sum += raw(q, x);
  return w / sum;
}

PartitionOfUnity1d axis_partition(const GfemConfig& c, bool x_axis) {
  const double lo = x_axis ? c.domain.x_lo : c.domain.y_lo;
  const double hi = x_axis ? c.domain.x_hi : c.domain.y_hi;
  if (!(c.patch_size > 0.0) || !(c.patch_step > 0.0) || c.patch_step > c.patch_size) {
    throw DomainError("gfem: patch step must lie in (0, patch size]");
  }
  const double tol = 1e-9 * (hi - lo);
  std::vector<Interval> out;
  for (int k = 0;; ++k) {
    const double a = lo + k * c.patch_step;
    const double b = std::min(a + c.patch_size, hi);
    out.push_back({a, b});
    if (b >= hi - tol) break;
  }
  out.back().hi = hi;
  return PartitionOfUnity1d(std::move(out), lo, hi);
}

namespace {

int offset(double value, double origin, double h) {
  return static_cast<int>(std::lround((value - origin) / h));
}

// Largest gradient of the nodal interpolant of rho over the crisscross triangles of omega.
double interpolant_gradient(const fem::RectMesh& m, const fem::Box& omega,
                            const std::vector<double>& rho) {
  double best = 0.0;
  const double h = m.h();
  for (int j = 0; j < m.ny(); ++j) {
    for (int i = 0; i < m.nx(); ++i) {
      if (!omega.contains_open(m.square_centre(i, j))) continue;
      const int c[4] = {m.corner_node(i, j), m.corner_node(i + 1, j), m.corner_node(i + 1, j + 1),
                        m.corner_node(i, j + 1)};
      const double mid = rho[static_cast<std::size_t>(m.centre_node(i, j))];
      // local coordinates of the corners relative to the centre
      const double cx[4] = {-0.5 * h, 0.5 * h, 0.5 * h, -0.5 * h};
      const double cy[4] = {-0.5 * h, -0.5 * h, 0.5 * h, 0.5 * h};
      for (int t = 0; t < 4; ++t) {
        const int a = t, b = (t + 1) % 4;
        const double ua = rho[static_cast<std::size_t>(c[a])] - mid;
        const double ub = rho[static_cast<std::size_t>(c[b])] - mid;
        const double det = cx[a] * cy[b] - cx[b] * cy[a];
        const double gx = (ua * cy[b] - ub * cy[a]) / det;
        const double gy = (cx[a] * ub - cx[b] * ua) / det;
        best = std::max(best, std::hypot(gx, gy));
      }
    }
  }
  return best;
}

}  // namespace

std::vector<GfemPatch> build_patches(const GfemConfig& c, const fem::RectMesh& mesh) {
  if (mesh.kind() != fem::ElementKind::p1_crisscross) {
    throw DomainError("gfem: expects a crisscross mesh");
  }
  const auto px = axis_partition(c, true);
  const auto py = axis_partition(c, false);
  const fem::Box& d = c.domain;
  const double h = mesh.h();
  const double tol = 1e-9 * h;
  if (!(c.oversampling >= 0.0)) throw DomainError("gfem: negative oversampling");

  std::vector<GfemPatch> patches;
  for (std::size_t iy = 0; iy < py.size(); ++iy) {
    for (std::size_t ix = 0; ix < px.size(); ++ix) {
      GfemPatch p;
      p.id = static_cast<int>(patches.size());
      p.ix = static_cast<int>(ix);
      p.iy = static_cast<int>(iy);
      p.omega = {px.interval(ix).lo, px.interval(ix).hi, py.interval(iy).lo, py.interval(iy).hi};
      const double o = c.oversampling;
      p.omega_star = {std::max(d.x_lo, p.omega.x_lo - o), std::min(d.x_hi, p.omega.x_hi + o),
                      std::max(d.y_lo, p.omega.y_lo - o), std::min(d.y_hi, p.omega.y_hi + o)};
      p.touches_dirichlet = p.omega.x_lo <= d.x_lo + tol || p.omega.x_hi >= d.x_hi - tol ||
                            p.omega.y_lo <= d.y_lo + tol || p.omega.y_hi >= d.y_hi - tol;

      const fem::Box& s = p.omega_star;
      auto side = [&](bool on_boundary) {
        return on_boundary ? fem::BoundaryTag::sigma_d : fem::BoundaryTag::gamma_out;
      };
      fem::BoundarySpec bc{side(s.x_lo <= d.x_lo + tol), side(s.x_hi >= d.x_hi - tol),
                           side(s.y_lo <= d.y_lo + tol), side(s.y_hi >= d.y_hi - tol)};
      auto star = std::make_shared<const fem::RectMesh>(s, h, fem::ElementKind::p1_crisscross, bc);

      const int oi = offset(s.x_lo, d.x_lo, h);
      const int oj = offset(s.y_lo, d.y_lo, h);
      p.star_to_global.resize(static_cast<std::size_t>(star->num_nodes()));
      for (int j = 0; j <= star->ny(); ++j) {
        for (int i = 0; i <= star->nx(); ++i) {
          p.star_to_global[static_cast<std::size_t>(star->corner_node(i, j))] =
              mesh.corner_node(i + oi, j + oj);
        }
      }
      for (int j = 0; j < star->ny(); ++j) {
        for (int i = 0; i < star->nx(); ++i) {
          p.star_to_global[static_cast<std::size_t>(star->centre_node(i, j))] =
              mesh.centre_node(i + oi, j + oj);
        }
      }

      std::vector<double> rho(static_cast<std::size_t>(star->num_nodes()));
      for (Index k = 0; k < star->num_nodes(); ++k) {
        const fem::Point x = star->point(k);
        rho[static_cast<std::size_t>(k)] = px(ix, x.x) * py(iy, x.y);
      }
      p.pou_gradient = interpolant_gradient(*star, p.omega, rho);

      std::vector<int> range_local;
      for (int k : star->nodes_in_box(p.omega)) {
        if (star->tag(k) != fem::BoundaryTag::sigma_d) range_local.push_back(k);
      }
      p.range_star = range_local;
      p.range_global.reserve(range_local.size());
      p.pou.resize(static_cast<Index>(range_local.size()));
      for (std::size_t r = 0; r < range_local.size(); ++r) {
        p.range_global.push_back(p.star_to_global[static_cast<std::size_t>(range_local[r])]);
        p.pou[static_cast<Index>(r)] = rho[static_cast<std::size_t>(range_local[r])];
      }

      double kmin = std::numeric_limits<double>::infinity(), kmax = 0.0;
      for (int j = 0; j < star->ny(); ++j) {
        for (int i = 0; i < star->nx(); ++i) {
          if (!p.omega.contains_open(star->square_centre(i, j))) continue;
          const double k = c.coefficient.average(star->square(i, j));
          kmin = std::min(kmin, k);
          kmax = std::max(kmax, k);
        }
      }
      p.contrast = kmax > 0.0 ? kmax / kmin : 1.0;
      p.star_mesh = std::move(star);
      patches.push_back(std::move(p));
    }
  }
  return patches;
}

double GfemProblem::pou_weight(const GfemPatch& p, fem::Point x) const {
  return pou_x(static_cast<std::size_t>(p.ix), x.x) * pou_y(static_cast<std::size_t>(p.iy), x.y);
}

PouCheck check_partition_of_unity(const GfemProblem& problem) {
  const auto& mesh = *problem.mesh;
  std::vector<double> sum(static_cast<std::size_t>(mesh.num_nodes()), 0.0);
  PouCheck out{0.0, std::numeric_limits<double>::infinity(), 0.0};
  for (const auto& p : problem.patches) {
    for (int k : mesh.nodes_in_box(p.omega)) {
      const double w = problem.pou_weight(p, mesh.point(k));
      sum[static_cast<std::size_t>(k)] += w;
      out.min_weight = std::min(out.min_weight, w);
      out.max_weight = std::max(out.max_weight, w);
    }
  }
  for (double s : sum) out.max_sum_deviation = std::max(out.max_sum_deviation, std::abs(s - 1.0));
  return out;
}

}  // namespace rrf::gfem
