#include "rrf/fem2d.hpp"

#include <algorithm>
#include <cmath>

namespace rrf::fem {

namespace {

int cells_along(double length, double h) {
  if (!(h > 0.0) || !(length > 0.0)) throw DomainError("build_rect_mesh: degenerate geometry");
  const double r = length / h;
  const double n = std::round(r);
  if (n < 1.0 || std::abs(r - n) > 1e-8 * std::max(1.0, r)) {
    throw DomainError("build_rect_mesh: side length " + std::to_string(length) +
                      " is not a multiple of h = " + std::to_string(h));
  }
  return static_cast<int>(n);
}

int rank(BoundaryTag t) {
  switch (t) {
    case BoundaryTag::sigma_d:
      return 3;
    case BoundaryTag::gamma_out:
      return 2;
    case BoundaryTag::sigma_n:
      return 1;
    default:
      return 0;
  }
}

}  // namespace

RectMesh::RectMesh(Box bounds, double h, ElementKind kind, BoundarySpec boundary)
    : bounds_(bounds),
      h_(h),
      nx_(cells_along(bounds.width(), h)),
      ny_(cells_along(bounds.height(), h)),
      kind_(kind) {
  const Index corners = num_corner_nodes();
  const Index total = corners + (kind == ElementKind::p1_crisscross ? Index{nx_} * ny_ : 0);
  points_.resize(static_cast<std::size_t>(total));
  tags_.assign(static_cast<std::size_t>(total), BoundaryTag::interior);

  for (int j = 0; j <= ny_; ++j) {
    for (int i = 0; i <= nx_; ++i) {
      const auto k = static_cast<std::size_t>(corner_node(i, j));
      points_[k] = {bounds.x_lo + i * h, bounds.y_lo + j * h};
      BoundaryTag best = BoundaryTag::interior;
      auto consider = [&](bool on, BoundaryTag t) {
        if (on && rank(t) > rank(best)) best = t;
      };
      consider(i == 0, boundary.left);
      consider(i == nx_, boundary.right);
      consider(j == 0, boundary.bottom);
      consider(j == ny_, boundary.top);
      tags_[k] = best;
    }
  }
  if (kind == ElementKind::p1_crisscross) {
    for (int j = 0; j < ny_; ++j) {
      for (int i = 0; i < nx_; ++i) {
        points_[static_cast<std::size_t>(centre_node(i, j))] = square_centre(i, j);
      }
    }
  }
}

int RectMesh::centre_node(int i, int j) const {
  if (kind_ != ElementKind::p1_crisscross) throw DomainError("centre_node: mesh has no centres");
  return static_cast<int>(num_corner_nodes()) + j * nx_ + i;
}

Point RectMesh::square_centre(int i, int j) const {
  return {bounds_.x_lo + (i + 0.5) * h_, bounds_.y_lo + (j + 0.5) * h_};
}

Box RectMesh::square(int i, int j) const {
  return {bounds_.x_lo + i * h_, bounds_.x_lo + (i + 1) * h_, bounds_.y_lo + j * h_,
          bounds_.y_lo + (j + 1) * h_};
}

std::vector<int> RectMesh::nodes_with_tag(BoundaryTag t) const {
  std::vector<int> out;
  for (std::size_t k = 0; k < tags_.size(); ++k) {
    if (tags_[k] == t) out.push_back(static_cast<int>(k));
  }
  return out;
}

int RectMesh::grid_index(double value, double origin, int n) const {
  const double r = (value - origin) / h_;
  const double i = std::round(r);
  if (std::abs(r - i) > 1e-8 * std::max(1.0, std::abs(r)) || i < 0.0 || i > n) {
    throw DomainError("coordinate " + std::to_string(value) + " is not on a mesh line");
  }
  return static_cast<int>(i);
}

std::vector<int> RectMesh::nodes_on_line(bool vertical, double value) const {
  std::vector<int> out;
  if (vertical) {
    const int i = grid_index(value, bounds_.x_lo, nx_);
    for (int j = 0; j <= ny_; ++j) out.push_back(corner_node(i, j));
  } else {
    const int j = grid_index(value, bounds_.y_lo, ny_);
    for (int i = 0; i <= nx_; ++i) out.push_back(corner_node(i, j));
  }
  return out;
}

std::vector<int> RectMesh::nodes_in_box(const Box& b) const {
  std::vector<int> out;
  const double tol = 1e-9 * h_;
  for (std::size_t k = 0; k < points_.size(); ++k) {
    if (b.contains_closed(points_[k], tol)) out.push_back(static_cast<int>(k));
  }
  return out;
}

int RectMesh::locate_corner(Point p) const {
  return corner_node(grid_index(p.x, bounds_.x_lo, nx_), grid_index(p.y, bounds_.y_lo, ny_));
}

double PiecewiseConstant::operator()(Point p) const {
  double v = base;
  for (const auto& [box, value] : boxes) {
    if (box.contains_open(p)) v = value;
  }
  return v;
}

constexpr double kEdgeSnap = 1e-12;

double PiecewiseConstant::average(const Box& r) const {
  const double area = r.width() * r.height();
  if (!(area > 0.0)) throw DomainError("average: empty rectangle");
  if (boxes.empty()) return base;
  // split r along all box edges; every cell then lies in or out of each box.
  // Edges within rounding of a side of r (0.9 vs 90 * 0.01) are snapped to it.
  const double tx = kEdgeSnap * r.width(), ty = kEdgeSnap * r.height();
  std::vector<double> xs = {r.x_lo, r.x_hi}, ys = {r.y_lo, r.y_hi};
  for (const auto& entry : boxes) {
    const Box& b = entry.first;
    for (double x : {b.x_lo, b.x_hi}) {
      if (x > r.x_lo + tx && x < r.x_hi - tx) xs.push_back(x);
    }
    for (double y : {b.y_lo, b.y_hi}) {
      if (y > r.y_lo + ty && y < r.y_hi - ty) ys.push_back(y);
    }
  }
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  double sum = 0.0;
  for (std::size_t a = 0; a + 1 < xs.size(); ++a) {
    for (std::size_t b = 0; b + 1 < ys.size(); ++b) {
      const double cell = (xs[a + 1] - xs[a]) * (ys[b + 1] - ys[b]);
      if (cell > 0.0) sum += cell * (*this)({0.5 * (xs[a] + xs[a + 1]), 0.5 * (ys[b] + ys[b + 1])});
    }
  }
  return sum / area;
}

double PiecewiseConstant::min_value() const {
  double v = base;
  for (const auto& entry : boxes) v = std::min(v, entry.second);
  return v;
}

double PiecewiseConstant::max_value() const {
  double v = base;
  for (const auto& entry : boxes) v = std::max(v, entry.second);
  return v;
}

PdeSpec PdeSpec::helmholtz(double kappa) {
  PdeSpec p;
  p.kind = Kind::helmholtz;
  p.kappa = kappa;
  p.validate();
  return p;
}

PdeSpec PdeSpec::diffusion(PiecewiseConstant k) {
  PdeSpec p;
  p.kind = Kind::diffusion;
  p.coefficient = std::move(k);
  p.validate();
  return p;
}

void PdeSpec::validate() const {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw DomainError("PdeSpec: kappa must be >= 0");
  if (kind != Kind::helmholtz && kappa != 0.0) {
    throw DomainError("PdeSpec: wave number only valid for helmholtz");
  }
  if (!(coefficient.min_value() > 0.0) || !std::isfinite(coefficient.max_value())) {
    throw DomainError("PdeSpec: coefficient must be positive and bounded");
  }
}

}  // namespace rrf::fem
