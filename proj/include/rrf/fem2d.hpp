#pragma once

#include "rrf/linalg.hpp"

#include <array>
#include <string>
#include <vector>

namespace rrf::fem {

enum class ElementKind { q1, p1_crisscross };

enum class BoundaryTag : unsigned char { interior, gamma_out, sigma_n, sigma_d };

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Axis-aligned box (x_lo, x_hi) x (y_lo, y_hi).
struct Box {
  double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;

  bool contains_open(Point p) const {
    return p.x > x_lo && p.x < x_hi && p.y > y_lo && p.y < y_hi;
  }
  bool contains_closed(Point p, double tol = 0.0) const {
    return p.x >= x_lo - tol && p.x <= x_hi + tol && p.y >= y_lo - tol && p.y <= y_hi + tol;
  }
  double width() const { return x_hi - x_lo; }
  double height() const { return y_hi - y_lo; }
};

/// Condition imposed on each side of the rectangle. Where two sides meet, a Dirichlet
/// side wins over Gamma_out, which wins over Neumann.
struct BoundarySpec {
  BoundaryTag left = BoundaryTag::sigma_n;
  BoundaryTag right = BoundaryTag::sigma_n;
  BoundaryTag bottom = BoundaryTag::sigma_n;
  BoundaryTag top = BoundaryTag::sigma_n;

  static BoundarySpec all(BoundaryTag t) { return {t, t, t, t}; }
};

/// Structured mesh of a rectangle by nx * ny squares of side h.
///
/// Corner node (i, j) has index j * (nx + 1) + i. For the crisscross kind every square
/// carries an additional centre node with index (nx + 1)(ny + 1) + j * nx + i and is split
/// into four triangles meeting at it.
class RectMesh {
 public:
  RectMesh(Box bounds, double h, ElementKind kind, BoundarySpec boundary = {});

  const Box& bounds() const { return bounds_; }
  double h() const { return h_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  ElementKind kind() const { return kind_; }

  Index num_nodes() const { return static_cast<Index>(points_.size()); }
  Index num_corner_nodes() const { return static_cast<Index>(nx_ + 1) * (ny_ + 1); }
  int num_squares() const { return nx_ * ny_; }

  int corner_node(int i, int j) const { return j * (nx_ + 1) + i; }
  int centre_node(int i, int j) const;
  Point point(Index node) const { return points_[static_cast<std::size_t>(node)]; }
  BoundaryTag tag(Index node) const { return tags_[static_cast<std::size_t>(node)]; }
  const std::vector<BoundaryTag>& tags() const { return tags_; }
  Point square_centre(int i, int j) const;
  Box square(int i, int j) const;

  /// Nodes carrying the given tag, ascending.
  std::vector<int> nodes_with_tag(BoundaryTag t) const;
  /// Corner nodes on the grid line x = value (vertical) or y = value, ascending.
  std::vector<int> nodes_on_line(bool vertical, double value) const;
  /// All nodes inside the closed box, ascending.
  std::vector<int> nodes_in_box(const Box& b) const;
  /// Node nearest to p (exact grid lookup for corner nodes).
  int locate_corner(Point p) const;

 private:
  int grid_index(double value, double origin, int n) const;

  Box bounds_;
  double h_;
  int nx_, ny_;
  ElementKind kind_;
  std::vector<Point> points_;
  std::vector<BoundaryTag> tags_;
};

/// Piecewise constant field: `base` everywhere, overridden by the value of the last box
/// that contains the point.
struct PiecewiseConstant {
  double base = 1.0;
  std::vector<std::pair<Box, double>> boxes;

  double operator()(Point p) const;
  /// Mean over a rectangle, exact for axis-aligned boxes.
  double average(const Box& r) const;
  double min_value() const;
  double max_value() const;
};

struct PdeSpec {
  enum class Kind { laplace, helmholtz, diffusion };
  Kind kind = Kind::laplace;
  double kappa = 0.0;            // helmholtz wave number
  PiecewiseConstant coefficient;  // diffusion coefficient k

  static PdeSpec laplace() { return {}; }
  static PdeSpec helmholtz(double kappa);
  static PdeSpec diffusion(PiecewiseConstant k);

  void validate() const;
};

/// Elementwise stiffness (k grad u, grad v) summed over squares whose centre lies in
/// `region`; all squares when `region` is empty. No boundary conditions applied.
SparseMatrix assemble_stiffness(const RectMesh& mesh, const PdeSpec& pde,
                                const Box* region = nullptr);

/// Consistent mass matrix (u, v)_{L2}.
SparseMatrix assemble_mass(const RectMesh& mesh, const Box* region = nullptr);

/// Operator matrix K - kappa^2 M without boundary conditions.
SparseMatrix assemble_operator(const RectMesh& mesh, const PdeSpec& pde);

/// Operator with identity rows for every node tagged gamma_out or sigma_d.
SparseMatrix assemble_system(const RectMesh& mesh, const PdeSpec& pde);

/// Replaces the listed rows by identity rows.
SparseMatrix constrain_rows(const SparseMatrix& a, const std::vector<int>& rows);

/// Load vector (f, v)_{L2} for a piecewise constant f sampled at square centres.
Vector assemble_load(const RectMesh& mesh, const PiecewiseConstant& f);

/// Axis-aligned segment along grid lines.
struct Segment {
  Point a;
  Point b;
};

/// Consistent 1D P1 mass matrix of the traces on a union of grid-conforming segments,
/// restricted to `dofs` (in that order). Segment nodes not in `dofs` are treated as fixed
/// to zero. Throws DomainError for segments that do not follow mesh lines.
SparseMatrix assemble_interface_mass(const RectMesh& mesh, const std::vector<Segment>& segments,
                                     const std::vector<int>& dofs);

/// Corner nodes lying on the segments, ascending and without duplicates.
std::vector<int> segment_nodes(const RectMesh& mesh, const std::vector<Segment>& segments);

/// L2 trace space on the segments over `dofs`.
InnerProductSpace assemble_interface_l2(const RectMesh& mesh,
                                        const std::vector<Segment>& segments,
                                        const std::vector<int>& dofs);

/// Energy Gram (k grad u, grad v) over the squares of `region`, restricted to `dofs`.
/// `kernel_dim` is 1 when the constants lie in span(dofs) and must be quotiented out.
InnerProductSpace assemble_energy_product(const RectMesh& mesh, const Box& region,
                                          const PdeSpec& pde, const std::vector<int>& dofs,
                                          int kernel_dim);

/// Principal submatrix a(dofs, dofs).
SparseMatrix submatrix(const SparseMatrix& a, const std::vector<int>& rows,
                       const std::vector<int>& cols);

}  // namespace rrf::fem
