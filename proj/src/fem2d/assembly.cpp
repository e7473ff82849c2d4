#include "rrf/fem2d.hpp"

#include <algorithm>
#include <cmath>

namespace rrf::fem {

namespace {

// Bilinear element on a square, nodes counter-clockwise from the lower left corner.
// The stiffness matrix of a square does not depend on its size.
constexpr double kQ1Stiffness[4][4] = {{4, -1, -2, -1}, {-1, 4, -1, -2}, {-2, -1, 4, -1},
                                       {-1, -2, -1, 4}};
constexpr double kQ1Mass[4][4] = {{4, 2, 1, 2}, {2, 4, 2, 1}, {1, 2, 4, 2}, {2, 1, 2, 4}};

struct P1Element {
  double stiffness[3][3];
  double area;
};

P1Element p1_element(const Point (&p)[3]) {
  P1Element e{};
  const double det = (p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y);
  e.area = 0.5 * std::abs(det);
  double gx[3], gy[3];
  for (int i = 0; i < 3; ++i) {
    const Point& a = p[(i + 1) % 3];
    const Point& b = p[(i + 2) % 3];
    gx[i] = (a.y - b.y) / det;
    gy[i] = (b.x - a.x) / det;
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) e.stiffness[i][j] = e.area * (gx[i] * gx[j] + gy[i] * gy[j]);
  }
  return e;
}

double coefficient_at(const PdeSpec& pde, const Box& square) {
  return pde.kind == PdeSpec::Kind::diffusion ? pde.coefficient.average(square) : 1.0;
}

// Calls f(nodes, count, local_stiffness, local_mass) per element of the selected squares,
// with unit coefficient.
template <class F>
void for_each_element(const RectMesh& mesh, const Box* region, F&& f) {
  const double h = mesh.h();
  // crisscross triangles in local coordinates of the unit square, centre last
  static const P1Element tri = [] {
    const Point pts[3] = {{0, 0}, {1, 0}, {0.5, 0.5}};
    return p1_element(pts);
  }();
  for (int j = 0; j < mesh.ny(); ++j) {
    for (int i = 0; i < mesh.nx(); ++i) {
      if (region && !region->contains_open(mesh.square_centre(i, j))) continue;
      const Box c = mesh.square(i, j);
      const int corners[4] = {mesh.corner_node(i, j), mesh.corner_node(i + 1, j),
                              mesh.corner_node(i + 1, j + 1), mesh.corner_node(i, j + 1)};
      if (mesh.kind() == ElementKind::q1) {
        double k[4][4], m[4][4];
        for (int a = 0; a < 4; ++a) {
          for (int b = 0; b < 4; ++b) {
            k[a][b] = kQ1Stiffness[a][b] / 6.0;
            m[a][b] = kQ1Mass[a][b] * h * h / 36.0;
          }
        }
        f(c, corners, 4, &k[0][0], &m[0][0]);
      } else {
        const int centre = mesh.centre_node(i, j);
        const double area = tri.area * h * h;
        for (int t = 0; t < 4; ++t) {
          const int nodes[3] = {corners[t], corners[(t + 1) % 4], centre};
          double k[3][3], m[3][3];
          for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
              k[a][b] = tri.stiffness[a][b];
              m[a][b] = area / 12.0 * (a == b ? 2.0 : 1.0);
            }
          }
          f(c, nodes, 3, &k[0][0], &m[0][0]);
        }
      }
    }
  }
}

SparseMatrix from_triplets(Index n, const std::vector<Triplet>& t) {
  SparseMatrix a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  return a;
}

std::size_t triplet_estimate(const RectMesh& mesh) {
  return static_cast<std::size_t>(mesh.num_squares()) *
         (mesh.kind() == ElementKind::q1 ? 16u : 36u);
}

}  // namespace

SparseMatrix assemble_stiffness(const RectMesh& mesh, const PdeSpec& pde, const Box* region) {
  pde.validate();
  std::vector<Triplet> t;
  t.reserve(triplet_estimate(mesh));
  for_each_element(mesh, region,
                   [&](const Box& c, const int* nodes, int n, const double* k, const double*) {
                     const double coeff = coefficient_at(pde, c);
                     for (int a = 0; a < n; ++a) {
                       for (int b = 0; b < n; ++b) t.emplace_back(nodes[a], nodes[b], coeff * k[a * n + b]);
                     }
                   });
  return from_triplets(mesh.num_nodes(), t);
}

SparseMatrix assemble_mass(const RectMesh& mesh, const Box* region) {
  std::vector<Triplet> t;
  t.reserve(triplet_estimate(mesh));
  for_each_element(mesh, region, [&](const Box&, const int* nodes, int n, const double*, const double* m) {
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) t.emplace_back(nodes[a], nodes[b], m[a * n + b]);
    }
  });
  return from_triplets(mesh.num_nodes(), t);
}

SparseMatrix assemble_operator(const RectMesh& mesh, const PdeSpec& pde) {
  pde.validate();
  const double shift = pde.kind == PdeSpec::Kind::helmholtz ? pde.kappa * pde.kappa : 0.0;
  std::vector<Triplet> t;
  t.reserve(triplet_estimate(mesh));
  for_each_element(mesh, nullptr,
                   [&](const Box& c, const int* nodes, int n, const double* k, const double* m) {
                     const double coeff = coefficient_at(pde, c);
                     for (int a = 0; a < n; ++a) {
                       for (int b = 0; b < n; ++b) {
                         t.emplace_back(nodes[a], nodes[b],
                                        coeff * k[a * n + b] - shift * m[a * n + b]);
                       }
                     }
                   });
  return from_triplets(mesh.num_nodes(), t);
}

SparseMatrix constrain_rows(const SparseMatrix& a, const std::vector<int>& rows) {
  std::vector<char> fixed(static_cast<std::size_t>(a.rows()), 0);
  for (int r : rows) {
    if (r < 0 || r >= a.rows()) throw DimensionError("constrain_rows: row out of range");
    fixed[static_cast<std::size_t>(r)] = 1;
  }
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros()) + rows.size());
  for (Index j = 0; j < a.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(a, j); it; ++it) {
      if (!fixed[static_cast<std::size_t>(it.row())]) t.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (int r : rows) t.emplace_back(r, r, 1.0);
  SparseMatrix out(a.rows(), a.cols());
  // duplicates in `rows` would sum; keep the diagonal exactly one
  out.setFromTriplets(t.begin(), t.end(), [](double, double b) { return b; });
  out.makeCompressed();
  return out;
}

SparseMatrix assemble_system(const RectMesh& mesh, const PdeSpec& pde) {
  std::vector<int> fixed;
  for (Index k = 0; k < mesh.num_nodes(); ++k) {
    const BoundaryTag tag = mesh.tag(k);
    if (tag == BoundaryTag::gamma_out || tag == BoundaryTag::sigma_d) fixed.push_back(static_cast<int>(k));
  }
  return constrain_rows(assemble_operator(mesh, pde), fixed);
}

Vector assemble_load(const RectMesh& mesh, const PiecewiseConstant& f) {
  Vector b = Vector::Zero(mesh.num_nodes());
  const double h2 = mesh.h() * mesh.h();
  for (int j = 0; j < mesh.ny(); ++j) {
    for (int i = 0; i < mesh.nx(); ++i) {
      const double v = f.average(mesh.square(i, j));
      if (v == 0.0) continue;
      const int corners[4] = {mesh.corner_node(i, j), mesh.corner_node(i + 1, j),
                              mesh.corner_node(i + 1, j + 1), mesh.corner_node(i, j + 1)};
      if (mesh.kind() == ElementKind::q1) {
        for (int c : corners) b[c] += 0.25 * v * h2;
      } else {
        for (int c : corners) b[c] += v * h2 / 6.0;
        b[mesh.centre_node(i, j)] += v * h2 / 3.0;
      }
    }
  }
  return b;
}

namespace {

// Grid nodes from a to b along one mesh line, inclusive.
std::vector<int> walk_segment(const RectMesh& mesh, const Segment& s) {
  const double tol = 1e-9 * mesh.h();
  const bool vertical = std::abs(s.a.x - s.b.x) <= tol;
  const bool horizontal = std::abs(s.a.y - s.b.y) <= tol;
  if (vertical == horizontal) throw DomainError("interface segment is not axis-aligned");
  if (!mesh.bounds().contains_closed(s.a, tol) || !mesh.bounds().contains_closed(s.b, tol)) {
    throw DomainError("interface segment leaves the mesh");
  }
  const int first = mesh.locate_corner(s.a);
  const int last = mesh.locate_corner(s.b);
  const int w = mesh.nx() + 1;
  int i0 = first % w, j0 = first / w, i1 = last % w, j1 = last / w;
  if (i0 > i1) std::swap(i0, i1);
  if (j0 > j1) std::swap(j0, j1);
  std::vector<int> out;
  if (vertical) {
    for (int j = j0; j <= j1; ++j) out.push_back(mesh.corner_node(i0, j));
  } else {
    for (int i = i0; i <= i1; ++i) out.push_back(mesh.corner_node(i, j0));
  }
  return out;
}

}  // namespace

std::vector<int> segment_nodes(const RectMesh& mesh, const std::vector<Segment>& segments) {
  std::vector<int> out;
  for (const auto& s : segments) {
    const auto nodes = walk_segment(mesh, s);
    out.insert(out.end(), nodes.begin(), nodes.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SparseMatrix assemble_interface_mass(const RectMesh& mesh, const std::vector<Segment>& segments,
                                     const std::vector<int>& dofs) {
  std::vector<int> local(static_cast<std::size_t>(mesh.num_nodes()), -1);
  for (std::size_t k = 0; k < dofs.size(); ++k) {
    const int d = dofs[k];
    if (d < 0 || d >= mesh.num_nodes()) throw DimensionError("interface dof out of range");
    local[static_cast<std::size_t>(d)] = static_cast<int>(k);
  }
  std::vector<char> covered(dofs.size(), 0);
  std::vector<Triplet> t;
  const double h = mesh.h();
  for (const auto& s : segments) {
    const auto nodes = walk_segment(mesh, s);
    if (nodes.size() < 2) throw DomainError("interface segment shorter than one cell");
    for (std::size_t e = 0; e + 1 < nodes.size(); ++e) {
      const int ids[2] = {local[static_cast<std::size_t>(nodes[e])],
                          local[static_cast<std::size_t>(nodes[e + 1])]};
      for (int a = 0; a < 2; ++a) {
        if (ids[a] < 0) continue;
        covered[static_cast<std::size_t>(ids[a])] = 1;
        for (int b = 0; b < 2; ++b) {
          if (ids[b] < 0) continue;
          t.emplace_back(ids[a], ids[b], h / 6.0 * (a == b ? 2.0 : 1.0));
        }
      }
    }
  }
  if (std::find(covered.begin(), covered.end(), 0) != covered.end()) {
    throw DomainError("interface dof does not lie on any segment");
  }
  const auto n = static_cast<Index>(dofs.size());
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

InnerProductSpace assemble_interface_l2(const RectMesh& mesh, const std::vector<Segment>& segments,
                                        const std::vector<int>& dofs) {
  return InnerProductSpace(assemble_interface_mass(mesh, segments, dofs));
}

SparseMatrix submatrix(const SparseMatrix& a, const std::vector<int>& rows,
                       const std::vector<int>& cols) {
  std::vector<int> rmap(static_cast<std::size_t>(a.rows()), -1);
  std::vector<int> cmap(static_cast<std::size_t>(a.cols()), -1);
  for (std::size_t k = 0; k < rows.size(); ++k) rmap.at(static_cast<std::size_t>(rows[k])) = static_cast<int>(k);
  for (std::size_t k = 0; k < cols.size(); ++k) cmap.at(static_cast<std::size_t>(cols[k])) = static_cast<int>(k);
  std::vector<Triplet> t;
  for (int c : cols) {
    for (SparseMatrix::InnerIterator it(a, c); it; ++it) {
      const int r = rmap[static_cast<std::size_t>(it.row())];
      if (r >= 0) t.emplace_back(r, cmap[static_cast<std::size_t>(c)], it.value());
    }
  }
  SparseMatrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  out.setFromTriplets(t.begin(), t.end());
  out.makeCompressed();
  return out;
}

InnerProductSpace assemble_energy_product(const RectMesh& mesh, const Box& region,
                                          const PdeSpec& pde, const std::vector<int>& dofs,
                                          int kernel_dim) {
  if (dofs.empty()) throw DomainError("assemble_energy_product: empty subdomain");
  const SparseMatrix k = assemble_stiffness(mesh, pde, &region);
  return InnerProductSpace(submatrix(k, dofs, dofs), kernel_dim);
}

}  // namespace rrf::fem
