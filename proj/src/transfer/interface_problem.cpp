#include "rrf/transfer.hpp"

namespace rrf {

fem::RectMesh interface_problem_mesh(const InterfaceProblemConfig& c) {
  if (!(c.half_length > 0.0) || !(c.width > 0.0) || c.inverse_h < 1) {
    throw DomainError("interface problem: invalid geometry");
  }
  fem::BoundarySpec bc;
  bc.left = bc.right = fem::BoundaryTag::gamma_out;
  return fem::RectMesh({-c.half_length, c.half_length, 0.0, c.width}, 1.0 / c.inverse_h,
                       fem::ElementKind::q1, bc);
}

InterfaceProblem build_interface_problem(const InterfaceProblemConfig& c) {
  auto mesh = std::make_shared<const fem::RectMesh>(interface_problem_mesh(c));
  const double l = c.half_length;
  const double w = c.width;

  const std::vector<fem::Segment> outer = {{{-l, 0.0}, {-l, w}}, {{l, 0.0}, {l, w}}};
  const std::vector<fem::Segment> inner = {{{0.0, 0.0}, {0.0, w}}};

  TransferSetup s;
  const fem::PdeSpec pde = c.kappa > 0.0 ? fem::PdeSpec::helmholtz(c.kappa) : fem::PdeSpec::laplace();
  s.system = fem::assemble_system(*mesh, pde);
  s.source_dofs = mesh->nodes_with_tag(fem::BoundaryTag::gamma_out);
  s.range_dofs = fem::segment_nodes(*mesh, inner);
  s.source_space = fem::assemble_interface_l2(*mesh, outer, s.source_dofs);
  s.range_space = fem::assemble_interface_l2(*mesh, inner, s.range_dofs);
  s.placement = KernelPlacement::none;

  InterfaceProblem p;
  p.config = c;
  p.mesh = mesh;
  p.op = std::make_shared<const TransferOperator>(std::move(s));
  return p;
}

}  // namespace rrf
