#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace mcal {

/// Uniform P1 mesh on (-L, L) with homogeneous Dirichlet conditions.
/// Only interior nodes carry degrees of freedom.
struct Mesh1D {
  double half_width = 0.0;
  int intervals = 0;
  double h = 0.0;
  std::vector<double> nodes;

  int interior_dofs() const { return intervals - 1; }
  double node(int i) const { return nodes[static_cast<std::size_t>(i)]; }
  // Coordinate of interior DOF i (0-based), i.e. node i+1.
  double interior_node(int i) const { return nodes[static_cast<std::size_t>(i) + 1]; }
};

Mesh1D build_mesh(double half_width, int intervals);

/// Symmetric tridiagonal bilinear form on the interior hat functions.
struct TriDiagSym {
  Eigen::VectorXd diag;
  Eigen::VectorXd off;  // size()-1 entries

  int size() const { return static_cast<int>(diag.size()); }
  double entry(int i, int j) const;
  Eigen::MatrixXd dense() const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  // Banded product A * X with a dense matrix, O(n^2).
  Eigen::MatrixXd apply_dense(const Eigen::MatrixXd& x) const;
};

TriDiagSym assemble_mass(const Mesh1D& mesh);
TriDiagSym assemble_stiffness(const Mesh1D& mesh);

/// Galerkin form of x -> v(x) with 4-point Gauss quadrature per element.
/// Elements are split at `breakpoints` so piecewise-linear potentials with
/// kinks off the mesh are still integrated exactly.
TriDiagSym assemble_weighted_mass(const Mesh1D& mesh, const std::function<double(double)>& v,
                                  const std::vector<double>& breakpoints = {});

/// Nodal interpolation onto interior DOFs; boundary values are dropped
/// (Dirichlet space), so f(±L) ≠ 0 is silently truncated.
Eigen::VectorXd interpolate(const Mesh1D& mesh, const std::function<double(double)>& f);

}  // namespace mcal
