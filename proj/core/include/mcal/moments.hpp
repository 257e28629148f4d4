#pragma once

#include <Eigen/Dense>

#include <vector>

#include "mcal/pair_space.hpp"
#include "mcal/piecewise.hpp"

namespace mcal {

/// P1 hat family on a uniform grid of `count` nodes over [-L, L], endpoints
/// included. The hats sum to one, so the constant function lies in their span.
struct MomentFamily {
  int count = 0;
  double half_width = 0.0;

  MomentFamily(int count, double half_width);

  double spacing() const { return 2.0 * half_width / (count - 1); }
  double node(int m) const { return -half_width + m * spacing(); }
  std::vector<double> nodes() const;
  double hat(int m, double x) const;
  PiecewiseLinear hat_function(int m) const;
  /// v = sum_m y_m phi_m as a piecewise-linear function.
  PiecewiseLinear combine(const Eigen::VectorXd& y) const;
};

/// b_m = integral of phi_m * rho; exact for piecewise-quadratic rho.
Eigen::VectorXd target_moments(const MomentFamily& family, const PiecewiseQuadratic& rho);

/// A_m[k,l] = integral of phi_m * rho_kl for a G-orthonormal pool given as
/// columns of `pool`. Sum over m equals 2 * Identity.
std::vector<Eigen::MatrixXd> pool_moment_matrices(const MomentFamily& family,
                                                  const PairBasis& basis, const Mesh1D& mesh,
                                                  const TriDiagSym& mass,
                                                  const Eigen::MatrixXd& pool);

struct RowSpace {
  Eigen::MatrixXd basis;  // M x rank, orthonormal columns
  bool degenerate = false;  // true when the constraint map is identically zero
};

/// Orthonormal basis of Ker(A)^perp in R^M for the map c -> sum_m c_m A_m,
/// so that the reduced constraint family is linearly independent.
RowSpace rowspace_basis(const std::vector<Eigen::MatrixXd>& moment_matrices,
                        double rel_threshold = 1e-11);

}  // namespace mcal
