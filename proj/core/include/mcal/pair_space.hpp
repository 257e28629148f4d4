#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <utility>

#include "mcal/fem1d.hpp"
#include "mcal/piecewise.hpp"

namespace mcal {

using SpMat = Eigen::SparseMatrix<double>;

/// Antisymmetric two-particle basis {phi_i ^ phi_j, i < j} over the interior
/// one-body hat functions.
struct PairBasis {
  int n1 = 0;
  int n2 = 0;

  explicit PairBasis(int one_body_dofs);

  int index(int i, int j) const;  // requires i < j
  std::pair<int, int> unindex(int a) const;

 private:
  std::vector<int> row_offsets_;
};

struct PairWavefunction {
  Eigen::VectorXd coeffs;
  bool normalized = false;
};

/// Interaction kernel w(x - y). Constant is a test hook for the degenerate
/// kernel identities.
struct KernelSpec {
  enum class Type { Softcore, Exact, Constant };
  Type type = Type::Softcore;
  double eps = 1.0;    // softcore regularization
  double value = 1.0;  // constant kernel

  static KernelSpec softcore(double eps);
  static KernelSpec exact() { return {Type::Exact, 0.0, 0.0}; }
  static KernelSpec constant(double c) { return {Type::Constant, 0.0, c}; }
};

// Two-body Galerkin forms on the wedge basis.
SpMat assemble_pair_gram(const PairBasis& basis, const TriDiagSym& mass);
SpMat assemble_pair_kinetic(const PairBasis& basis, const TriDiagSym& stiffness,
                            const TriDiagSym& mass);
SpMat assemble_pair_onebody(const PairBasis& basis, const TriDiagSym& vmass,
                            const TriDiagSym& mass);
SpMat assemble_interaction(const PairBasis& basis, const Mesh1D& mesh, const KernelSpec& kernel);

/// Coefficient vector <-> antisymmetric one-body matrix with the wedge 1/sqrt(2)
/// folded in, so that c^T G d = tr(C^T M D M).
Eigen::MatrixXd wedge_matrix(const PairBasis& basis, const Eigen::VectorXd& coeffs);
Eigen::VectorXd wedge_vector(const PairBasis& basis, const Eigen::MatrixXd& antisym);
/// Slater-determinant coefficients of u ^ v: c_ij = u_i v_j - u_j v_i.
Eigen::VectorXd wedge_of(const PairBasis& basis, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& v);

/// Cross pair density rho_ab(x) = 2 * integral of Psi_a(x,y) Psi_b(x,y) dy as an
/// exact per-element quadratic. rho_aa integrates to 2 for G-normalized a.
PiecewiseQuadratic pair_density(const PairBasis& basis, const Mesh1D& mesh, const TriDiagSym& mass,
                                const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct OrthoResult {
  Eigen::MatrixXd basis;  // n2 x rank, G-orthonormal
  int rank = 0;
};

/// G-orthonormal spanning set of the pool columns; directions whose pool-Gram
/// eigenvalue falls below rel_cutoff * lambda_max are treated as null.
OrthoResult gram_orthonormalize(const Eigen::MatrixXd& pool, const SpMat& gram,
                                double rel_cutoff = 1e-10);

}  // namespace mcal
