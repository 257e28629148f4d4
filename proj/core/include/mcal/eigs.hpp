#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>

#include "mcal/fem1d.hpp"
#include "mcal/pair_space.hpp"

namespace mcal {

/// Approximate inverse of (T + shift * G) on the wedge space, built from the
/// one-body generalized eigendecomposition K u = lambda M u. In the spectral
/// wedge basis the kinetic form is diagonal with entries (lambda_p+lambda_q)/2
/// and the Gram is the identity, so the inverse is exact for the kinetic part.
class WedgePreconditioner {
 public:
  WedgePreconditioner(const PairBasis& basis, const TriDiagSym& stiffness, const TriDiagSym& mass,
                      double shift);

  Eigen::VectorXd apply(const Eigen::VectorXd& r) const;
  Eigen::MatrixXd apply_block(const Eigen::MatrixXd& r) const;

  double shift() const { return shift_; }
  void set_shift(double shift);

 private:
  const PairBasis* basis_;
  Eigen::MatrixXd modes_;    // M-orthonormal one-body eigenvectors
  Eigen::VectorXd lambdas_;  // one-body stiffness eigenvalues
  Eigen::MatrixXd mass_dense_;
  double shift_;
};

struct EigOptions {
  double tol = 1e-9;
  int max_iter = 800;
  std::uint64_t seed = 20240612;
  int dense_threshold = 1500;
  const WedgePreconditioner* preconditioner = nullptr;  // iterative path only
};

struct EigResult {
  Eigen::VectorXd values;     // ascending
  Eigen::MatrixXd vectors;    // G-orthonormal columns
  Eigen::VectorXd residuals;  // ||H x - lambda G x|| / ||x||_G
  int iterations = 0;
  bool dense_path = false;
};

/// q smallest eigenpairs of H x = lambda G x with H symmetric and G SPD.
/// Dense solve below `dense_threshold`, LOBPCG with G-inner-product
/// orthogonalization above it. Deterministic for a fixed seed.
EigResult smallest_eigpairs(const SpMat& H, const SpMat& G, int q, const EigOptions& options = {});

}  // namespace mcal
