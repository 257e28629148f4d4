#pragma once

#include <Eigen/Dense>

#include <vector>

namespace mcal {

/// Finite mixture sum_k w_k |Psi_k><Psi_k| with positive non-increasing
/// weights and G-orthonormal states (columns).
struct SparseState {
  Eigen::VectorXd weights;
  Eigen::MatrixXd states;

  int size() const { return static_cast<int>(weights.size()); }
};

/// Eigendecompose the PSD weight matrix, drop occupations below
/// drop_tol_rel * lambda_max, and rotate the pool accordingly. Throws if the
/// matrix is non-PSD beyond 10x the drop tolerance.
SparseState spectral_sparsify(const Eigen::MatrixXd& weight_matrix, const Eigen::MatrixXd& pool,
                              double drop_tol_rel = 1e-10);

struct CaratheodoryResult {
  std::vector<int> indices;   // kept atoms, referring to the input ordering
  Eigen::VectorXd weights;    // new positive weights, aligned with indices
};

/// Reduce a discrete measure sum_i alpha_i delta_{m_i} to at most J0 atoms with
/// the same weighted moment sum, where m_i are the columns of moment_vectors
/// (J0 rows). Null combinations come from an SVD; weight ties break toward the
/// smallest index.
CaratheodoryResult caratheodory_reduce(const Eigen::VectorXd& weights,
                                       const Eigen::MatrixXd& moment_vectors);

}  // namespace mcal
