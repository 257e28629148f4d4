#include "mcal/sparsify.hpp"

#include <cmath>
#include <stdexcept>

namespace mcal {

SparseState spectral_sparsify(const Eigen::MatrixXd& weight_matrix, const Eigen::MatrixXd& pool,
                              double drop_tol_rel) {
  const int K = static_cast<int>(weight_matrix.rows());
  if (weight_matrix.cols() != K) {
    throw std::invalid_argument("spectral_sparsify: weight matrix not square");
  }
  if (pool.cols() != K) throw std::invalid_argument("spectral_sparsify: pool size mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (weight_matrix + weight_matrix.transpose()));
  const Eigen::VectorXd ev = es.eigenvalues();  // ascending
  const double lmax = std::max(ev.maxCoeff(), 0.0);
  const double drop = drop_tol_rel * std::max(lmax, 1e-300);
  if (ev.minCoeff() < -10.0 * drop) {
    throw std::invalid_argument("spectral_sparsify: weight matrix is not PSD (min eigenvalue " +
                                std::to_string(ev.minCoeff()) + ")");
  }
  std::vector<int> keep;
  for (int k = K - 1; k >= 0; --k) {
    if (ev[k] > drop) keep.push_back(k);  // non-increasing order
  }
  SparseState out;
  out.weights.resize(static_cast<int>(keep.size()));
  out.states.resize(pool.rows(), static_cast<int>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    out.weights[static_cast<int>(c)] = ev[keep[c]];
    out.states.col(static_cast<int>(c)) = pool * es.eigenvectors().col(keep[c]);
  }
  return out;
}

CaratheodoryResult caratheodory_reduce(const Eigen::VectorXd& weights,
                                       const Eigen::MatrixXd& moment_vectors) {
  const int n0 = static_cast<int>(weights.size());
  const int J0 = static_cast<int>(moment_vectors.rows());
  if (moment_vectors.cols() != n0) {
    throw std::invalid_argument("caratheodory_reduce: atom count mismatch");
  }
  if (n0 == 0) throw std::invalid_argument("caratheodory_reduce: no atoms");
  for (int i = 0; i < n0; ++i) {
    if (!(weights[i] > 0.0)) {
      throw std::invalid_argument("caratheodory_reduce: weights must be positive");
    }
  }

  std::vector<int> idx(static_cast<std::size_t>(n0));
  for (int i = 0; i < n0; ++i) idx[static_cast<std::size_t>(i)] = i;
  Eigen::VectorXd alpha = weights;
  Eigen::MatrixXd mats = moment_vectors;

  while (static_cast<int>(idx.size()) > J0) {
    const int n = static_cast<int>(idx.size());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(mats, Eigen::ComputeFullV);
    Eigen::VectorXd null = svd.matrixV().col(n - 1);  // n > J0 so a null vector exists
    if (null.cwiseAbs().maxCoeff() == 0.0) {
      throw std::runtime_error("caratheodory_reduce: degenerate null vector");
    }
    if (null.maxCoeff() <= 0.0) null = -null;  // make sure some component is positive
    // Shift alpha -> alpha - t * null until the first weight hits zero.
    // Ties (within relative 1e-12) break toward the smallest original index.
    double t = 0.0;
    int drop = -1;
    for (int i = 0; i < n; ++i) {
      if (!(null[i] > 0.0)) continue;
      const double ti = alpha[i] / null[i];
      if (drop < 0 || ti < t * (1.0 - 1e-12)) {
        t = ti;
        drop = i;
      } else if (ti <= t * (1.0 + 1e-12) &&
                 idx[static_cast<std::size_t>(i)] < idx[static_cast<std::size_t>(drop)]) {
        drop = i;
      }
    }
    if (drop < 0) {
      throw std::runtime_error("caratheodory_reduce: null direction has no positive component");
    }
    alpha -= t * null;
    // Remove the dropped atom and any weight driven to (numerical) zero.
    std::vector<int> survivors;
    const double zero_tol = 1e-14 * weights.maxCoeff();
    for (int i = 0; i < n; ++i) {
      if (i == drop) continue;
      if (alpha[i] <= zero_tol) continue;
      survivors.push_back(i);
    }
    std::vector<int> new_idx;
    Eigen::VectorXd new_alpha(static_cast<int>(survivors.size()));
    Eigen::MatrixXd new_mats(J0, static_cast<int>(survivors.size()));
    for (std::size_t c = 0; c < survivors.size(); ++c) {
      new_idx.push_back(idx[static_cast<std::size_t>(survivors[c])]);
      new_alpha[static_cast<int>(c)] = alpha[survivors[c]];
      new_mats.col(static_cast<int>(c)) = mats.col(survivors[c]);
    }
    idx = std::move(new_idx);
    alpha = std::move(new_alpha);
    mats = std::move(new_mats);
    if (idx.empty()) {
      throw std::runtime_error("caratheodory_reduce: all atoms eliminated");
    }
  }

  CaratheodoryResult out;
  out.indices = idx;
  out.weights = alpha;
  return out;
}

}  // namespace mcal
