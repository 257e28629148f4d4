#include "mcal/moments.hpp"

#include <cmath>
#include <stdexcept>

namespace mcal {

MomentFamily::MomentFamily(int count, double half_width) : count(count), half_width(half_width) {
  if (count < 2) throw std::invalid_argument("MomentFamily: need at least 2 hat functions");
  if (!(half_width > 0.0)) throw std::invalid_argument("MomentFamily: half_width must be positive");
}

std::vector<double> MomentFamily::nodes() const {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int m = 0; m < count; ++m) out[static_cast<std::size_t>(m)] = node(m);
  return out;
}

double MomentFamily::hat(int m, double x) const {
  const double t = 1.0 - std::abs(x - node(m)) / spacing();
  return t > 0.0 ? t : 0.0;
}

PiecewiseLinear MomentFamily::hat_function(int m) const {
  PiecewiseLinear f;
  f.breaks = nodes();
  f.values.assign(static_cast<std::size_t>(count), 0.0);
  f.values[static_cast<std::size_t>(m)] = 1.0;
  return f;
}

PiecewiseLinear MomentFamily::combine(const Eigen::VectorXd& y) const {
  if (y.size() != count) throw std::invalid_argument("MomentFamily::combine: size mismatch");
  PiecewiseLinear f;
  f.breaks = nodes();
  f.values.assign(y.data(), y.data() + y.size());
  return f;
}

Eigen::VectorXd target_moments(const MomentFamily& family, const PiecewiseQuadratic& rho) {
  Eigen::VectorXd b(family.count);
  for (int m = 0; m < family.count; ++m) {
    b[m] = rho.integral_against(family.hat_function(m));
  }
  return b;
}

std::vector<Eigen::MatrixXd> pool_moment_matrices(const MomentFamily& family,
                                                  const PairBasis& basis, const Mesh1D& mesh,
                                                  const TriDiagSym& mass,
                                                  const Eigen::MatrixXd& pool) {
  const int K = static_cast<int>(pool.cols());
  std::vector<Eigen::MatrixXd> A(static_cast<std::size_t>(family.count),
                                 Eigen::MatrixXd::Zero(K, K));
  for (int k = 0; k < K; ++k) {
    for (int l = k; l < K; ++l) {
      const PiecewiseQuadratic rho = pair_density(basis, mesh, mass, pool.col(k), pool.col(l));
      for (int m = 0; m < family.count; ++m) {
        const double v = rho.integral_against(family.hat_function(m));
        A[static_cast<std::size_t>(m)](k, l) = v;
        A[static_cast<std::size_t>(m)](l, k) = v;
      }
    }
  }
  return A;
}

RowSpace rowspace_basis(const std::vector<Eigen::MatrixXd>& moment_matrices,
                        double rel_threshold) {
  const int M = static_cast<int>(moment_matrices.size());
  if (M == 0) throw std::invalid_argument("rowspace_basis: empty moment family");
  const int K = static_cast<int>(moment_matrices.front().rows());
  Eigen::MatrixXd stacked(M, K * K);
  for (int m = 0; m < M; ++m) {
    Eigen::MatrixXd flat = moment_matrices[static_cast<std::size_t>(m)];
    stacked.row(m) = Eigen::Map<const Eigen::VectorXd>(flat.data(), K * K).transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeThinU);
  const Eigen::VectorXd sv = svd.singularValues();
  RowSpace out;
  if (sv.size() == 0 || !(sv[0] > 0.0)) {
    out.degenerate = true;
    out.basis.resize(M, 0);
    return out;
  }
  const double cutoff = rel_threshold * sv[0];
  int rank = 0;
  while (rank < sv.size() && sv[rank] > cutoff) ++rank;
  out.degenerate = (rank == 0);
  out.basis = svd.matrixU().leftCols(rank);
  return out;
}

}  // namespace mcal
