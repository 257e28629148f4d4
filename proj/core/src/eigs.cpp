#include "mcal/eigs.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace mcal {

WedgePreconditioner::WedgePreconditioner(const PairBasis& basis, const TriDiagSym& stiffness,
                                         const TriDiagSym& mass, double shift)
    : basis_(&basis), shift_(shift) {
  if (stiffness.size() != basis.n1 || mass.size() != basis.n1) {
    throw std::invalid_argument("WedgePreconditioner: dimension mismatch");
  }
  if (!(shift > 0.0)) throw std::invalid_argument("WedgePreconditioner: shift must be positive");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(stiffness.dense(), mass.dense());
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("WedgePreconditioner: one-body eigendecomposition failed");
  }
  modes_ = es.eigenvectors();  // M-orthonormal
  lambdas_ = es.eigenvalues();
}

void WedgePreconditioner::set_shift(double shift) {
  if (!(shift > 0.0)) throw std::invalid_argument("WedgePreconditioner: shift must be positive");
  shift_ = shift;
}

Eigen::VectorXd WedgePreconditioner::apply(const Eigen::VectorXd& r) const {
  const Eigen::MatrixXd rm = wedge_matrix(*basis_, r);
  Eigen::MatrixXd rhat = modes_.transpose() * rm * modes_;
  for (int p = 0; p < basis_->n1; ++p) {
    for (int q = 0; q < basis_->n1; ++q) {
      rhat(p, q) /= 0.5 * (lambdas_[p] + lambdas_[q]) + shift_;
    }
  }
  const Eigen::MatrixXd z = modes_ * rhat * modes_.transpose();
  return wedge_vector(*basis_, z);
}

Eigen::MatrixXd WedgePreconditioner::apply_block(const Eigen::MatrixXd& r) const {
  Eigen::MatrixXd out(r.rows(), r.cols());
  for (int c = 0; c < r.cols(); ++c) out.col(c) = apply(r.col(c));
  return out;
}

namespace {

Eigen::MatrixXd loewdin_pass(const Eigen::MatrixXd& v, const SpMat& g, double rel_cutoff) {
  Eigen::MatrixXd gram = v.transpose() * (g * v);
  gram = 0.5 * (gram + gram.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double lmax = ev.maxCoeff();
  if (!(lmax > 0.0)) return Eigen::MatrixXd(v.rows(), 0);
  const double cutoff = rel_cutoff * lmax;
  std::vector<int> keep;
  for (int k = static_cast<int>(ev.size()) - 1; k >= 0; --k) {
    if (ev[k] > cutoff) keep.push_back(k);
  }
  Eigen::MatrixXd out(v.rows(), static_cast<int>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    out.col(static_cast<int>(c)) = v * es.eigenvectors().col(keep[c]) / std::sqrt(ev[keep[c]]);
  }
  return out;
}

// G-orthonormalize columns of v, dropping near-null directions. Columns are
// unit-scaled first and the Loewdin step is applied twice: the roundoff of a
// single pass is eps * cond(Gram), which is far too coarse when residual and
// guard columns differ by many orders of magnitude.
Eigen::MatrixXd g_orthonormalize(const Eigen::MatrixXd& v, const SpMat& g, double rel_cutoff) {
  if (v.cols() == 0) return v;
  Eigen::MatrixXd b(v.rows(), v.cols());
  int kept = 0;
  for (int c = 0; c < v.cols(); ++c) {
    const double nrm = std::sqrt(std::max(0.0, v.col(c).dot(g * v.col(c))));
    if (nrm > 0.0) b.col(kept++) = v.col(c) / nrm;
  }
  if (kept == 0) return Eigen::MatrixXd(v.rows(), 0);
  Eigen::MatrixXd out = loewdin_pass(b.leftCols(kept), g, rel_cutoff);
  if (out.cols() == 0) return out;
  return loewdin_pass(out, g, 1e-14);
}

EigResult dense_solve(const SpMat& H, const SpMat& G, int q) {
  const Eigen::MatrixXd Hd = Eigen::MatrixXd(H);
  const Eigen::MatrixXd Gd = Eigen::MatrixXd(G);
  if (Eigen::LLT<Eigen::MatrixXd>(0.5 * (Gd + Gd.transpose())).info() != Eigen::Success) {
    throw std::invalid_argument("smallest_eigpairs: inner-product matrix is not positive definite");
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (Hd + Hd.transpose()), 0.5 * (Gd + Gd.transpose()));
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("smallest_eigpairs: dense generalized solve failed (G not SPD?)");
  }
  EigResult out;
  out.dense_path = true;
  out.values = es.eigenvalues().head(q);
  out.vectors = es.eigenvectors().leftCols(q);
  out.residuals.resize(q);
  for (int k = 0; k < q; ++k) {
    out.residuals[k] = (H * out.vectors.col(k) - out.values[k] * (G * out.vectors.col(k))).norm();
  }
  return out;
}

EigResult lobpcg_solve(const SpMat& H, const SpMat& G, int q, const EigOptions& opt) {
  const int n = static_cast<int>(H.rows());
  const int m = std::min(n, q + 2);  // guard vectors

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd X(n, m);
  for (int c = 0; c < m; ++c) {
    for (int r = 0; r < n; ++r) X(r, c) = dist(rng);
  }
  X = g_orthonormalize(X, G, 1e-12);
  if (X.cols() < m) throw std::runtime_error("smallest_eigpairs: degenerate starting block");

  Eigen::MatrixXd P(n, 0);
  Eigen::VectorXd theta;
  Eigen::VectorXd best_res = Eigen::VectorXd::Constant(q, 1e300);
  int iter = 0;
  for (; iter < opt.max_iter; ++iter) {
    // Rayleigh-Ritz within the current block.
    Eigen::MatrixXd HX = H * X;
    Eigen::MatrixXd small = X.transpose() * HX;
    small = 0.5 * (small + small.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(small);
    X = (X * es.eigenvectors()).eval();
    HX = (HX * es.eigenvectors()).eval();
    theta = es.eigenvalues();

    const Eigen::MatrixXd GX = G * X;
    Eigen::MatrixXd R = HX - GX * theta.asDiagonal();
    Eigen::VectorXd res(m);
    for (int c = 0; c < m; ++c) res[c] = R.col(c).norm();
    best_res = res.head(q);
    if ((res.head(q).array() <= opt.tol).all()) break;

    Eigen::MatrixXd W =
        opt.preconditioner != nullptr ? opt.preconditioner->apply_block(R) : Eigen::MatrixXd(R);

    // Expansion block [W, P], G-orthogonalized against X before Loewdin
    // orthonormalization: near convergence W is nearly parallel to X, and
    // orthonormalizing the stacked basis in one shot squares that ill
    // conditioning and stalls the residuals around sqrt(machine epsilon).
    Eigen::MatrixXd S(n, W.cols() + P.cols());
    S << W, P;
    S -= X * (GX.transpose() * S);
    S -= X * (GX.transpose() * S);
    S = g_orthonormalize(S, G, 1e-12);
    if (S.cols() == 0) break;  // no usable expansion direction left

    Eigen::MatrixXd V(n, X.cols() + S.cols());
    V << X, S;

    Eigen::MatrixXd vh = V.transpose() * (H * V);
    vh = 0.5 * (vh + vh.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rr(vh);
    const Eigen::MatrixXd Y = rr.eigenvectors().leftCols(m);
    Eigen::MatrixXd Xnew = V * Y;

    // Conjugate-direction block: the part of the update G-orthogonal to X.
    P = g_orthonormalize(S * Y.bottomRows(S.cols()), G, 1e-10);
    if (P.cols() > m) P = P.leftCols(m).eval();
    X = Xnew;
    if (static_cast<int>(X.cols()) < m) {
      throw std::runtime_error("smallest_eigpairs: search space collapsed");
    }
  }

  if (!(best_res.array() <= opt.tol).all()) {
    std::ostringstream os;
    os << "smallest_eigpairs: no convergence after " << opt.max_iter
       << " iterations; residuals:";
    for (int k = 0; k < q; ++k) os << ' ' << best_res[k];
    throw std::runtime_error(os.str());
  }

  EigResult out;
  out.dense_path = false;
  out.iterations = iter;
  out.values = theta.head(q);
  out.vectors = X.leftCols(q);
  out.residuals = best_res;
  return out;
}

}  // namespace

EigResult smallest_eigpairs(const SpMat& H, const SpMat& G, int q, const EigOptions& options) {
  const int n = static_cast<int>(H.rows());
  if (H.cols() != n || G.rows() != n || G.cols() != n) {
    throw std::invalid_argument("smallest_eigpairs: dimension mismatch");
  }
  if (q < 1 || q > n) throw std::invalid_argument("smallest_eigpairs: bad eigenpair count");
  if (n <= options.dense_threshold) return dense_solve(H, G, q);
  return lobpcg_solve(H, G, q, options);
}

}  // namespace mcal
