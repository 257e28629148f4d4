#include "mcal/pair_space.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "mcal/quadrature.hpp"

namespace mcal {

PairBasis::PairBasis(int one_body_dofs) : n1(one_body_dofs) {
  if (n1 < 2) throw std::invalid_argument("PairBasis: need at least 2 one-body DOFs");
  n2 = n1 * (n1 - 1) / 2;
  row_offsets_.resize(static_cast<std::size_t>(n1));
  int off = 0;
  for (int i = 0; i < n1; ++i) {
    row_offsets_[static_cast<std::size_t>(i)] = off;
    off += n1 - i - 1;
  }
}

int PairBasis::index(int i, int j) const {
  return row_offsets_[static_cast<std::size_t>(i)] + (j - i - 1);
}

std::pair<int, int> PairBasis::unindex(int a) const {
  // row_offsets_ is increasing; find the last i with offset <= a.
  const auto it = std::upper_bound(row_offsets_.begin(), row_offsets_.end(), a);
  const int i = static_cast<int>(it - row_offsets_.begin()) - 1;
  const int j = i + 1 + (a - row_offsets_[static_cast<std::size_t>(i)]);
  return {i, j};
}

KernelSpec KernelSpec::softcore(double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("KernelSpec: softcore eps must be positive");
  return {Type::Softcore, eps, 0.0};
}

namespace {

// scale * (P_ik Q_jl + Q_ik P_jl - P_il Q_jk - Q_il P_jk) over the wedge basis.
SpMat assemble_tensor_pair(const PairBasis& basis, const TriDiagSym& p, const TriDiagSym& q,
                           double scale) {
  const int n1 = basis.n1;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(basis.n2) * 16);
  std::vector<int> cand;
  for (int i = 0; i < n1; ++i) {
    for (int j = i + 1; j < n1; ++j) {
      const int row = basis.index(i, j);
      cand.clear();
      for (int base : {i, j}) {
        for (int d = -1; d <= 1; ++d) {
          const int k = base + d;
          if (k >= 0 && k < n1) cand.push_back(k);
        }
      }
      std::sort(cand.begin(), cand.end());
      cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
      for (std::size_t a = 0; a < cand.size(); ++a) {
        for (std::size_t b = a + 1; b < cand.size(); ++b) {
          const int k = cand[a], l = cand[b];
          const double val = scale * (p.entry(i, k) * q.entry(j, l) + q.entry(i, k) * p.entry(j, l) -
                                      p.entry(i, l) * q.entry(j, k) - q.entry(i, l) * p.entry(j, k));
          if (val != 0.0) trip.emplace_back(row, basis.index(k, l), val);
        }
      }
    }
  }
  SpMat m(basis.n2, basis.n2);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

}  // namespace

SpMat assemble_pair_gram(const PairBasis& basis, const TriDiagSym& mass) {
  return assemble_tensor_pair(basis, mass, mass, 0.5);
}

SpMat assemble_pair_kinetic(const PairBasis& basis, const TriDiagSym& stiffness,
                            const TriDiagSym& mass) {
  return assemble_tensor_pair(basis, stiffness, mass, 0.5);
}

SpMat assemble_pair_onebody(const PairBasis& basis, const TriDiagSym& vmass,
                            const TriDiagSym& mass) {
  return assemble_tensor_pair(basis, vmass, mass, 1.0);
}

namespace {

struct KernelEval {
  KernelSpec spec;
  double operator()(double r) const {
    switch (spec.type) {
      case KernelSpec::Type::Softcore:
        return 1.0 / std::sqrt(r * r + spec.eps * spec.eps);
      case KernelSpec::Type::Exact:
        // The wedge integrand vanishes quadratically on the diagonal, so the
        // limit contribution at r = 0 is zero.
        return std::abs(r) > 0.0 ? 1.0 / std::abs(r) : 0.0;
      case KernelSpec::Type::Constant:
        return spec.value;
    }
    return 0.0;
  }
};

struct LocalWedge {
  int i, j;  // global wedge pair, i < j
  int lin;   // linear wedge index
};

// Interior hat `dof` evaluated at z, restricted to element [el, er].
inline double hat_on_element(const Mesh1D& mesh, int dof, double z, double el, double er) {
  const double xc = mesh.interior_node(dof);
  if (std::abs(xc - el) < 0.5 * mesh.h) return (er - z) / mesh.h;  // descending branch
  if (std::abs(xc - er) < 0.5 * mesh.h) return (z - el) / mesh.h;  // ascending branch
  return 0.0;
}

// Quadrature accumulation for one rectangular sub-cell of an element pair.
void accumulate_cell(double xl, double xr, double yl, double yr, const KernelEval& kernel,
                     const Mesh1D& mesh, int ex, int ey, const std::vector<LocalWedge>& wedges,
                     Eigen::MatrixXd& local) {
  const GaussRule rule = gauss4();
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const int nw = static_cast<int>(wedges.size());
  Eigen::VectorXd psi(nw);
  const double exl = mesh.node(ex), exr = mesh.node(ex + 1);
  const double eyl = mesh.node(ey), eyr = mesh.node(ey + 1);
  for (int gx = 0; gx < rule.count; ++gx) {
    const double x = xl + rule.nodes[gx] * (xr - xl);
    for (int gy = 0; gy < rule.count; ++gy) {
      const double y = yl + rule.nodes[gy] * (yr - yl);
      const double w = kernel(x - y) * rule.weights[gx] * rule.weights[gy] * (xr - xl) * (yr - yl);
      if (w == 0.0) continue;
      for (int a = 0; a < nw; ++a) {
        const int i = wedges[static_cast<std::size_t>(a)].i;
        const int j = wedges[static_cast<std::size_t>(a)].j;
        const double pxi = hat_on_element(mesh, i, x, exl, exr);
        const double pyi = hat_on_element(mesh, i, y, eyl, eyr);
        const double pxj = hat_on_element(mesh, j, x, exl, exr);
        const double pyj = hat_on_element(mesh, j, y, eyl, eyr);
        psi[a] = (pxi * pyj - pxj * pyi) * inv_sqrt2;
      }
      local.noalias() += w * psi * psi.transpose();
    }
  }
}

}  // namespace

SpMat assemble_interaction(const PairBasis& basis, const Mesh1D& mesh, const KernelSpec& kernel) {
  if (kernel.type == KernelSpec::Type::Softcore && !(kernel.eps > 0.0)) {
    throw std::invalid_argument("assemble_interaction: softcore eps must be positive");
  }
  const KernelEval eval{kernel};
  const int n1 = mesh.interior_dofs();
  const int D = mesh.intervals;
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<LocalWedge> wedges;

  const int max_depth = 4;
  // Recursive dyadic splitting toward the diagonal for the singular kernel.
  std::function<void(double, double, double, double, int, int, int, Eigen::MatrixXd&)> integrate =
      [&](double xl, double xr, double yl, double yr, int ex, int ey, int depth,
          Eigen::MatrixXd& local) {
        const bool touches = (kernel.type == KernelSpec::Type::Exact) && (xl <= yr) && (yl <= xr);
        if (touches && depth < max_depth) {
          const double xm = 0.5 * (xl + xr), ym = 0.5 * (yl + yr);
          integrate(xl, xm, yl, ym, ex, ey, depth + 1, local);
          integrate(xl, xm, ym, yr, ex, ey, depth + 1, local);
          integrate(xm, xr, yl, ym, ex, ey, depth + 1, local);
          integrate(xm, xr, ym, yr, ex, ey, depth + 1, local);
          return;
        }
        accumulate_cell(xl, xr, yl, yr, eval, mesh, ex, ey, wedges, local);
      };

  for (int ex = 0; ex < D; ++ex) {
    // Interior hats supported on element ex: interior indices ex-1 and ex.
    std::vector<int> hx;
    if (ex - 1 >= 0) hx.push_back(ex - 1);
    if (ex < n1) hx.push_back(ex);
    for (int ey = 0; ey < D; ++ey) {
      std::vector<int> hy;
      if (ey - 1 >= 0) hy.push_back(ey - 1);
      if (ey < n1) hy.push_back(ey);
      wedges.clear();
      for (int a : hx) {
        for (int b : hy) {
          if (a == b) continue;
          const int i = std::min(a, b), j = std::max(a, b);
          bool seen = false;
          for (const auto& wgt : wedges) {
            if (wgt.i == i && wgt.j == j) {
              seen = true;
              break;
            }
          }
          if (!seen) wedges.push_back({i, j, basis.index(i, j)});
        }
      }
      if (wedges.empty()) continue;
      const int nw = static_cast<int>(wedges.size());
      Eigen::MatrixXd local = Eigen::MatrixXd::Zero(nw, nw);
      integrate(mesh.node(ex), mesh.node(ex + 1), mesh.node(ey), mesh.node(ey + 1), ex, ey, 0,
                local);
      for (int a = 0; a < nw; ++a) {
        for (int b = 0; b < nw; ++b) {
          if (local(a, b) != 0.0) {
            trip.emplace_back(wedges[static_cast<std::size_t>(a)].lin,
                              wedges[static_cast<std::size_t>(b)].lin, local(a, b));
          }
        }
      }
    }
  }
  SpMat w(basis.n2, basis.n2);
  w.setFromTriplets(trip.begin(), trip.end());
  w.makeCompressed();
  return w;
}

Eigen::MatrixXd wedge_matrix(const PairBasis& basis, const Eigen::VectorXd& coeffs) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(basis.n1, basis.n1);
  for (int i = 0; i < basis.n1; ++i) {
    for (int j = i + 1; j < basis.n1; ++j) {
      const double v = coeffs[basis.index(i, j)] * inv_sqrt2;
      m(i, j) = v;
      m(j, i) = -v;
    }
  }
  return m;
}

Eigen::VectorXd wedge_vector(const PairBasis& basis, const Eigen::MatrixXd& antisym) {
  const double sqrt2 = std::sqrt(2.0);
  Eigen::VectorXd c(basis.n2);
  for (int i = 0; i < basis.n1; ++i) {
    for (int j = i + 1; j < basis.n1; ++j) {
      c[basis.index(i, j)] = antisym(i, j) * sqrt2;
    }
  }
  return c;
}

Eigen::VectorXd wedge_of(const PairBasis& basis, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& v) {
  Eigen::VectorXd c(basis.n2);
  for (int i = 0; i < basis.n1; ++i) {
    for (int j = i + 1; j < basis.n1; ++j) {
      c[basis.index(i, j)] = u[i] * v[j] - u[j] * v[i];
    }
  }
  return c;
}

PiecewiseQuadratic pair_density(const PairBasis& basis, const Mesh1D& mesh, const TriDiagSym& mass,
                                const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const int n1 = basis.n1;
  const Eigen::MatrixXd A = wedge_matrix(basis, a);
  const Eigen::MatrixXd B = wedge_matrix(basis, b);
  // AM = A * M via the banded product: A*M = (M*A^T)^T = -(M*A)^T for antisym A.
  const Eigen::MatrixXd AM = mass.apply_dense(A.transpose()).transpose();

  // Tridiagonal part of sym(AM * B^T), doubled: rho(x) = sum rho_ik phi_i phi_k.
  Eigen::VectorXd d(n1);
  Eigen::VectorXd cross(n1 - 1);
  for (int i = 0; i < n1; ++i) {
    d[i] = 2.0 * AM.row(i).dot(B.row(i));
    if (i + 1 < n1) {
      cross[i] = AM.row(i).dot(B.row(i + 1)) + AM.row(i + 1).dot(B.row(i));
    }
  }

  PiecewiseQuadratic rho;
  rho.left = -mesh.half_width;
  rho.h = mesh.h;
  rho.coef = Eigen::MatrixXd::Zero(mesh.intervals, 3);
  for (int e = 0; e < mesh.intervals; ++e) {
    const int ldof = e - 1;
    const int rdof = e;
    const double dl = (ldof >= 0) ? d[ldof] : 0.0;
    const double dr = (rdof < n1) ? d[rdof] : 0.0;
    const double c = (ldof >= 0 && rdof < n1) ? cross[ldof] : 0.0;
    // dl (1-t)^2 + 2c (1-t)t + dr t^2
    rho.coef(e, 0) = dl;
    rho.coef(e, 1) = -2.0 * dl + 2.0 * c;
    rho.coef(e, 2) = dl - 2.0 * c + dr;
  }
  return rho;
}

OrthoResult gram_orthonormalize(const Eigen::MatrixXd& pool, const SpMat& gram,
                                double rel_cutoff) {
  if (pool.cols() == 0) throw std::invalid_argument("gram_orthonormalize: empty pool");
  const Eigen::MatrixXd gp = gram * pool;
  Eigen::MatrixXd small = pool.transpose() * gp;
  small = 0.5 * (small + small.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(small);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double lmax = ev.maxCoeff();
  if (!(lmax > 0.0) || !std::isfinite(lmax)) {
    throw std::invalid_argument("gram_orthonormalize: pool has no nonzero direction");
  }
  const double cutoff = rel_cutoff * lmax;
  // Keep directions in descending eigenvalue order for determinism.
  std::vector<int> keep;
  for (int k = static_cast<int>(ev.size()) - 1; k >= 0; --k) {
    if (ev[k] > cutoff) keep.push_back(k);
  }
  OrthoResult out;
  out.rank = static_cast<int>(keep.size());
  out.basis.resize(pool.rows(), out.rank);
  for (int c = 0; c < out.rank; ++c) {
    const int k = keep[static_cast<std::size_t>(c)];
    out.basis.col(c) = pool * es.eigenvectors().col(k) / std::sqrt(ev[k]);
  }
  return out;
}

}  // namespace mcal
