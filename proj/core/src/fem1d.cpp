#include "mcal/fem1d.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mcal/quadrature.hpp"

namespace mcal {

Mesh1D build_mesh(double half_width, int intervals) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw std::invalid_argument("build_mesh: half_width must be positive and finite");
  }
  if (intervals < 3) {
    throw std::invalid_argument("build_mesh: need at least 3 intervals, got " +
                                std::to_string(intervals));
  }
  Mesh1D mesh;
  mesh.half_width = half_width;
  mesh.intervals = intervals;
  mesh.h = 2.0 * half_width / intervals;
  mesh.nodes.resize(static_cast<std::size_t>(intervals) + 1);
  for (int i = 0; i <= intervals; ++i) {
    mesh.nodes[static_cast<std::size_t>(i)] = -half_width + i * mesh.h;
  }
  mesh.nodes.front() = -half_width;
  mesh.nodes.back() = half_width;
  return mesh;
}

double TriDiagSym::entry(int i, int j) const {
  if (i == j) return diag[i];
  const int lo = std::min(i, j);
  if (std::abs(i - j) == 1) return off[lo];
  return 0.0;
}

Eigen::MatrixXd TriDiagSym::dense() const {
  const int n = size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = diag[i];
    if (i + 1 < n) {
      m(i, i + 1) = off[i];
      m(i + 1, i) = off[i];
    }
  }
  return m;
}

Eigen::VectorXd TriDiagSym::apply(const Eigen::VectorXd& x) const {
  const int n = size();
  Eigen::VectorXd y = diag.cwiseProduct(x);
  for (int i = 0; i + 1 < n; ++i) {
    y[i] += off[i] * x[i + 1];
    y[i + 1] += off[i] * x[i];
  }
  return y;
}

Eigen::MatrixXd TriDiagSym::apply_dense(const Eigen::MatrixXd& x) const {
  const int n = size();
  Eigen::MatrixXd y = diag.asDiagonal() * x;
  for (int i = 0; i + 1 < n; ++i) {
    y.row(i) += off[i] * x.row(i + 1);
    y.row(i + 1) += off[i] * x.row(i);
  }
  return y;
}

TriDiagSym assemble_mass(const Mesh1D& mesh) {
  const int n = mesh.interior_dofs();
  TriDiagSym m;
  m.diag = Eigen::VectorXd::Constant(n, 2.0 * mesh.h / 3.0);
  m.off = Eigen::VectorXd::Constant(n - 1, mesh.h / 6.0);
  return m;
}

TriDiagSym assemble_stiffness(const Mesh1D& mesh) {
  const int n = mesh.interior_dofs();
  TriDiagSym k;
  k.diag = Eigen::VectorXd::Constant(n, 2.0 / mesh.h);
  k.off = Eigen::VectorXd::Constant(n - 1, -1.0 / mesh.h);
  return k;
}

namespace {

// Sub-interval endpoints of [a, b] after splitting at interior breakpoints.
std::vector<double> split_interval(double a, double b, const std::vector<double>& breakpoints) {
  std::vector<double> pts;
  pts.push_back(a);
  for (double t : breakpoints) {
    if (t > a + 1e-14 * (b - a) && t < b - 1e-14 * (b - a)) pts.push_back(t);
  }
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  return pts;
}

}  // namespace

TriDiagSym assemble_weighted_mass(const Mesh1D& mesh, const std::function<double(double)>& v,
                                  const std::vector<double>& breakpoints) {
  const int n = mesh.interior_dofs();
  TriDiagSym w;
  w.diag = Eigen::VectorXd::Zero(n);
  w.off = Eigen::VectorXd::Zero(n - 1);
  const GaussRule rule = gauss4();

  for (int e = 0; e < mesh.intervals; ++e) {
    const double xl = mesh.node(e);
    const double xr = mesh.node(e + 1);
    // Local shape functions: node e has value (xr-x)/h, node e+1 has (x-xl)/h.
    const int left_dof = e - 1;       // interior index of node e, or -1
    const int right_dof = e;          // interior index of node e+1, or n (boundary)
    double s_ll = 0.0, s_lr = 0.0, s_rr = 0.0;
    const std::vector<double> pts = split_interval(xl, xr, breakpoints);
    for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
      const double a = pts[s], b = pts[s + 1], len = b - a;
      for (int g = 0; g < rule.count; ++g) {
        const double x = a + rule.nodes[g] * len;
        const double val = v(x);
        if (!std::isfinite(val)) {
          throw std::runtime_error("assemble_weighted_mass: non-finite potential value in element " +
                                   std::to_string(e));
        }
        const double wl = (xr - x) / mesh.h;
        const double wr = (x - xl) / mesh.h;
        const double wq = rule.weights[g] * len * val;
        s_ll += wq * wl * wl;
        s_lr += wq * wl * wr;
        s_rr += wq * wr * wr;
      }
    }
    if (left_dof >= 0) w.diag[left_dof] += s_ll;
    if (right_dof < n) w.diag[right_dof] += s_rr;
    if (left_dof >= 0 && right_dof < n) w.off[left_dof] += s_lr;
  }
  return w;
}

Eigen::VectorXd interpolate(const Mesh1D& mesh, const std::function<double(double)>& f) {
  const int n = mesh.interior_dofs();
  Eigen::VectorXd u(n);
  for (int i = 0; i < n; ++i) {
    u[i] = f(mesh.interior_node(i));
    if (!std::isfinite(u[i])) {
      throw std::runtime_error("interpolate: non-finite value at node " + std::to_string(i + 1));
    }
  }
  return u;
}

}  // namespace mcal
