#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <numbers>

#include "mcal/eigs.hpp"
#include "mcal/fem1d.hpp"
#include "mcal/pair_space.hpp"

using namespace mcal;

namespace {

SpMat sparse_diag(const Eigen::VectorXd& d) {
  SpMat m(static_cast<int>(d.size()), static_cast<int>(d.size()));
  for (int i = 0; i < d.size(); ++i) m.insert(i, i) = d[i];
  m.makeCompressed();
  return m;
}

double kinetic_ground(int D) {
  const Mesh1D mesh = build_mesh(10.0, D);
  const TriDiagSym mass = assemble_mass(mesh);
  const TriDiagSym stiff = assemble_stiffness(mesh);
  const PairBasis basis(mesh.interior_dofs());
  const SpMat g = assemble_pair_gram(basis, mass);
  const SpMat t = assemble_pair_kinetic(basis, stiff, mass);
  WedgePreconditioner precond(basis, stiff, mass, 1.0);
  EigOptions opt;
  opt.preconditioner = &precond;
  return smallest_eigpairs(t, g, 1, opt).values[0];
}

}  // namespace

TEST_CASE("diagonal problem returns the smallest entries") {
  Eigen::VectorXd d(8);
  d << 5.0, 1.0, 3.0, 0.5, 7.0, 2.0, 9.0, 4.0;
  const SpMat h = sparse_diag(d);
  const SpMat g = sparse_diag(Eigen::VectorXd::Ones(8));
  const EigResult r = smallest_eigpairs(h, g, 3);
  CHECK(r.values[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(r.values[1] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.values[2] == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("spectral shift identity") {
  const Mesh1D mesh = build_mesh(5.0, 14);
  const TriDiagSym mass = assemble_mass(mesh);
  const TriDiagSym stiff = assemble_stiffness(mesh);
  const PairBasis basis(mesh.interior_dofs());
  const SpMat g = assemble_pair_gram(basis, mass);
  const SpMat t = assemble_pair_kinetic(basis, stiff, mass);
  const double c = 0.37;
  const SpMat shifted = t + c * g;
  const EigResult base = smallest_eigpairs(t, g, 2);
  const EigResult moved = smallest_eigpairs(shifted, g, 2);
  CHECK(moved.values[0] == doctest::Approx(base.values[0] + c).epsilon(1e-9));
  CHECK(moved.values[1] == doctest::Approx(base.values[1] + c).epsilon(1e-9));
}

TEST_CASE("eigenvector contracts: G-orthonormality and residuals") {
  const Mesh1D mesh = build_mesh(6.0, 16);
  const TriDiagSym mass = assemble_mass(mesh);
  const TriDiagSym stiff = assemble_stiffness(mesh);
  const PairBasis basis(mesh.interior_dofs());
  const SpMat g = assemble_pair_gram(basis, mass);
  const SpMat t = assemble_pair_kinetic(basis, stiff, mass);
  const EigResult r = smallest_eigpairs(t, g, 4);
  const Eigen::MatrixXd gram = r.vectors.transpose() * g * r.vectors;
  CHECK((gram - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);
  for (int k = 0; k < 4; ++k) {
    CHECK(r.residuals[k] <= 1e-9 * (1.0 + std::abs(r.values[k])) + 1e-9);
    if (k > 0) CHECK(r.values[k] >= r.values[k - 1]);
  }
}

TEST_CASE("dense and iterative paths agree") {
  const Mesh1D mesh = build_mesh(4.0, 14);
  const TriDiagSym mass = assemble_mass(mesh);
  const TriDiagSym stiff = assemble_stiffness(mesh);
  const PairBasis basis(mesh.interior_dofs());
  const SpMat g = assemble_pair_gram(basis, mass);
  const SpMat t = assemble_pair_kinetic(basis, stiff, mass);

  const EigResult dense = smallest_eigpairs(t, g, 3);
  CHECK(dense.dense_path);

  WedgePreconditioner precond(basis, stiff, mass, 1.0);
  EigOptions opt;
  opt.dense_threshold = 1;  // force the iterative branch on a small problem
  opt.preconditioner = &precond;
  const EigResult iter = smallest_eigpairs(t, g, 3, opt);
  CHECK_FALSE(iter.dense_path);
  for (int k = 0; k < 3; ++k) {
    CHECK(iter.values[k] == doctest::Approx(dense.values[k]).epsilon(1e-8));
  }
}

TEST_CASE("deterministic for a fixed seed") {
  const Mesh1D mesh = build_mesh(4.0, 12);
  const TriDiagSym mass = assemble_mass(mesh);
  const TriDiagSym stiff = assemble_stiffness(mesh);
  const PairBasis basis(mesh.interior_dofs());
  const SpMat g = assemble_pair_gram(basis, mass);
  const SpMat t = assemble_pair_kinetic(basis, stiff, mass);
  WedgePreconditioner precond(basis, stiff, mass, 1.0);
  EigOptions opt;
  opt.dense_threshold = 1;
  opt.preconditioner = &precond;
  opt.seed = 12345;
  const EigResult a = smallest_eigpairs(t, g, 2, opt);
  const EigResult b = smallest_eigpairs(t, g, 2, opt);
  CHECK(a.values[0] == b.values[0]);
  CHECK(a.values[1] == b.values[1]);
  CHECK((a.vectors - b.vectors).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kinetic-only ground energy converges to the box value") {
  // Two lowest Dirichlet modes of the box (-10, 10): energies k^2 pi^2 / 800,
  // summed for k = 1, 2 gives 5 pi^2 / 800.
  const double exact = 5.0 * std::numbers::pi * std::numbers::pi / 800.0;
  const double e40 = kinetic_ground(40);   // dense path
  const double e80 = kinetic_ground(80);   // iterative path (n2 = 3081)
  CHECK(std::abs(e40 - exact) / exact < 0.01);
  CHECK(std::abs(e80 - exact) / exact < 0.005);
  // Order-2 convergence: refining 40 -> 80 shrinks the error by about 4.
  const double ratio = std::abs(e40 - exact) / std::abs(e80 - exact);
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}

TEST_CASE("invalid inputs are rejected") {
  const SpMat h = sparse_diag(Eigen::VectorXd::Ones(5));
  Eigen::VectorXd gdiag(5);
  gdiag << 1.0, 1.0, -1.0, 1.0, 1.0;  // indefinite
  CHECK_THROWS(smallest_eigpairs(h, sparse_diag(gdiag), 1));
  CHECK_THROWS(smallest_eigpairs(h, sparse_diag(Eigen::VectorXd::Ones(5)), 0));
}
