#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "mcal/sdp.hpp"

using namespace mcal;

namespace {

Eigen::MatrixXd random_symmetric(int k, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) m(i, j) = normal(rng);
  return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd random_orthogonal(int k, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) m(i, j) = normal(rng);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();
}

}  // namespace

TEST_CASE("min_eig_sym examples") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = -2.0;
  CHECK(min_eig_sym(d) == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(min_eig_sym(Eigen::MatrixXd::Identity(4, 4)) == doctest::Approx(1.0).epsilon(1e-14));

  std::mt19937_64 rng(1);
  const Eigen::MatrixXd s = random_symmetric(10, rng);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  CHECK(min_eig_sym(s) == doctest::Approx(es.eigenvalues()[0]).epsilon(1e-12));

  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS(min_eig_sym(bad));
  CHECK_THROWS(min_eig_sym(Eigen::MatrixXd::Zero(2, 3)));
}

TEST_CASE("scalar LP instance") {
  SdpProblem p;
  p.objective = Eigen::MatrixXd::Constant(1, 1, 3.0);
  p.constraints = {Eigen::MatrixXd::Constant(1, 1, 2.0)};
  p.rhs = Eigen::VectorXd::Constant(1, 5.0);
  const SdpSolution sol = solve_sdp(p);
  CHECK(sol.status == SdpStatus::Optimal);
  CHECK(sol.X(0, 0) == doctest::Approx(2.5).epsilon(1e-8));
  CHECK(sol.primal_value == doctest::Approx(7.5).epsilon(1e-8));
}

TEST_CASE("analytic KKT instance: trace-one minimization of diag(1,2)") {
  SdpProblem p;
  p.objective = Eigen::MatrixXd::Zero(2, 2);
  p.objective(0, 0) = 1.0;
  p.objective(1, 1) = 2.0;
  p.constraints = {Eigen::MatrixXd::Identity(2, 2)};
  p.rhs = Eigen::VectorXd::Ones(1);
  const SdpSolution sol = solve_sdp(p);
  CHECK(sol.status == SdpStatus::Optimal);
  CHECK(sol.primal_value == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(sol.X(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.X(1, 1) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(sol.y[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.S(0, 0) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(sol.S(1, 1) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("dual form recovers the smallest eigenvalue") {
  std::mt19937_64 rng(20240612);
  const int K = 6;
  for (int trial = 0; trial < 10; ++trial) {
    SdpProblem p;
    p.objective = random_symmetric(K, rng);
    p.constraints = {Eigen::MatrixXd::Identity(K, K)};
    p.rhs = Eigen::VectorXd::Ones(1);
    const SdpSolution sol = solve_sdp(p);
    const double lmin = min_eig_sym(p.objective);
    CHECK(sol.status == SdpStatus::Optimal);
    CHECK(sol.primal_value == doctest::Approx(lmin).epsilon(1e-7));
    CHECK(sol.y[0] == doctest::Approx(lmin).epsilon(1e-7));
    // Weak duality and PSD certificates on the returned point.
    CHECK(sol.gap > -1e-8);
    CHECK(min_eig_sym(sol.X) > -1e-8);
    CHECK(min_eig_sym(sol.S) > -1e-8);
  }
}

TEST_CASE("two-constraint dual against a 2D boundary grid search") {
  // Hand-built K=2, M=2 instance; oracle maximizes b'y over a fine grid of
  // the feasible region lambda_min(C - y1 A1 - y2 A2) >= 0.
  SdpProblem p;
  p.objective.resize(2, 2);
  p.objective << 2.0, 0.4, 0.4, 1.5;
  Eigen::MatrixXd a1(2, 2), a2(2, 2);
  a1 << 1.0, 0.0, 0.0, 0.3;
  a2 << 0.2, 0.5, 0.5, 1.0;
  p.constraints = {a1, a2};
  p.rhs.resize(2);
  p.rhs << 1.0, 0.7;

  double best = -1e30;
  const int n = 2000;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      const double y1 = -4.0 + 8.0 * i / n;
      const double y2 = -4.0 + 8.0 * j / n;
      const Eigen::MatrixXd s = p.objective - y1 * a1 - y2 * a2;
      // 2x2 PSD test without an eigensolver.
      if (s(0, 0) >= 0.0 && s(1, 1) >= 0.0 && s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0) >= 0.0) {
        best = std::max(best, p.rhs[0] * y1 + p.rhs[1] * y2);
      }
    }
  }
  const SdpSolution sol = solve_sdp(p);
  CHECK(sol.status == SdpStatus::Optimal);
  // Grid resolution limits the oracle to ~1e-3.
  CHECK(sol.dual_value == doctest::Approx(best).epsilon(5e-3));
  CHECK(std::abs(sol.gap) < 1e-8);
}

TEST_CASE("orthogonal congruence invariance") {
  std::mt19937_64 rng(7);
  const int K = 5, J = 3;
  SdpProblem p;
  // Strictly feasible construction: b from a PD point, C with PD dual slack.
  Eigen::MatrixXd x0 = random_symmetric(K, rng);
  x0 = x0 * x0.transpose() + Eigen::MatrixXd::Identity(K, K);
  p.constraints.push_back(Eigen::MatrixXd::Identity(K, K));
  for (int j = 1; j < J; ++j) p.constraints.push_back(random_symmetric(K, rng));
  p.rhs.resize(J);
  for (int j = 0; j < J; ++j) {
    p.rhs[j] = (p.constraints[static_cast<std::size_t>(j)].array() * x0.array()).sum();
  }
  p.objective = random_symmetric(K, rng) + 10.0 * Eigen::MatrixXd::Identity(K, K);

  const SdpSolution base = solve_sdp(p);
  REQUIRE(base.status == SdpStatus::Optimal);

  const Eigen::MatrixXd q = random_orthogonal(K, rng);
  SdpProblem rotated;
  rotated.objective = q * p.objective * q.transpose();
  for (const auto& a : p.constraints) rotated.constraints.push_back(q * a * q.transpose());
  rotated.rhs = p.rhs;
  const SdpSolution rot = solve_sdp(rotated);
  REQUIRE(rot.status == SdpStatus::Optimal);
  CHECK(rot.primal_value == doctest::Approx(base.primal_value).epsilon(1e-7));
}

TEST_CASE("dependent constraints are rejected, not regularized") {
  SdpProblem p;
  p.objective = Eigen::MatrixXd::Identity(3, 3);
  p.constraints = {Eigen::MatrixXd::Identity(3, 3), 2.0 * Eigen::MatrixXd::Identity(3, 3)};
  p.rhs = Eigen::VectorXd::Ones(2);
  CHECK_THROWS(solve_sdp(p));
}

TEST_CASE("dimension and symmetry validation") {
  SdpProblem p;
  p.objective = Eigen::MatrixXd::Identity(2, 2);
  p.constraints = {Eigen::MatrixXd::Identity(3, 3)};
  p.rhs = Eigen::VectorXd::Ones(1);
  CHECK_THROWS(solve_sdp(p));

  SdpProblem q;
  q.objective.resize(2, 2);
  q.objective << 0.0, 1.0, -1.0, 0.0;  // antisymmetric
  q.constraints = {Eigen::MatrixXd::Identity(2, 2)};
  q.rhs = Eigen::VectorXd::Ones(1);
  CHECK_THROWS(solve_sdp(q));
}

TEST_CASE("determined solver on a fully pinned instance") {
  // Constraints spanning Sym(2): the feasible set is a single matrix.
  SdpProblem p;
  p.objective.resize(2, 2);
  p.objective << 1.2, -0.3, -0.3, 0.8;
  Eigen::MatrixXd e11 = Eigen::MatrixXd::Zero(2, 2), e22 = Eigen::MatrixXd::Zero(2, 2),
                  e12 = Eigen::MatrixXd::Zero(2, 2);
  e11(0, 0) = 1.0;
  e22(1, 1) = 1.0;
  e12(0, 1) = e12(1, 0) = 1.0;
  p.constraints = {e11, e22, e12};
  Eigen::MatrixXd xstar(2, 2);
  xstar << 0.9, 0.2, 0.2, 0.5;  // PD target
  p.rhs.resize(3);
  p.rhs << xstar(0, 0), xstar(1, 1), 2.0 * xstar(0, 1);
  const SdpSolution sol = solve_determined_sdp(p);
  CHECK(sol.status == SdpStatus::Optimal);
  CHECK((sol.X - xstar).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(sol.primal_value ==
        doctest::Approx((p.objective.array() * xstar.array()).sum()).epsilon(1e-10));
  CHECK(std::abs(sol.gap) < 1e-9);
  CHECK(sol.dual_residual == 0.0);
}
