#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "mcal/driver.hpp"
#include "mcal/report.hpp"

using namespace mcal;

namespace {

McalConfig small_config() {
  McalConfig c;
  c.half_width = 10.0;
  c.intervals = 20;  // n2 = 171, dense eigensolver path
  c.moment_count = 6;
  c.columns_per_iteration = 2;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  McalConfig c = small_config();
  c.moment_count = 1;
  CHECK_THROWS(McalDriver{c});
  c = small_config();
  c.intervals = 2;
  CHECK_THROWS(McalDriver{c});
  c = small_config();
  c.tol_sdp = 0.0;
  CHECK_THROWS(McalDriver{c});
  c = small_config();
  c.columns_per_iteration = 0;
  CHECK_THROWS(McalDriver{c});
  c = small_config();
  c.potential_bound = -1.0;
  CHECK_THROWS(McalDriver{c});
}

TEST_CASE("builtin target construction") {
  McalDriver driver(small_config());
  driver.prepare();
  const TargetDensity& t = driver.target();

  // Continuous identity behind the construction: ||phi_even||^2 = 2L/3, and
  // the P1 interpolant reproduces it exactly because phi_even is piecewise
  // linear with its kink on a mesh node (D even).
  const Mesh1D& mesh = driver.mesh();
  Eigen::VectorXd even(mesh.interior_dofs()), odd(mesh.interior_dofs());
  for (int i = 0; i < mesh.interior_dofs(); ++i) {
    const double x = mesh.interior_node(i);
    even[i] = 1.0 - std::abs(x) / 10.0;
    odd[i] = x <= 0.0 ? 1.0 - std::abs(2.0 * x + 10.0) / 10.0
                      : std::abs(2.0 * x - 10.0) / 10.0 - 1.0;
  }
  CHECK(even.dot(driver.mass().apply(even)) == doctest::Approx(20.0 / 3.0).epsilon(1e-12));
  // Parity: the even and odd orbitals are L2-orthogonal.
  CHECK(std::abs(even.dot(driver.mass().apply(odd))) < 1e-12);

  CHECK(t.rho.integral() == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(t.rho.min_value() >= -1e-12);
  CHECK(t.initial_state.dot(driver.gram() * t.initial_state) == doctest::Approx(1.0).epsilon(1e-10));
  // Moments of the target sum to the particle number.
  CHECK(driver.target_moments().sum() == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("initialization is the forced single-atom problem") {
  McalDriver driver(small_config());
  driver.prepare();
  driver.initialize();
  REQUIRE(driver.history().size() == 1);
  const IterationRecord& rec = driver.history().front();
  const Eigen::VectorXd& psi = driver.target().initial_state;
  const double rayleigh = psi.dot(driver.hamiltonian() * psi);
  CHECK(rec.primal_value == doctest::Approx(rayleigh).epsilon(1e-12));
  CHECK(rec.pool_size == 1);
  CHECK(driver.pool().weights[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tampered target moments violate the initialization assumption") {
  McalDriver driver(small_config());
  driver.prepare();
  driver.target_moments_mutable()[1] += 1.0;
  CHECK_THROWS(driver.initialize());
}

TEST_CASE("first dual value equals the initial primal value") {
  McalDriver driver(small_config());
  driver.prepare();
  driver.initialize();
  const McalDriver::DualStep ds = driver.dual_step();
  CHECK_FALSE(ds.degenerate);
  CHECK(ds.value ==
        doctest::Approx(driver.history().front().primal_value).epsilon(10 * small_config().tol_sdp));
  CHECK(ds.potential.size() == small_config().moment_count);
}

TEST_CASE("column generation: count, orthonormality, constant shift") {
  McalConfig c = small_config();
  McalDriver driver(c);
  driver.prepare();
  driver.initialize();

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(c.moment_count);
  const McalDriver::Columns cols = driver.generate_columns(zero);
  CHECK(cols.states.cols() == c.columns_per_iteration);
  const Eigen::MatrixXd gram = cols.states.transpose() * driver.gram() * cols.states;
  CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-7);

  // v == const shifts the ground energy by -N c exactly (hats sum to one).
  const double shift = 0.55;
  const McalDriver::Columns shifted =
      driver.generate_columns(Eigen::VectorXd::Constant(c.moment_count, shift));
  CHECK(shifted.ground_energy ==
        doctest::Approx(cols.ground_energy - 2.0 * shift).epsilon(1e-7));

  CHECK_THROWS(driver.generate_columns(Eigen::VectorXd::Zero(3)));
}

TEST_CASE("kinetic-only ground energy matches the box spectrum") {
  McalConfig c = small_config();
  c.intervals = 30;
  c.kernel = KernelSpec::constant(0.0);  // switch off the interaction
  McalDriver driver(c);
  driver.prepare();
  PiecewiseLinear v;
  v.breaks = {-10.0, 10.0};
  v.values = {0.0, 0.0};
  const double exact = 5.0 * std::numbers::pi * std::numbers::pi / 800.0;
  CHECK(std::abs(driver.ground_energy(v) - exact) / exact < 0.01);
}

TEST_CASE("one full iteration: monotonicity pieces and moment feasibility") {
  McalConfig c = small_config();
  McalDriver driver(c);
  driver.prepare();
  driver.initialize();
  const double f0 = driver.history().front().primal_value;

  const McalDriver::DualStep ds = driver.dual_step();
  const McalDriver::Columns cols = driver.generate_columns(ds.potential);
  const double primal = driver.primal_step(cols.states);

  CHECK(primal <= ds.value + 10 * c.tol_sdp * (1.0 + std::abs(ds.value)));  // weak duality
  CHECK(primal <= f0 + 10 * c.tol_sdp);                                     // progress
  CHECK(driver.pool().size() <= c.moment_count + 1);

  // The sparsified pool reproduces the target moments (primal feasibility
  // survives the rotation).
  const SparseState& pool = driver.pool();
  Eigen::VectorXd agg = Eigen::VectorXd::Zero(c.moment_count);
  for (int k = 0; k < pool.size(); ++k) {
    const PiecewiseQuadratic rho = pair_density(driver.basis(), driver.mesh(), driver.mass(),
                                                pool.states.col(k), pool.states.col(k));
    agg += pool.weights[k] * target_moments(driver.family(), rho);
  }
  const Eigen::VectorXd& b = driver.target_moments();
  for (int m = 0; m < c.moment_count; ++m) {
    CHECK(std::abs(agg[m] - b[m]) <= 10 * c.tol_sdp * (1.0 + std::abs(b[m])));
  }

  // A column that already lies in the pool span leaves the pool size fixed.
  const int before = driver.pool().size();
  const Eigen::MatrixXd dependent = driver.pool().states.col(0);
  driver.primal_step(dependent);
  CHECK(driver.pool().size() <= before);
}

TEST_CASE("small run end to end") {
  McalConfig c = small_config();
  c.max_iters = 40;
  McalDriver driver(c);
  const RunReport report = driver.run();
  REQUIRE(report.status != RunStatus::Failed);
  REQUIRE(report.history.size() >= 2);

  // Monotonicity with solver slack.
  for (std::size_t i = 2; i < report.history.size(); ++i) {
    CHECK(report.history[i].dual_value <=
          report.history[i - 1].dual_value + 1e-6);
  }
  for (const IterationRecord& rec : report.history) {
    if (rec.n == 0) continue;
    CHECK(rec.pool_size <= c.moment_count + 2);
    CHECK(rec.lower_bound <= rec.primal_value + 4 * c.tol_sdp * (1.0 + std::abs(rec.primal_value)));
    CHECK(rec.moment_residual <= 100 * c.tol_sdp);
  }
  CHECK(report.final_state.size() <= c.moment_count + 1);
  if (report.status == RunStatus::Converged) {
    CHECK(report.bracket_width <=
          c.tol_stop + 4 * c.tol_sdp * (1.0 + std::abs(report.final_primal)));
  }
  // Final density integrates to N and satisfies the reported residuals.
  CHECK(report.rho_final.integral() == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(report.final_moment_residuals.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("max_iters = 0 leaves only the initialization row") {
  McalConfig c = small_config();
  c.max_iters = 0;
  McalDriver driver(c);
  const RunReport report = driver.run();
  CHECK(report.status == RunStatus::MaxIterations);
  REQUIRE(report.history.size() == 1);
  CHECK(report.history[0].n == 0);
}

TEST_CASE("checkpoint round trip preserves the driver state") {
  McalConfig c = small_config();
  c.max_iters = 3;
  McalDriver driver(c);
  driver.run();
  const Checkpoint ck = driver.checkpoint();

  const std::string path = "checkpoint_test.bin";
  save_checkpoint(path, ck);
  const Checkpoint loaded = load_checkpoint(path);
  std::remove(path.c_str());

  CHECK(loaded.half_width == ck.half_width);
  CHECK(loaded.intervals == ck.intervals);
  CHECK(loaded.moment_count == ck.moment_count);
  CHECK(loaded.iteration == ck.iteration);
  CHECK((loaded.weights - ck.weights).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.states - ck.states).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.potential - ck.potential).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(loaded.history.size() == ck.history.size());
  for (std::size_t i = 0; i < ck.history.size(); ++i) {
    CHECK(loaded.history[i].n == ck.history[i].n);
    CHECK(loaded.history[i].primal_value == ck.history[i].primal_value);
  }

  // A fresh driver restored from the checkpoint continues identically to the
  // original one for the next dual step.
  McalDriver resumed(c);
  resumed.prepare();
  resumed.restore(loaded);
  const double a = resumed.dual_step().value;
  const double b = driver.dual_step().value;
  CHECK(a == doctest::Approx(b).epsilon(1e-9));

  // Mismatched configurations are rejected.
  McalConfig other = c;
  other.intervals = 24;
  McalDriver wrong(other);
  wrong.prepare();
  CHECK_THROWS(wrong.restore(loaded));
}

TEST_CASE("load_checkpoint rejects garbage") {
  const std::string path = "checkpoint_garbage.bin";
  {
    std::ofstream os(path, std::ios::binary);
    os << "not a checkpoint";
  }
  CHECK_THROWS(load_checkpoint(path));
  std::remove(path.c_str());
}

TEST_CASE("user density file drives the target") {
  McalConfig c = small_config();
  const std::string path = "density_nodal.txt";
  {
    std::ofstream os(path);
    const Mesh1D mesh = build_mesh(c.half_width, c.intervals);
    for (int i = 0; i < mesh.interior_dofs(); ++i) {
      const double x = mesh.interior_node(i);
      os << 2.0 * std::exp(-0.05 * x * x) << "\n";
    }
  }
  c.density_file = path;
  McalDriver driver(c);
  driver.prepare();
  CHECK(driver.target().rho.integral() == doctest::Approx(2.0).epsilon(1e-10));
  driver.initialize();  // (A0) must hold for the constructed state
  std::remove(path.c_str());

  // Negative nodal values are rejected.
  {
    std::ofstream os(path);
    os << "-1.0\n";
    const Mesh1D mesh = build_mesh(c.half_width, c.intervals);
    for (int i = 1; i < mesh.interior_dofs(); ++i) os << "1.0\n";
  }
  McalDriver bad(c);
  CHECK_THROWS(bad.prepare());
  std::remove(path.c_str());
}
