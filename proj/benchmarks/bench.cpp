#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include <random>

#include "mcal/eigs.hpp"
#include "mcal/fem1d.hpp"
#include "mcal/moments.hpp"
#include "mcal/pair_space.hpp"
#include "mcal/sdp.hpp"
#include "mcal/sparsify.hpp"

using namespace mcal;

namespace {

struct Assembled {
  Mesh1D mesh;
  TriDiagSym mass, stiff;
  PairBasis basis;
  SpMat gram, kinetic;

  explicit Assembled(int D)
      : mesh(build_mesh(10.0, D)),
        mass(assemble_mass(mesh)),
        stiff(assemble_stiffness(mesh)),
        basis(mesh.interior_dofs()),
        gram(assemble_pair_gram(basis, mass)),
        kinetic(assemble_pair_kinetic(basis, stiff, mass)) {}
};

void bm_pair_assembly(benchmark::State& state) {
  const int D = static_cast<int>(state.range(0));
  const Mesh1D mesh = build_mesh(10.0, D);
  const TriDiagSym mass = assemble_mass(mesh);
  const TriDiagSym stiff = assemble_stiffness(mesh);
  const PairBasis basis(mesh.interior_dofs());
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_pair_gram(basis, mass));
    benchmark::DoNotOptimize(assemble_pair_kinetic(basis, stiff, mass));
  }
}
BENCHMARK(bm_pair_assembly)->Arg(40)->Arg(60)->Arg(100);

void bm_interaction_assembly(benchmark::State& state) {
  const int D = static_cast<int>(state.range(0));
  const Mesh1D mesh = build_mesh(10.0, D);
  const PairBasis basis(mesh.interior_dofs());
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_interaction(basis, mesh, KernelSpec::softcore(1.0)));
  }
}
BENCHMARK(bm_interaction_assembly)->Arg(40)->Arg(60)->Arg(100);

void bm_eigensolve(benchmark::State& state) {
  const int D = static_cast<int>(state.range(0));
  const Assembled a(D);
  WedgePreconditioner precond(a.basis, a.stiff, a.mass, 1.0);
  EigOptions opt;
  opt.dense_threshold = 1;  // time the iterative path at every size
  opt.preconditioner = &precond;
  for (auto _ : state) {
    benchmark::DoNotOptimize(smallest_eigpairs(a.kinetic, a.gram, 4, opt));
  }
}
BENCHMARK(bm_eigensolve)->Arg(40)->Arg(60)->Arg(100)->Unit(benchmark::kMillisecond);

void bm_pair_density(benchmark::State& state) {
  const int D = static_cast<int>(state.range(0));
  const Assembled a(D);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  Eigen::VectorXd psi(a.basis.n2);
  for (int i = 0; i < psi.size(); ++i) psi[i] = normal(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pair_density(a.basis, a.mesh, a.mass, psi, psi));
  }
}
BENCHMARK(bm_pair_density)->Arg(60)->Arg(100);

void bm_pool_moments(benchmark::State& state) {
  const int D = static_cast<int>(state.range(0));
  const Assembled a(D);
  const MomentFamily family(20, 10.0);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd raw(a.basis.n2, 21);
  for (int i = 0; i < raw.size(); ++i) raw(i) = normal(rng);
  const Eigen::MatrixXd pool = gram_orthonormalize(raw, a.gram).basis;
  for (auto _ : state) {
    benchmark::DoNotOptimize(pool_moment_matrices(family, a.basis, a.mesh, a.mass, pool));
  }
}
BENCHMARK(bm_pool_moments)->Arg(60)->Arg(100)->Unit(benchmark::kMillisecond);

void bm_sdp_solve(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  const int J = K / 2;
  SdpProblem p;
  Eigen::MatrixXd f(K, K);
  for (int i = 0; i < K * K; ++i) f(i) = normal(rng);
  p.objective = f + f.transpose();
  Eigen::VectorXd b(J);
  for (int j = 0; j < J; ++j) {
    Eigen::MatrixXd g(K, K);
    for (int i = 0; i < K * K; ++i) g(i) = normal(rng);
    Eigen::MatrixXd A = g + g.transpose();
    A += (std::abs(min_eig_sym(A)) + 1.0) * Eigen::MatrixXd::Identity(K, K);
    p.constraints.push_back(A);
    b[j] = A.trace();  // X = I is strictly feasible
  }
  p.rhs = b;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_sdp(p, 1e-9));
  }
}
BENCHMARK(bm_sdp_solve)->Arg(12)->Arg(22)->Arg(42)->Unit(benchmark::kMillisecond);

void bm_caratheodory(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(13);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uni(0.1, 1.0);
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = uni(rng);
  Eigen::MatrixXd m(10, n);
  for (int i = 0; i < m.size(); ++i) m(i) = normal(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(caratheodory_reduce(w, m));
  }
}
BENCHMARK(bm_caratheodory)->Arg(50)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
