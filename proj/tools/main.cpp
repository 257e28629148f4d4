// Command-line surface for the MCAL toy benchmark: `run` executes the
// column-generation loop and writes CSV/JSON artifacts, `density` dumps the
// builtin target, `selftest` exercises per-module oracles, and `sdp-solve`
// solves a plain-text SDP instance for debugging.

#include <CLI11.hpp>
#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mcal/driver.hpp"
#include "mcal/eigs.hpp"
#include "mcal/fem1d.hpp"
#include "mcal/moments.hpp"
#include "mcal/pair_space.hpp"
#include "mcal/report.hpp"
#include "mcal/sdp.hpp"
#include "mcal/sparsify.hpp"

namespace fs = std::filesystem;

namespace {

struct RunFlags {
  mcal::McalConfig config;
  std::string kernel = "softcore";
  std::string out_dir = ".";
  std::string config_file;
  int threads = 0;
};

void attach_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--L", f.config.half_width, "Domain half-width")->check(CLI::PositiveNumber);
  cmd->add_option("--D", f.config.intervals, "Mesh intervals")->check(CLI::Range(3, 100000));
  cmd->add_option("--M", f.config.moment_count, "Moment grid nodes")->check(CLI::Range(2, 100000));
  cmd->add_option("--qvec", f.config.columns_per_iteration, "Eigenpairs appended per iteration")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--kernel", f.kernel, "Interaction kernel")
      ->check(CLI::IsMember({"softcore", "exact"}));
  cmd->add_option("--eps", f.config.kernel.eps, "Softcore regularization")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tol-sdp", f.config.tol_sdp, "SDP solver tolerance");
  cmd->add_option("--tol-stop", f.config.tol_stop, "Outer stopping tolerance on E(v_n)");
  cmd->add_option("--drop-tol", f.config.drop_tol, "Relative occupation drop tolerance");
  cmd->add_option("--max-iters", f.config.max_iters, "Outer iteration cap")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", f.config.seed, "RNG seed (iterative eigensolver start block)");
  cmd->add_option("--density-file", f.config.density_file,
                  "Interior nodal values of a target density (one per line)");
  cmd->add_option("--out", f.out_dir, "Output directory");
  cmd->add_option("--threads", f.threads, "Thread cap for inner linear algebra (0 = default)");
  cmd->add_option("--config", f.config_file, "key=value defaults (flags take precedence)")
      ->check(CLI::ExistingFile);
}

// Applies a plain key=value file as defaults for options that were not given
// on the command line. (CLI11 only processes config files attached to the
// top-level app, not to subcommands, so this is done by hand.)
void apply_config_file(CLI::App* cmd, const RunFlags& f) {
  if (f.config_file.empty()) return;
  std::ifstream is(f.config_file);
  if (!is) throw std::runtime_error("cannot read config file " + f.config_file);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    if (line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(f.config_file + ":" + std::to_string(lineno) +
                               ": expected key=value");
    }
    std::string key = line.substr(0, line.find_last_not_of(" \t", eq - 1) + 1);
    std::string value = line.substr(line.find_first_not_of(" \t", eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      throw std::runtime_error(f.config_file + ":" + std::to_string(lineno) + ": unknown key " +
                               key);
    }
    if (opt->count() > 0) continue;  // command-line flags win
    opt->add_result(value);
    opt->run_callback();
  }
}

mcal::McalConfig finalize(RunFlags& f) {
  if (f.kernel == "exact") {
    f.config.kernel = mcal::KernelSpec::exact();
  } else {
    f.config.kernel = mcal::KernelSpec::softcore(f.config.kernel.eps);
  }
  if (f.threads > 0) Eigen::setNbThreads(f.threads);
  return f.config;
}

int cmd_run(CLI::App* cmd, RunFlags& f) {
  apply_config_file(cmd, f);
  const mcal::McalConfig config = finalize(f);
  config.validate();
  fs::create_directories(f.out_dir);
  const fs::path out(f.out_dir);

  mcal::McalDriver driver(config);
  driver.prepare();
  driver.initialize();
  mcal::RunReport report = driver.run();

  mcal::write_iterations_csv((out / "iterations.csv").string(), report);
  mcal::write_potential_csv((out / "potential_final.csv").string(), report);
  mcal::write_density_csv((out / "density.csv").string(), report);
  mcal::write_summary_json((out / "summary.json").string(), report);
  mcal::save_checkpoint((out / "checkpoint.bin").string(), driver.checkpoint());

  std::printf("status          %s\n", mcal::to_string(report.status).c_str());
  std::printf("iterations      %d\n",
              report.history.empty() ? 0 : report.history.back().n);
  std::printf("F~ (upper)      %.12g\n", report.final_primal);
  std::printf("lower bound     %.12g\n", report.final_lower);
  std::printf("bracket width   %.3g\n", report.bracket_width);
  std::printf("wall seconds    %.2f\n", report.wall_seconds);
  if (report.status == mcal::RunStatus::Failed) {
    std::fprintf(stderr, "run failed: %s (partial artifacts written to %s)\n",
                 report.error.c_str(), f.out_dir.c_str());
    return 1;
  }
  return 0;
}

int cmd_density(CLI::App* cmd, RunFlags& f) {
  apply_config_file(cmd, f);
  const mcal::McalConfig config = finalize(f);
  config.validate();
  fs::create_directories(f.out_dir);
  const fs::path out(f.out_dir);

  const mcal::Mesh1D mesh = mcal::build_mesh(config.half_width, config.intervals);
  const mcal::TriDiagSym mass = mcal::assemble_mass(mesh);
  const mcal::PairBasis basis(mesh.interior_dofs());
  const mcal::SpMat gram = mcal::assemble_pair_gram(basis, mass);
  const mcal::TargetDensity target = mcal::build_target(config, mesh, basis, mass, gram);
  const mcal::MomentFamily family(config.moment_count, config.half_width);
  const Eigen::VectorXd b = mcal::target_moments(family, target.rho);

  {
    std::ofstream os(out / "density.csv", std::ios::trunc);
    os << "x,rho\n";
    for (int i = 0; i <= config.intervals; ++i) {
      const double x = mesh.node(i);
      os << mcal::format_double(x) << ',' << mcal::format_double(target.rho.eval(x)) << '\n';
    }
  }
  {
    std::ofstream os(out / "moments.csv", std::ios::trunc);
    os << "m,x_m,b_m\n";
    for (int m = 0; m < family.count; ++m) {
      os << m << ',' << mcal::format_double(family.node(m)) << ','
         << mcal::format_double(b[m]) << '\n';
    }
  }
  std::printf("integral of rho %.12g  (sum of moments %.12g)\n", target.rho.integral(), b.sum());
  return 0;
}

// ---------------------------------------------------------------------------
// selftest suites

struct SelfTest {
  bool ok = true;
  void check(const std::string& name, bool pass, double got, double want) {
    std::printf("  %-38s %s   got %.10g  want %.10g\n", name.c_str(), pass ? "PASS" : "FAIL", got,
                want);
    ok = ok && pass;
  }
};

int selftest_fem() {
  SelfTest t;
  const auto mesh = mcal::build_mesh(3.0, 16);
  const auto mass = mcal::assemble_mass(mesh);
  const int n = mass.size();
  // Interior rows of the P1 mass matrix sum to h; the two rows next to the
  // Dirichlet boundary lose one h/6 coupling.
  double worst_inner = 0.0, worst_edge = 0.0;
  for (int i = 0; i < n; ++i) {
    double s = mass.entry(i, i);
    if (i > 0) s += mass.entry(i, i - 1);
    if (i + 1 < n) s += mass.entry(i, i + 1);
    if (i == 0 || i == n - 1) {
      worst_edge = std::max(worst_edge, std::abs(s - 5.0 * mesh.h / 6.0));
    } else {
      worst_inner = std::max(worst_inner, std::abs(s - mesh.h));
    }
  }
  t.check("mass interior row sums = h", worst_inner < 1e-14, worst_inner, 0.0);
  t.check("mass boundary row sums = 5h/6", worst_edge < 1e-14, worst_edge, 0.0);
  const auto stiff = mcal::assemble_stiffness(mesh);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const double edge = (stiff.apply(ones) - Eigen::VectorXd::Zero(n)).lpNorm<Eigen::Infinity>();
  // K * 1 vanishes except at the two boundary-adjacent rows (value 1/h).
  t.check("stiffness annihilates constants", std::abs(edge - 1.0 / mesh.h) < 1e-12, edge,
          1.0 / mesh.h);
  return t.ok ? 0 : 1;
}

int selftest_eigen() {
  SelfTest t;
  const auto mesh = mcal::build_mesh(10.0, 200);
  const auto mass = mcal::assemble_mass(mesh);
  const auto stiff = mcal::assemble_stiffness(mesh);
  const mcal::PairBasis basis(mesh.interior_dofs());
  const auto G = mcal::assemble_pair_gram(basis, mass);
  const auto T = mcal::assemble_pair_kinetic(basis, stiff, mass);
  mcal::WedgePreconditioner precond(basis, stiff, mass, 1.0);
  mcal::EigOptions opts;
  opts.preconditioner = &precond;
  const auto res = mcal::smallest_eigpairs(T, G, 1, opts);
  const double exact = 5.0 * std::numbers::pi * std::numbers::pi / 800.0;
  const double rel = std::abs(res.values[0] - exact) / exact;
  t.check("two-fermion box ground energy", rel < 1e-3, res.values[0], exact);
  return t.ok ? 0 : 1;
}

int selftest_sdp() {
  SelfTest t;
  std::mt19937_64 rng(20240612);
  std::normal_distribution<double> normal;
  const int K = 6;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd raw(K, K);
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j) raw(i, j) = normal(rng);
    mcal::SdpProblem p;
    p.objective = 0.5 * (raw + raw.transpose());
    p.constraints = {Eigen::MatrixXd::Identity(K, K)};
    p.rhs = Eigen::VectorXd::Ones(1);
    const auto sol = mcal::solve_sdp(p);
    const double lmin = mcal::min_eig_sym(p.objective);
    worst = std::max(worst, std::abs(sol.primal_value - lmin));
    worst = std::max(worst, std::abs(sol.y[0] - lmin));
  }
  t.check("max y s.t. C - yI >= 0 equals lambda_min", worst < 1e-7, worst, 0.0);
  return t.ok ? 0 : 1;
}

int selftest_sparsify() {
  SelfTest t;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(0.1, 2.0);
  std::normal_distribution<double> normal;
  double worst_rel = 0.0;
  int worst_atoms = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int J0 = 5, n = 12;
    Eigen::VectorXd w(n);
    Eigen::MatrixXd V(J0, n);
    for (int i = 0; i < n; ++i) w[i] = uni(rng);
    for (int i = 0; i < J0; ++i)
      for (int j = 0; j < n; ++j) V(i, j) = normal(rng);
    const Eigen::VectorXd before = V * w;
    const auto red = mcal::caratheodory_reduce(w, V);
    Eigen::VectorXd after = Eigen::VectorXd::Zero(J0);
    for (std::size_t k = 0; k < red.indices.size(); ++k) {
      after += red.weights[static_cast<int>(k)] * V.col(red.indices[k]);
    }
    worst_atoms = std::max(worst_atoms, static_cast<int>(red.indices.size()));
    worst_rel = std::max(worst_rel, (after - before).norm() / before.norm());
    if (red.weights.size() > 0 && red.weights.minCoeff() <= 0.0) worst_rel = 1.0;
  }
  t.check("caratheodory atom count <= J0", worst_atoms <= 5, worst_atoms, 5);
  t.check("caratheodory moments preserved", worst_rel < 1e-10, worst_rel, 0.0);
  return t.ok ? 0 : 1;
}

int cmd_selftest(const std::string& kind) {
  std::printf("selftest %s\n", kind.c_str());
  if (kind == "fem") return selftest_fem();
  if (kind == "eigen") return selftest_eigen();
  if (kind == "sdp") return selftest_sdp();
  if (kind == "sparsify") return selftest_sparsify();
  std::fprintf(stderr, "unknown selftest kind: %s\n", kind.c_str());
  return 2;
}

// ---------------------------------------------------------------------------
// sdp-solve: plain-text instance, documented in the README. Whitespace
// separated: K J, then K*K entries of C row-major, then J blocks of K*K
// entries of A_j followed by b_j.

int cmd_sdp_solve(const std::string& path, double tol) {
  std::ifstream is(path);
  if (!is) {
    std::fprintf(stderr, "cannot open %s\n", path.c_str());
    return 2;
  }
  int K = 0, J = 0;
  is >> K >> J;
  if (!is || K < 1 || J < 0) {
    std::fprintf(stderr, "bad header in %s\n", path.c_str());
    return 2;
  }
  auto read_matrix = [&is, K]() {
    Eigen::MatrixXd m(K, K);
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j) is >> m(i, j);
    return m;
  };
  mcal::SdpProblem p;
  p.objective = read_matrix();
  p.rhs.resize(J);
  for (int j = 0; j < J; ++j) {
    p.constraints.push_back(read_matrix());
    is >> p.rhs[j];
  }
  if (!is) {
    std::fprintf(stderr, "truncated instance in %s\n", path.c_str());
    return 2;
  }
  const auto sol = mcal::solve_sdp(p, tol);
  std::printf("status          %s\n", mcal::to_string(sol.status).c_str());
  std::printf("iterations      %d\n", sol.iterations);
  std::printf("primal value    %.12g\n", sol.primal_value);
  std::printf("dual value      %.12g\n", sol.dual_value);
  std::printf("gap             %.3g\n", sol.gap);
  std::printf("primal residual %.3g\n", sol.primal_residual);
  std::printf("dual residual   %.3g\n", sol.dual_residual);
  std::printf("y              ");
  for (int j = 0; j < J; ++j) std::printf(" %.12g", sol.y[j]);
  std::printf("\n");
  std::printf("min eig X       %.3g\n", mcal::min_eig_sym(sol.X));
  std::printf("min eig S       %.3g\n", mcal::min_eig_sym(sol.S));
  return sol.status == mcal::SdpStatus::Optimal ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moment-constrained approximation of the Lieb functional (two fermions, 1D)"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "Run the column-generation benchmark");
  attach_run_flags(run, run_flags);

  RunFlags density_flags;
  auto* density = app.add_subcommand("density", "Write the builtin target density and its moments");
  attach_run_flags(density, density_flags);

  std::string selftest_kind;
  auto* selftest = app.add_subcommand("selftest", "Per-module oracle checks");
  selftest->add_option("kind", selftest_kind, "Suite: sdp | eigen | sparsify | fem")
      ->required()
      ->check(CLI::IsMember({"sdp", "eigen", "sparsify", "fem"}));

  std::string sdp_path;
  double sdp_tol = 1e-9;
  auto* sdp = app.add_subcommand("sdp-solve", "Solve a plain-text SDP instance");
  sdp->add_option("file", sdp_path, "Instance file")->required()->check(CLI::ExistingFile);
  sdp->add_option("--tol", sdp_tol, "Solver tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run, run_flags);
    if (density->parsed()) return cmd_density(density, density_flags);
    if (selftest->parsed()) return cmd_selftest(selftest_kind);
    if (sdp->parsed()) return cmd_sdp_solve(sdp_path, sdp_tol);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
