#include "mcal/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mcal {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged:
      return "converged";
    case RunStatus::MaxIterations:
      return "max-iterations";
    case RunStatus::Failed:
      return "failed";
  }
  return "unknown";
}

void McalConfig::validate() const {
  if (!(half_width > 0.0)) throw std::invalid_argument("config: L must be positive");
  if (intervals < 3) throw std::invalid_argument("config: D must be at least 3");
  if (moment_count < 2) throw std::invalid_argument("config: M must be at least 2");
  if (columns_per_iteration < 1) throw std::invalid_argument("config: qvec must be at least 1");
  if (!(tol_sdp > 0.0) || !(tol_stop > 0.0) || !(drop_tol > 0.0)) {
    throw std::invalid_argument("config: tolerances must be positive");
  }
  if (!(potential_bound > 0.0)) {
    throw std::invalid_argument("config: potential bound must be positive");
  }
  if (max_iters < 0) throw std::invalid_argument("config: max_iters must be non-negative");
}

namespace {

// Builtin target: even tent and odd double-tent orbital shapes.
double tent_even(double x, double L) { return 1.0 - std::abs(x) / L; }
double tent_odd(double x, double L) {
  if (x <= 0.0) return 1.0 - std::abs(2.0 * x + L) / L;
  return std::abs(2.0 * x - L) / L - 1.0;
}

Eigen::VectorXd mass_normalize(const TriDiagSym& mass, const Eigen::VectorXd& u) {
  const double n2 = u.dot(mass.apply(u));
  if (!(n2 > 0.0)) throw std::runtime_error("build_target: zero orbital");
  return u / std::sqrt(n2);
}

std::vector<double> read_nodal_file(const std::string& path, int expected) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("build_target: cannot open density file " + path);
  std::vector<double> vals;
  double v;
  while (in >> v) vals.push_back(v);
  if (static_cast<int>(vals.size()) != expected) {
    throw std::runtime_error("build_target: expected " + std::to_string(expected) +
                             " interior nodal values, got " + std::to_string(vals.size()));
  }
  for (double x : vals) {
    if (x < 0.0) throw std::runtime_error("build_target: negative nodal density value");
  }
  return vals;
}

}  // namespace

TargetDensity build_target(const McalConfig& config, const Mesh1D& mesh, const PairBasis& basis,
                           const TriDiagSym& mass, const SpMat& gram) {
  Eigen::VectorXd u, v;
  if (config.density_file.empty()) {
    const double L = mesh.half_width;
    u = interpolate(mesh, [L](double x) { return tent_even(x, L); });
    v = interpolate(mesh, [L](double x) { return tent_odd(x, L); });
  } else {
    // User nodal density: split sqrt(rho/2) into two disjointly supported
    // orbitals around the mass median; the gap node keeps them M-orthogonal.
    const std::vector<double> rho = read_nodal_file(config.density_file, mesh.interior_dofs());
    const int n1 = mesh.interior_dofs();
    double total = 0.0;
    for (double r : rho) total += r;
    if (!(total > 0.0)) throw std::runtime_error("build_target: zero density file");
    double cum = 0.0;
    int split = n1 / 2;
    for (int i = 0; i < n1; ++i) {
      cum += rho[static_cast<std::size_t>(i)];
      if (cum >= 0.5 * total) {
        split = i;
        break;
      }
    }
    split = std::min(std::max(split, 1), n1 - 2);
    u = Eigen::VectorXd::Zero(n1);
    v = Eigen::VectorXd::Zero(n1);
    for (int i = 0; i < n1; ++i) {
      const double s = std::sqrt(rho[static_cast<std::size_t>(i)]);
      if (i < split) u[i] = s;
      if (i > split) v[i] = s;
    }
  }
  u = mass_normalize(mass, u);
  v = mass_normalize(mass, v);
  Eigen::VectorXd psi = wedge_of(basis, u, v);
  const double norm2 = psi.dot(gram * psi);
  if (!(norm2 > 0.0)) throw std::runtime_error("build_target: degenerate initial wedge");
  psi /= std::sqrt(norm2);

  TargetDensity out;
  out.initial_state = psi;
  out.rho = pair_density(basis, mesh, mass, psi, psi);
  return out;
}

McalDriver::McalDriver(const McalConfig& config) : config_(config) { config_.validate(); }

void McalDriver::prepare() {
  mesh_ = build_mesh(config_.half_width, config_.intervals);
  mass_ = assemble_mass(mesh_);
  stiffness_ = assemble_stiffness(mesh_);
  basis_.emplace(mesh_.interior_dofs());
  gram_ = assemble_pair_gram(*basis_, mass_);
  kinetic_ = assemble_pair_kinetic(*basis_, stiffness_, mass_);
  interaction_ = assemble_interaction(*basis_, mesh_, config_.kernel);
  h0_ = kinetic_ + interaction_;
  family_.emplace(config_.moment_count, config_.half_width);
  preconditioner_.emplace(*basis_, stiffness_, mass_, 1.0);
  target_ = build_target(config_, mesh_, *basis_, mass_, gram_);
  b_ = mcal::target_moments(*family_, target_.rho);
  prepared_ = true;
}

void McalDriver::initialize() {
  if (!prepared_) prepare();
  // Single-atom pool: its density must reproduce every target moment.
  const PiecewiseQuadratic rho0 =
      pair_density(*basis_, mesh_, mass_, target_.initial_state, target_.initial_state);
  double worst = 0.0;
  int worst_m = 0;
  for (int m = 0; m < family_->count; ++m) {
    const double r = std::abs(rho0.integral_against(family_->hat_function(m)) - b_[m]) /
                     (1.0 + std::abs(b_[m]));
    if (r > worst) {
      worst = r;
      worst_m = m;
    }
  }
  if (worst > config_.tol_sdp) {
    std::ostringstream os;
    os << "initialize: initial pool fails to reproduce the target moments "
       << "(worst relative residual " << worst << " at moment " << worst_m << ")";
    throw std::runtime_error(os.str());
  }

  pool_.weights = Eigen::VectorXd::Ones(1);
  pool_.states = target_.initial_state;
  potential_ = Eigen::VectorXd::Zero(family_->count);
  iteration_ = 0;
  sdp_accuracy_ = 0.0;
  history_.clear();

  // With a single atom and the constant function in the moment span, the
  // initialization problem is forced: weight 1, value = Rayleigh quotient.
  const double f0 = target_.initial_state.dot(h0_ * target_.initial_state);
  IterationRecord rec;
  rec.n = 0;
  rec.dual_value = kNaN;
  rec.primal_value = f0;
  rec.ground_defect = kNaN;
  rec.pool_size = 1;
  rec.sdp_gap = 0.0;
  rec.lower_bound = kNaN;
  rec.moment_residual = worst;
  history_.push_back(rec);
  initialized_ = true;
}

Eigen::MatrixXd McalDriver::pool_hamiltonian(const Eigen::MatrixXd& states) const {
  Eigen::MatrixXd c = states.transpose() * (h0_ * states);
  return 0.5 * (c + c.transpose().eval());
}

namespace {

bool sdp_acceptable(const SdpSolution& sol, double tol) {
  if (sol.status == SdpStatus::Optimal) return true;
  const double scale = 1.0 + std::abs(sol.primal_value);
  return sol.primal_residual <= tol && sol.dual_residual <= tol &&
         std::abs(sol.gap) <= 10.0 * tol * scale;
}

double sdp_accuracy_of(const SdpSolution& sol) {
  const double scale = 1.0 + std::abs(sol.primal_value);
  return std::max({sol.primal_residual, sol.dual_residual, std::abs(sol.gap) / (10.0 * scale)});
}

[[noreturn]] void sdp_fail(const char* where, const SdpSolution& sol) {
  std::ostringstream os;
  os << where << ": SDP solve did not certify (status " << to_string(sol.status)
     << ", primal residual " << sol.primal_residual << ", dual residual " << sol.dual_residual
     << ", gap " << sol.gap << ")";
  throw std::runtime_error(os.str());
}

// Moment problem over a pool span with an exact l1 penalty on the moment
// residuals: min <C,X> + bound * sum(u + w) over X PSD, u,w >= 0 with
// <A_m,X> + u_m - w_m = b_m. The slack blocks make the primal strictly
// feasible even when the plain moment constraints pin X to a boundary point,
// and the dual multipliers obey |y_m| <= bound. For bound above the norm of
// the true multipliers the penalty is exact and the solution coincides with
// the constrained one.
SdpProblem penalized_problem(const Eigen::MatrixXd& C, const std::vector<Eigen::MatrixXd>& A,
                             const Eigen::VectorXd& b, double bound) {
  const int K = static_cast<int>(C.rows());
  const int M = static_cast<int>(A.size());
  SdpProblem p;
  p.objective = Eigen::MatrixXd::Zero(K + 2 * M, K + 2 * M);
  p.objective.topLeftCorner(K, K) = C;
  p.objective.diagonal().segment(K, 2 * M).setConstant(bound);
  p.rhs = b;
  for (int m = 0; m < M; ++m) {
    Eigen::MatrixXd am = Eigen::MatrixXd::Zero(K + 2 * M, K + 2 * M);
    am.topLeftCorner(K, K) = A[static_cast<std::size_t>(m)];
    am(K + m, K + m) = 1.0;
    am(K + M + m, K + M + m) = -1.0;
    p.constraints.push_back(std::move(am));
  }
  return p;
}

}  // namespace

void McalDriver::accept_sdp(const char* where, const SdpSolution& sol) {
  if (sdp_acceptable(sol, config_.tol_sdp)) {
    sdp_accuracy_ = std::max(sdp_accuracy_, config_.tol_sdp);
    return;
  }
  // Near the end of a long run the moment constraints become degenerate on
  // the optimal face and path-following stalls a couple of digits short of
  // the target; the best iterate is still accurate enough for the outer loop
  // provided the guards widen with it.
  if (sdp_acceptable(sol, 100.0 * config_.tol_sdp)) {
    sdp_accuracy_ = std::max(sdp_accuracy_, sdp_accuracy_of(sol));
    return;
  }
  sdp_fail(where, sol);
}

McalDriver::DualStep McalDriver::dual_step() {
  if (!initialized_) throw std::logic_error("dual_step: driver not initialized");
  const std::vector<Eigen::MatrixXd> A =
      pool_moment_matrices(*family_, *basis_, mesh_, mass_, pool_.states);
  // An identically-zero constraint map leaves no feasible search direction for
  // the potential. Unreachable for a normalized pool (the A_m sum to 2I), but
  // reported rather than handed to the solver.
  if (rowspace_basis(A).degenerate) {
    DualStep out;
    out.potential = Eigen::VectorXd::Zero(family_->count);
    out.degenerate = true;
    return out;
  }
  const SdpProblem prob =
      penalized_problem(pool_hamiltonian(pool_.states), A, b_, config_.potential_bound);
  // Solve tighter than the acceptance tolerance so consecutive dual/primal
  // values agree within the outer monotonicity margins.
  const SdpSolution sol = solve_sdp(prob, 0.2 * config_.tol_sdp);
  accept_sdp("dual_step", sol);
  DualStep out;
  out.potential = sol.y;
  out.value = sol.dual_value;
  out.gap = std::abs(sol.gap);
  return out;
}

McalDriver::Columns McalDriver::generate_columns(const Eigen::VectorXd& potential) {
  if (potential.size() != family_->count) {
    throw std::invalid_argument("generate_columns: potential coefficient size mismatch");
  }
  if (!potential.allFinite()) {
    throw std::invalid_argument("generate_columns: non-finite potential coefficients");
  }
  const PiecewiseLinear v = family_->combine(potential);
  const TriDiagSym vmass =
      assemble_weighted_mass(mesh_, [&v](double x) { return v.eval(x); }, v.breaks);
  const SpMat wv = assemble_pair_onebody(*basis_, vmass, mass_);
  const SpMat hv = h0_ - wv;

  const double vmax = potential.cwiseAbs().maxCoeff();
  preconditioner_->set_shift(1.0 + 2.0 * vmax);

  EigOptions opt;
  opt.tol = 0.01 * config_.tol_stop;
  opt.seed = config_.seed;
  opt.preconditioner = &*preconditioner_;
  const EigResult eig = smallest_eigpairs(hv, gram_, config_.columns_per_iteration, opt);

  Columns out;
  out.ground_energy = eig.values[0];
  out.states = eig.vectors;
  return out;
}

double McalDriver::primal_step(const Eigen::MatrixXd& new_columns) {
  Eigen::MatrixXd combined(pool_.states.rows(),
                           pool_.states.cols() + new_columns.cols());
  combined << pool_.states, new_columns;
  const OrthoResult ortho = gram_orthonormalize(combined, gram_);

  const std::vector<Eigen::MatrixXd> A =
      pool_moment_matrices(*family_, *basis_, mesh_, mass_, ortho.basis);
  const SdpProblem prob =
      penalized_problem(pool_hamiltonian(ortho.basis), A, b_, config_.potential_bound);
  const SdpSolution sol = solve_sdp(prob, 0.2 * config_.tol_sdp);
  accept_sdp("primal_step", sol);

  const Eigen::MatrixXd Xw = 0.5 * (sol.X.topLeftCorner(ortho.rank, ortho.rank) +
                                    sol.X.topLeftCorner(ortho.rank, ortho.rank).transpose());
  SparseState atoms = spectral_sparsify(Xw, ortho.basis, config_.drop_tol);

  // Retain the dropped zero-occupation spectral directions up to the sparse
  // rank cap: they do not change the optimizer or its moments, but they keep
  // the pool span growing, which is what drives progress while the moment
  // constraints still pin the optimizer down completely.
  const int span_cap = std::min(ortho.rank, family_->count + 1);
  if (atoms.size() < span_cap) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Xw);
    const int pad = span_cap - atoms.size();
    SparseState padded;
    padded.weights.resize(span_cap);
    padded.states.resize(atoms.states.rows(), span_cap);
    padded.weights.head(atoms.size()) = atoms.weights;
    padded.states.leftCols(atoms.size()) = atoms.states;
    for (int k = 0; k < pad; ++k) {
      // Eigenvalues come in ascending order; the kept atoms are the top
      // atoms.size() of them, so the largest dropped one sits just below.
      const int src = ortho.rank - atoms.size() - 1 - k;
      padded.weights[atoms.size() + k] = std::max(0.0, es.eigenvalues()[src]);
      padded.states.col(atoms.size() + k) = ortho.basis * es.eigenvectors().col(src);
    }
    atoms = std::move(padded);
  }

  // Cap the pool at moment_count + 1 atoms while preserving all moments and
  // the energy (Tchakaloff-style reduction over the spectral atoms).
  const int cap = family_->count + 1;
  if (atoms.size() > cap) {
    const int K = atoms.size();
    Eigen::MatrixXd mv(family_->count + 1, K);
    for (int k = 0; k < K; ++k) {
      const PiecewiseQuadratic rho =
          pair_density(*basis_, mesh_, mass_, atoms.states.col(k), atoms.states.col(k));
      for (int m = 0; m < family_->count; ++m) {
        mv(m, k) = rho.integral_against(family_->hat_function(m));
      }
      mv(family_->count, k) = atoms.states.col(k).dot(h0_ * atoms.states.col(k));
    }
    const CaratheodoryResult red = caratheodory_reduce(atoms.weights, mv);
    SparseState reduced;
    const int Kr = static_cast<int>(red.indices.size());
    reduced.weights.resize(Kr);
    reduced.states.resize(atoms.states.rows(), Kr);
    for (int k = 0; k < Kr; ++k) {
      reduced.weights[k] = red.weights[k];
      reduced.states.col(k) = atoms.states.col(red.indices[static_cast<std::size_t>(k)]);
    }
    // Restore descending weight order.
    std::vector<int> order(static_cast<std::size_t>(Kr));
    for (int k = 0; k < Kr; ++k) order[static_cast<std::size_t>(k)] = k;
    std::sort(order.begin(), order.end(),
              [&](int a, int b2) { return reduced.weights[a] > reduced.weights[b2]; });
    SparseState sorted;
    sorted.weights.resize(Kr);
    sorted.states.resize(reduced.states.rows(), Kr);
    for (int k = 0; k < Kr; ++k) {
      sorted.weights[k] = reduced.weights[order[static_cast<std::size_t>(k)]];
      sorted.states.col(k) = reduced.states.col(order[static_cast<std::size_t>(k)]);
    }
    atoms = std::move(sorted);
  }
  pool_ = std::move(atoms);
  return sol.primal_value;
}

double McalDriver::pool_moment_residual(const SparseState& state) const {
  double worst = 0.0;
  Eigen::VectorXd agg = Eigen::VectorXd::Zero(family_->count);
  for (int k = 0; k < state.size(); ++k) {
    const PiecewiseQuadratic rho =
        pair_density(*basis_, mesh_, mass_, state.states.col(k), state.states.col(k));
    for (int m = 0; m < family_->count; ++m) {
      agg[m] += state.weights[k] * rho.integral_against(family_->hat_function(m));
    }
  }
  for (int m = 0; m < family_->count; ++m) {
    worst = std::max(worst, std::abs(agg[m] - b_[m]) / (1.0 + std::abs(b_[m])));
  }
  return worst;
}

std::pair<double, double> McalDriver::certified_bounds() const {
  for (auto it = history_.rbegin(); it != history_.rend(); ++it) {
    if (it->n >= 1) return {it->lower_bound, it->primal_value};
  }
  throw std::logic_error("certified_bounds: no completed iteration");
}

void McalDriver::append_record(const IterationRecord& rec) { history_.push_back(rec); }

RunReport McalDriver::run() {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport report;
  report.config = config_;
  try {
    if (!initialized_) initialize();
    report.target_moments = b_;
    report.rho_target = target_.rho;

    report.status = RunStatus::MaxIterations;
    for (int n = 1; n <= config_.max_iters; ++n) {
      iteration_ = n;
      const DualStep ds = dual_step();
      if (ds.degenerate) {
        throw std::runtime_error("run: dual constraint map is degenerate (empty row space)");
      }
      const Columns cols = generate_columns(ds.potential);
      potential_ = ds.potential;
      const double lower = ds.value + cols.ground_energy;

      IterationRecord rec;
      rec.n = n;
      rec.dual_value = ds.value;
      rec.ground_defect = cols.ground_energy;
      rec.lower_bound = lower;

      const bool stop = cols.ground_energy >= -config_.tol_stop;
      // On stop, one terminal primal solve keeps the reported state within the
      // sparse rank bound; otherwise the new columns enter the pool.
      const double primal = stop ? primal_step(Eigen::MatrixXd(pool_.states.rows(), 0))
                                 : primal_step(cols.states);
      rec.primal_value = primal;
      rec.pool_size = pool_.size();
      rec.sdp_gap = ds.gap;
      rec.moment_residual = pool_moment_residual(pool_);
      append_record(rec);

      // Runtime guard for the descent property of the outer iteration. The
      // margin is looser than the solver tolerance: fully determined moment
      // systems early in the run carry near-null constraint directions that
      // limit the attainable accuracy of the forced primal value.
      const double guard =
          10.0 * std::max(config_.tol_sdp, sdp_accuracy_) * (1.0 + std::abs(rec.dual_value));
      const auto& prev = history_[history_.size() - 2];
      if (n >= 2 && rec.dual_value > prev.dual_value + guard) {
        throw std::runtime_error("run: dual values increased beyond solver tolerance");
      }
      if (n >= 1 && rec.primal_value > rec.dual_value + guard) {
        throw std::runtime_error("run: primal value exceeds dual value beyond solver tolerance");
      }

      if (stop) {
        report.status = RunStatus::Converged;
        break;
      }
    }
  } catch (const std::exception& e) {
    report.status = RunStatus::Failed;
    report.error = e.what();
  }

  report.history = history_;
  report.final_state = pool_;
  report.potential = potential_;
  if (!history_.empty()) {
    report.final_primal = history_.back().primal_value;
    report.final_lower = history_.back().lower_bound;
    report.bracket_width = report.final_primal - report.final_lower;
  }
  if (prepared_ && pool_.size() > 0) {
    // Final mixed density and per-moment residuals.
    PiecewiseQuadratic rho =
        pair_density(*basis_, mesh_, mass_, pool_.states.col(0), pool_.states.col(0));
    rho.scale(pool_.weights[0]);
    for (int k = 1; k < pool_.size(); ++k) {
      PiecewiseQuadratic rk =
          pair_density(*basis_, mesh_, mass_, pool_.states.col(k), pool_.states.col(k));
      rho.axpy(pool_.weights[k], rk);
    }
    report.rho_final = rho;
    report.final_moment_residuals.resize(family_->count);
    for (int m = 0; m < family_->count; ++m) {
      report.final_moment_residuals[m] =
          rho.integral_against(family_->hat_function(m)) - b_[m];
    }
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

double McalDriver::ground_energy(const PiecewiseLinear& v) {
  if (!prepared_) prepare();
  const TriDiagSym vmass =
      assemble_weighted_mass(mesh_, [&v](double x) { return v.eval(x); }, v.breaks);
  const SpMat wv = assemble_pair_onebody(*basis_, vmass, mass_);
  const SpMat hv = h0_ - wv;
  double vmax = 0.0;
  for (double val : v.values) vmax = std::max(vmax, std::abs(val));
  preconditioner_->set_shift(1.0 + 2.0 * vmax);
  EigOptions opt;
  opt.tol = 1e-8;
  opt.seed = config_.seed;
  opt.preconditioner = &*preconditioner_;
  return smallest_eigpairs(hv, gram_, 1, opt).values[0];
}

Checkpoint McalDriver::checkpoint() const {
  Checkpoint ck;
  ck.half_width = config_.half_width;
  ck.intervals = config_.intervals;
  ck.moment_count = config_.moment_count;
  ck.iteration = iteration_;
  ck.weights = pool_.weights;
  ck.states = pool_.states;
  ck.potential = potential_;
  ck.history = history_;
  return ck;
}

void McalDriver::restore(const Checkpoint& ck) {
  if (!prepared_) prepare();
  if (ck.intervals != config_.intervals || ck.moment_count != config_.moment_count ||
      std::abs(ck.half_width - config_.half_width) > 1e-12) {
    throw std::invalid_argument("restore: checkpoint does not match the configuration");
  }
  if (ck.states.rows() != basis_->n2) {
    throw std::invalid_argument("restore: wedge dimension mismatch");
  }
  pool_.weights = ck.weights;
  pool_.states = ck.states;
  potential_ = ck.potential;
  history_ = ck.history;
  iteration_ = ck.iteration;
  initialized_ = true;
}

RunReport run_mcal(const McalConfig& config) {
  McalDriver driver(config);
  return driver.run();
}

}  // namespace mcal
