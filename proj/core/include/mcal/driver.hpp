#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mcal/eigs.hpp"
#include "mcal/fem1d.hpp"
#include "mcal/moments.hpp"
#include "mcal/pair_space.hpp"
#include "mcal/piecewise.hpp"
#include "mcal/sdp.hpp"
#include "mcal/sparsify.hpp"

namespace mcal {

struct McalConfig {
  double half_width = 10.0;        // L
  int intervals = 100;             // D
  int moment_count = 20;           // M
  int columns_per_iteration = 4;   // eigenpairs appended per iteration
  KernelSpec kernel = KernelSpec::softcore(1.0);
  double tol_sdp = 1e-8;
  double tol_stop = 1e-6;
  double drop_tol = 1e-10;
  // Box bound on the moment-potential coefficients (exact l1 penalty weight on
  // the moment residuals in the primal). Keeps the dual multipliers bounded
  // when the moment constraints over a small pool have no strict interior.
  double potential_bound = 50.0;
  int max_iters = 100;
  std::uint64_t seed = 20240612;
  std::string density_file;        // empty: builtin even/odd construction

  void validate() const;
};

struct TargetDensity {
  PiecewiseQuadratic rho;
  Eigen::VectorXd initial_state;  // G-normalized wedge coefficients
};

struct IterationRecord {
  int n = 0;
  double dual_value = 0.0;       // F^n, NaN for n = 0
  double primal_value = 0.0;     // F~^n
  double ground_defect = 0.0;    // E(v_n), NaN for n = 0
  int pool_size = 0;             // K_n after sparsification
  double sdp_gap = 0.0;
  double lower_bound = 0.0;      // F^n + E(v_n), NaN for n = 0
  double moment_residual = 0.0;  // max_m |rho_Gamma moment - b_m| / (1+|b_m|)
};

enum class RunStatus { Converged, MaxIterations, Failed };

std::string to_string(RunStatus s);

struct RunReport {
  RunStatus status = RunStatus::Failed;
  std::string error;
  std::vector<IterationRecord> history;
  SparseState final_state;
  Eigen::VectorXd potential;                // y in R^M
  double final_primal = 0.0;                // last F~
  double final_lower = 0.0;
  double bracket_width = 0.0;
  Eigen::VectorXd target_moments;           // b
  Eigen::VectorXd final_moment_residuals;   // per m, absolute
  PiecewiseQuadratic rho_target;
  PiecewiseQuadratic rho_final;
  double wall_seconds = 0.0;
  McalConfig config;
};

struct Checkpoint {
  double half_width = 0.0;
  int intervals = 0;
  int moment_count = 0;
  int iteration = 0;
  Eigen::VectorXd weights;
  Eigen::MatrixXd states;
  Eigen::VectorXd potential;
  std::vector<IterationRecord> history;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

/// Column-generation driver: initialization under the single-state assumption,
/// dual SDP for the potential, ground-state column generation, primal SDP and
/// sparsification, certified energy brackets.
class McalDriver {
 public:
  explicit McalDriver(const McalConfig& config);

  // Assembly and target construction; fills the target moments.
  void prepare();
  // Verifies that the single-atom pool reproduces the target moments, then
  // sets up the n = 0 state (the initialization SDP is forced when K_0 = 1).
  void initialize();

  struct DualStep {
    Eigen::VectorXd potential;  // y in R^M
    double value = 0.0;         // F^n
    double gap = 0.0;
    bool degenerate = false;
  };
  DualStep dual_step();

  struct Columns {
    double ground_energy = 0.0;  // E(v_n)
    Eigen::MatrixXd states;
  };
  Columns generate_columns(const Eigen::VectorXd& potential);

  /// Primal SDP over pool ∪ columns followed by sparsification; returns F~^n.
  double primal_step(const Eigen::MatrixXd& new_columns);

  /// (lower, upper) certified bracket from the last completed iteration.
  std::pair<double, double> certified_bounds() const;

  RunReport run();

  /// Unconstrained ground energy of H - W^v on the wedge space.
  double ground_energy(const PiecewiseLinear& v);

  Checkpoint checkpoint() const;
  void restore(const Checkpoint& ck);

  // Accessors (assembled state; valid after prepare()).
  const Mesh1D& mesh() const { return mesh_; }
  const PairBasis& basis() const { return *basis_; }
  const TriDiagSym& mass() const { return mass_; }
  const SpMat& gram() const { return gram_; }
  const SpMat& hamiltonian() const { return h0_; }
  const MomentFamily& family() const { return *family_; }
  const TargetDensity& target() const { return target_; }
  Eigen::VectorXd& target_moments_mutable() { return b_; }
  const Eigen::VectorXd& target_moments() const { return b_; }
  const SparseState& pool() const { return pool_; }
  const std::vector<IterationRecord>& history() const { return history_; }

 private:
  Eigen::MatrixXd pool_hamiltonian(const Eigen::MatrixXd& states) const;
  // Accept a solve at tol_sdp, or degrade gracefully (up to 100x) on
  // degenerate instances; remembers the worst accepted accuracy so the outer
  // monotonicity guards can widen accordingly.
  void accept_sdp(const char* where, const SdpSolution& sol);
  double pool_moment_residual(const SparseState& state) const;
  void append_record(const IterationRecord& rec);

  McalConfig config_;
  Mesh1D mesh_;
  TriDiagSym mass_, stiffness_;
  std::optional<PairBasis> basis_;
  SpMat gram_, kinetic_, interaction_, h0_;
  std::optional<MomentFamily> family_;
  std::optional<WedgePreconditioner> preconditioner_;
  TargetDensity target_;
  Eigen::VectorXd b_;

  SparseState pool_;
  Eigen::VectorXd potential_;
  double sdp_accuracy_ = 0.0;  // worst accepted SDP accuracy this run
  std::vector<IterationRecord> history_;
  int iteration_ = 0;
  bool prepared_ = false;
  bool initialized_ = false;
};

TargetDensity build_target(const McalConfig& config, const Mesh1D& mesh, const PairBasis& basis,
                           const TriDiagSym& mass, const SpMat& gram);

RunReport run_mcal(const McalConfig& config);

}  // namespace mcal
