#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace mcal {

/// min <C, X>  s.t.  <A_j, X> = b_j,  X PSD.
struct SdpProblem {
  Eigen::MatrixXd objective;                  // C, symmetric K x K
  std::vector<Eigen::MatrixXd> constraints;   // A_j, symmetric K x K
  Eigen::VectorXd rhs;                        // b

  int dim() const { return static_cast<int>(objective.rows()); }
  int num_constraints() const { return static_cast<int>(constraints.size()); }
};

enum class SdpStatus { Optimal, MaxIterations, InfeasibleSuspected, UnboundedSuspected };

std::string to_string(SdpStatus s);

struct SdpSolution {
  Eigen::MatrixXd X;        // primal matrix
  Eigen::VectorXd y;        // dual multipliers
  Eigen::MatrixXd S;        // dual slack C - sum y_j A_j
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;         // primal_value - dual_value
  double primal_residual = 0.0;  // max_j |<A_j,X> - b_j| / (1 + |b_j|)
  double dual_residual = 0.0;    // ||C - S - sum y A||_F / (1 + ||C||_F)
  SdpStatus status = SdpStatus::MaxIterations;
  int iterations = 0;
};

/// Infeasible-start primal-dual path following (HKM direction, Mehrotra
/// predictor-corrector). Constraint matrices must be linearly independent;
/// dependent families are rejected rather than regularized.
SdpSolution solve_sdp(const SdpProblem& problem, double tol = 1e-9, int max_iter = 200);

/// Direct solution for instances whose constraints span the entire symmetric
/// space, so the feasible set is (at most) a single matrix: X is the least-norm
/// solution of the constraint system, y solves sum y_j A_j = C in least squares
/// and S is the (near-zero) remainder. The returned status is optimal only when
/// the residuals certify at `tol`; PSD-ness of X is the caller's check.
SdpSolution solve_determined_sdp(const SdpProblem& problem, double tol = 1e-9);

/// Smallest eigenvalue of a symmetric matrix.
double min_eig_sym(const Eigen::MatrixXd& m);

}  // namespace mcal
