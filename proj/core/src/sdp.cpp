#include "mcal/sdp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mcal {

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal:
      return "optimal";
    case SdpStatus::MaxIterations:
      return "max-iterations";
    case SdpStatus::InfeasibleSuspected:
      return "infeasible-suspected";
    case SdpStatus::UnboundedSuspected:
      return "unbounded-suspected";
  }
  return "unknown";
}

double min_eig_sym(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) throw std::invalid_argument("min_eig_sym: non-finite entries");
  if (m.rows() != m.cols()) throw std::invalid_argument("min_eig_sym: matrix not square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

namespace {

double inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a.array() * b.array()).sum();
}

void validate(const SdpProblem& p) {
  const int K = p.dim();
  const int J = p.num_constraints();
  if (K < 1) throw std::invalid_argument("solve_sdp: empty problem");
  if (J < 1) throw std::invalid_argument("solve_sdp: need at least one constraint");
  if (p.rhs.size() != J) throw std::invalid_argument("solve_sdp: rhs size mismatch");
  auto check_sym = [&](const Eigen::MatrixXd& m, const char* what) {
    if (m.rows() != K || m.cols() != K) {
      throw std::invalid_argument(std::string("solve_sdp: dimension mismatch in ") + what);
    }
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + m.cwiseAbs().maxCoeff())) {
      throw std::invalid_argument(std::string("solve_sdp: non-symmetric ") + what);
    }
  };
  check_sym(p.objective, "objective");
  for (const auto& a : p.constraints) check_sym(a, "constraint");

  // Reject linearly dependent constraints; reduction belongs to the caller.
  Eigen::MatrixXd stacked(J, K * K);
  for (int j = 0; j < J; ++j) {
    Eigen::MatrixXd flat = p.constraints[static_cast<std::size_t>(j)];
    stacked.row(j) = Eigen::Map<const Eigen::VectorXd>(flat.data(), K * K).transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
  const auto& sv = svd.singularValues();
  if (!(sv[0] > 0.0) || sv[sv.size() - 1] <= 1e-12 * sv[0]) {
    throw std::invalid_argument("solve_sdp: linearly dependent constraint matrices");
  }
}

// Largest alpha in (0, 1] with X + alpha * dX staying PSD, damped by tau.
double step_length(const Eigen::MatrixXd& x, const Eigen::MatrixXd& dx, double tau) {
  Eigen::LLT<Eigen::MatrixXd> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const Eigen::MatrixXd l = llt.matrixL();
  const Eigen::MatrixXd m =
      l.triangularView<Eigen::Lower>().solve(
          l.triangularView<Eigen::Lower>().solve(dx).transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                    Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()[0];
  if (lmin >= 0.0) return 1.0;
  return std::min(1.0, -tau / lmin);
}

}  // namespace

SdpSolution solve_determined_sdp(const SdpProblem& p, double tol) {
  validate(p);
  const int K = p.dim();
  const int J = p.num_constraints();
  Eigen::MatrixXd R(J, K * K);
  for (int j = 0; j < J; ++j) {
    R.row(j) = Eigen::Map<const Eigen::VectorXd>(
                   p.constraints[static_cast<std::size_t>(j)].data(), K * K)
                   .transpose();
  }
  // Orthogonal decompositions rather than normal equations: the constraint
  // Gram would square the conditioning and costs ~8 digits on tight instances.
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> codR(R);
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> codRt(R.transpose().eval());

  SdpSolution sol;
  // Least-norm constraint solution; it is symmetric because it is a
  // combination of the (symmetric) constraint matrices.
  const Eigen::VectorXd xv = codR.solve(p.rhs);
  sol.X = 0.5 * (Eigen::Map<const Eigen::MatrixXd>(xv.data(), K, K) +
                 Eigen::Map<const Eigen::MatrixXd>(xv.data(), K, K).transpose());
  const Eigen::VectorXd cv = Eigen::Map<const Eigen::VectorXd>(p.objective.data(), K * K);
  sol.y = codRt.solve(cv);
  sol.S = p.objective;
  for (int j = 0; j < J; ++j) sol.S -= sol.y[j] * p.constraints[static_cast<std::size_t>(j)];
  sol.primal_value = inner(p.objective, sol.X);
  sol.dual_value = p.rhs.dot(sol.y);
  sol.gap = sol.primal_value - sol.dual_value;
  for (int j = 0; j < J; ++j) {
    sol.primal_residual = std::max(
        sol.primal_residual,
        std::abs(inner(p.constraints[static_cast<std::size_t>(j)], sol.X) - p.rhs[j]) /
            (1.0 + std::abs(p.rhs[j])));
  }
  sol.dual_residual = 0.0;  // S is the dual remainder by construction
  const bool psd_slack = min_eig_sym(sol.S) >= -tol * (1.0 + p.objective.norm());
  const bool certified = sol.primal_residual <= tol &&
                         std::abs(sol.gap) <= tol * (1.0 + std::abs(sol.primal_value));
  sol.status = (psd_slack && certified) ? SdpStatus::Optimal : SdpStatus::MaxIterations;
  sol.iterations = 0;
  return sol;
}

SdpSolution solve_sdp(const SdpProblem& p, double tol, int max_iter) {
  validate(p);
  const int K = p.dim();
  const int J = p.num_constraints();
  const auto& C = p.objective;
  const auto& b = p.rhs;

  double scale = 1.0 + C.cwiseAbs().maxCoeff();
  for (const auto& a : p.constraints) scale = std::max(scale, 1.0 + a.cwiseAbs().maxCoeff());
  scale = std::max(scale, 1.0 + b.cwiseAbs().maxCoeff());
  const double tau0 = scale;

  Eigen::MatrixXd X = tau0 * Eigen::MatrixXd::Identity(K, K);
  Eigen::MatrixXd S = tau0 * Eigen::MatrixXd::Identity(K, K);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(J);

  const double bnorm = 1.0 + b.cwiseAbs().maxCoeff();
  const double cnorm = 1.0 + C.norm();

  SdpSolution sol;
  auto record = [&](SdpStatus status, int iter) {
    sol.X = X;
    sol.y = y;
    sol.S = S;
    sol.primal_value = inner(C, X);
    sol.dual_value = b.dot(y);
    sol.gap = sol.primal_value - sol.dual_value;
    double pres = 0.0;
    for (int j = 0; j < J; ++j) {
      pres = std::max(pres, std::abs(inner(p.constraints[static_cast<std::size_t>(j)], X) - b[j]) /
                                (1.0 + std::abs(b[j])));
    }
    sol.primal_residual = pres;
    Eigen::MatrixXd rd = C - S;
    for (int j = 0; j < J; ++j) rd -= y[j] * p.constraints[static_cast<std::size_t>(j)];
    sol.dual_residual = rd.norm() / cnorm;
    sol.status = status;
    sol.iterations = iter;
  };

  // On degenerate instances the central path becomes untraversable near the
  // solution and late iterations can move away from the best point reached;
  // keep the iterate with the smallest combined residual and fall back to it.
  double best_merit = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd Xbest = X, Sbest = S;
  Eigen::VectorXd ybest = y;
  int best_iter = 0;
  int stall_count = 0;
  auto record_best = [&](SdpStatus status) {
    X = Xbest;
    y = ybest;
    S = Sbest;
    record(status, best_iter);
  };

  std::vector<Eigen::MatrixXd> XAS(static_cast<std::size_t>(J));
  for (int iter = 0; iter < max_iter; ++iter) {
    // Residuals.
    Eigen::VectorXd rp(J);
    for (int j = 0; j < J; ++j) rp[j] = b[j] - inner(p.constraints[static_cast<std::size_t>(j)], X);
    Eigen::MatrixXd Rd = C - S;
    for (int j = 0; j < J; ++j) Rd -= y[j] * p.constraints[static_cast<std::size_t>(j)];
    const double mu = inner(X, S) / K;
    const double gap = std::abs(inner(C, X) - b.dot(y));

    if (rp.cwiseAbs().maxCoeff() <= tol * bnorm && Rd.norm() <= tol * cnorm &&
        gap <= tol * (1.0 + std::abs(inner(C, X)))) {
      record(SdpStatus::Optimal, iter);
      return sol;
    }

    const double merit = std::max({rp.cwiseAbs().maxCoeff() / bnorm, Rd.norm() / cnorm,
                                   gap / (1.0 + std::abs(inner(C, X)))});
    if (merit < 0.9 * best_merit) {
      best_merit = merit;
      Xbest = X;
      ybest = y;
      Sbest = S;
      best_iter = iter;
      stall_count = 0;
    } else if (++stall_count >= 25) {
      record_best(SdpStatus::MaxIterations);
      return sol;
    }

    // Divergence heuristics.
    const double xnorm = X.norm();
    const double ynorm = y.norm();
    if (ynorm > 1e10 * scale && rp.cwiseAbs().maxCoeff() <= tol * bnorm) {
      record(SdpStatus::InfeasibleSuspected, iter);
      return sol;
    }
    if (xnorm > 1e10 * scale && inner(C, X) < -1e10 * scale) {
      record(SdpStatus::UnboundedSuspected, iter);
      return sol;
    }

    Eigen::LLT<Eigen::MatrixXd> slt(S);
    if (slt.info() != Eigen::Success) {
      record_best(SdpStatus::MaxIterations);
      return sol;
    }
    auto sinv = [&](const Eigen::MatrixXd& m) { return slt.solve(m); };

    // Schur complement M_jk = <A_j, X A_k S^{-1}>.
    Eigen::MatrixXd schur(J, J);
    for (int k = 0; k < J; ++k) {
      XAS[static_cast<std::size_t>(k)] =
          X * sinv(p.constraints[static_cast<std::size_t>(k)]).transpose();
    }
    for (int j = 0; j < J; ++j) {
      for (int k = 0; k < J; ++k) {
        schur(j, k) = inner(p.constraints[static_cast<std::size_t>(j)],
                            XAS[static_cast<std::size_t>(k)]);
      }
    }
    // The Schur complement is PSD but can become numerically singular when the
    // iterate approaches a degenerate face (blowing up the LU solve); factor
    // with an escalating ridge instead of giving up.
    Eigen::LLT<Eigen::MatrixXd> schur_f;
    double ridge = 0.0;
    const double ridge0 = 1e-14 * (1.0 + schur.diagonal().cwiseAbs().maxCoeff());
    auto factor = [&]() {
      Eigen::MatrixXd reg = 0.5 * (schur + schur.transpose());
      if (ridge > 0.0) reg.diagonal().array() += ridge;
      schur_f.compute(reg);
      return schur_f.info() == Eigen::Success;
    };
    auto bump_ridge = [&]() { ridge = (ridge == 0.0) ? ridge0 : 1e4 * ridge; };
    while (!factor() && ridge < 1e20 * ridge0) bump_ridge();
    if (schur_f.info() != Eigen::Success) {
      record_best(SdpStatus::MaxIterations);
      return sol;
    }

    const Eigen::MatrixXd Sinv = sinv(Eigen::MatrixXd::Identity(K, K));
    const Eigen::MatrixXd XRdSinv = X * sinv(Rd).transpose();

    auto direction = [&](double sigma_mu, const Eigen::MatrixXd& corr, Eigen::MatrixXd& dX,
                         Eigen::VectorXd& dy, Eigen::MatrixXd& dS) {
      Eigen::VectorXd rhs(J);
      for (int j = 0; j < J; ++j) {
        rhs[j] = b[j] - sigma_mu * inner(p.constraints[static_cast<std::size_t>(j)], Sinv) +
                 inner(p.constraints[static_cast<std::size_t>(j)], XRdSinv) +
                 inner(p.constraints[static_cast<std::size_t>(j)], corr);
      }
      dy = schur_f.solve(rhs);
      dy += schur_f.solve(rhs - schur * dy);  // one refinement pass for late-stage conditioning
      dS = Rd;
      for (int j = 0; j < J; ++j) dS -= dy[j] * p.constraints[static_cast<std::size_t>(j)];
      dX = sigma_mu * Sinv - X - X * sinv(dS).transpose() - corr;
      dX = 0.5 * (dX + dX.transpose()).eval();
    };

    // Predictor-corrector; a non-finite direction means the (ridged) Schur
    // solve still blew up, so escalate the ridge and retry before giving up.
    const double tau = 0.98;
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(K, K);
    Eigen::MatrixXd dXa, dSa, dX, dS;
    Eigen::VectorXd dya, dy;
    bool have_direction = false;
    for (int attempt = 0; attempt < 4 && !have_direction; ++attempt) {
      if (attempt > 0) {
        bump_ridge();
        if (!factor()) continue;
      }
      direction(0.0, zero, dXa, dya, dSa);
      if (!dXa.allFinite() || !dSa.allFinite()) continue;
      const double apa = step_length(X, dXa, tau);
      const double ada = step_length(S, dSa, tau);
      const double mu_aff = inner(X + apa * dXa, S + ada * dSa) / K;
      double sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3.0);
      sigma = std::min(std::max(sigma, 1e-10), 1.0);

      // Mehrotra second-order term.
      Eigen::MatrixXd corr = dXa * sinv(dSa).transpose();
      corr = 0.5 * (corr + corr.transpose()).eval();
      direction(sigma * mu, corr, dX, dy, dS);
      have_direction = dX.allFinite() && dS.allFinite();
    }
    if (!have_direction) {
      record_best(SdpStatus::MaxIterations);
      return sol;
    }

    const double ap = step_length(X, dX, tau);
    const double ad = step_length(S, dS, tau);
    if (ap <= 1e-14 || ad <= 1e-14) {
      record_best(SdpStatus::MaxIterations);
      return sol;
    }
    X += ap * dX;
    y += ad * dy;
    S += ad * dS;
  }
  {
    // Re-score the final iterate against the best seen before deciding.
    Eigen::VectorXd rp(J);
    for (int j = 0; j < J; ++j) rp[j] = b[j] - inner(p.constraints[static_cast<std::size_t>(j)], X);
    Eigen::MatrixXd Rd = C - S;
    for (int j = 0; j < J; ++j) Rd -= y[j] * p.constraints[static_cast<std::size_t>(j)];
    const double gap = std::abs(inner(C, X) - b.dot(y));
    const double merit = std::max({rp.cwiseAbs().maxCoeff() / bnorm, Rd.norm() / cnorm,
                                   gap / (1.0 + std::abs(inner(C, X)))});
    if (merit < best_merit) {
      record(SdpStatus::MaxIterations, max_iter);
    } else {
      record_best(SdpStatus::MaxIterations);
    }
  }
  return sol;
}

}  // namespace mcal
