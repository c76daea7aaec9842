#pragma once

#include <optional>

#include "stoclq/stationary.hpp"

// Strict-dissipativity certificate for the stochastic LQ problem and the
// storage-function chain it supports. With P the DARE solution, S~ > 0
// satisfying Q + S~ - A^T S~ A > 0, gamma in (0,1] and S = gamma S~:
//
//   lambda_hat(k)   = -E||X(k)||^2_P
//   lambda_bar(k)   = -E[ ||X(k)||^2_P - ||X(k)-Xs(k)||^2_P ]
//   lambda_tilde(k) = lambda_bar(k) + E||X(k)-Xs(k)||^2_S
//
// each turns l(X,U) - l(Xs,Us) into a dissipation inequality whose rate is,
// respectively, E||U-KX||^2_Rtilde, E[||X~||^2_Q + ||U~||^2_R], and
// E||(X~,U~)||^2_H, where the identities for the last two require X and Xs to
// share the noise sequence.

namespace stoclq {

struct DissipativityCertificate {
  SymMatrix P;
  SymMatrix S_tilde;
  double gamma = 0.0;
  SymMatrix S;        // gamma * S_tilde
  SymMatrix Q_gamma;  // Q + gamma (S_tilde - A^T S_tilde A)
  SymMatrix R_gamma;  // R - gamma B^T S_tilde B
  SymMatrix H;        // [[Q_gamma, -gamma A^T S_tilde B], [sym, R_gamma]]
  double lambda_min_H_lower = 0.0;  // certified > 0
};

// Searches S~ = sigma I (then retries S~ = sigma P) with sigma in [1e-8, 1e6],
// maximizing the certified smallest-eigenvalue margin of Q + S~ - A^T S~ A by
// golden section on log sigma (the margin is concave in sigma, so unimodal).
// Succeeds when the margin reaches 1e-10 (1 + ||Q||_max); otherwise throws
// CertificateNotFound carrying the best margin seen.
SymMatrix find_Stilde(const LtiStochasticSystem& sys, const QuadraticCost& cost);

// The quadratic form of the tightened stage cost, gamma in (0, 1]:
//   ||x||^2_Qg + ||u||^2_Rg - 2 gamma x^T A^T S~ B u.
SymMatrix assemble_H(const LtiStochasticSystem& sys, const QuadraticCost& cost,
                     const SymMatrix& S_tilde, double gamma);

// Halving from gamma = 1 until H(gamma) > 0 and R_gamma > 0, then a geometric
// refinement toward the infeasible boundary; returns the largest certified
// gamma within a factor 1.01. Throws CertificateNotFound below 1e-12.
struct GammaResult {
  double gamma = 0.0;
  SymMatrix H;
};
GammaResult find_gamma(const LtiStochasticSystem& sys, const QuadraticCost& cost,
                       const SymMatrix& S_tilde);

// Assembles the full certificate; overrides (when given) are verified rather
// than trusted and rejected with CertificateNotFound if they fail.
DissipativityCertificate build_certificate(
    const LtiStochasticSystem& sys, const QuadraticCost& cost,
    const RiccatiSolution& sol,
    const std::optional<SymMatrix>& S_tilde_override = std::nullopt,
    const std::optional<double>& gamma_override = std::nullopt);

double storage_lambda_hat(const SymMatrix& P, const MomentTrajectory& traj,
                          Index k);
double storage_lambda_bar(const SymMatrix& P, const MomentTrajectory& traj,
                          Index k);
double storage_lambda_tilde(const SymMatrix& P, const SymMatrix& S,
                            const MomentTrajectory& traj, Index k);

// Uniform lower bound on lambda_tilde over all X-distributions when
// Xs ~ N(0, stationary_cov): pointwise minimization over x gives
// M = -tr((P + S) S^{-1} P stationary_cov).
double lower_bound_M(const SymMatrix& P, const SymMatrix& S,
                     const SymMatrix& stationary_cov);

// Evaluates all three dissipation identities along a propagated trajectory and
// reports the max absolute residual of each, plus the largest magnitude among
// the quantities compared (for relative assessments).
struct ChainResiduals {
  double hat_max = 0.0;
  double bar_max = 0.0;
  double tilde_max = 0.0;
  double scale = 0.0;
};
ChainResiduals verify_dissipation_chain(const LtiStochasticSystem& sys,
                                        const QuadraticCost& cost,
                                        const DissipativityCertificate& cert,
                                        const RiccatiSolution& sol,
                                        const StationaryPair& pair,
                                        const AffineControlLaw& law,
                                        const GaussianState& init, Index N);

}  // namespace stoclq
