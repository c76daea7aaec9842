#pragma once

#include <vector>

#include "stoclq/control_law.hpp"

namespace stoclq {

// Sigma solving Sigma = A_K Sigma A_K^T + Sigma_W, by doubling:
//   S_{j+1} = S_j + M_j S_j M_j^T,  M_{j+1} = M_j^2,  S_0 = Sigma_W,
// stopping at relative increment 1e-12. Requires rho(A_K) < 1 (NoConvergence
// otherwise). Residual contract: ||Sigma - A_K Sigma A_K^T - Sigma_W||_max
// <= 1e-9 (1 + ||Sigma||_max).
SymMatrix solve_lyapunov(const Matrix& A_K, const SymMatrix& sigma_w);

// The optimal stationary pair: Us = K Xs with Xs ~ N(0, Sigma_s), where
// Sigma_s is the stationary covariance of the optimal closed loop A_K = A + BK.
struct StationaryPair {
  Matrix K;
  Vector mean;    // zero
  SymMatrix cov;  // Sigma_s
  Matrix A_K;
};
StationaryPair build_stationary_pair(const LtiStochasticSystem& sys,
                                     const RiccatiSolution& sol);

// Whether X and the stationary comparison process Xs are driven by the same
// noise sequence (the setting all storage-function identities require) or by
// independent copies (ablation).
enum class NoiseCoupling { Shared, Independent };

// E||G Z + g||^2_W for Z ~ (mean, cov):
//   tr(W G cov G^T) + (G mean + g)^T W (G mean + g).
double quadratic_form_expectation(const SymMatrix& W, const Matrix& G,
                                  const Vector& g, const Vector& mean,
                                  const SymMatrix& cov);

// Exact first and second moments of the joint process Z(k) = (X(k), Xs(k)),
// k = 0..N, under an affine law U = Fx X + Fs Xs + c and Us = K Xs:
//   Z(k+1) = T(k) Z(k) + [B c(k); 0] + noise,
//   T(k) = [[A + B Fx(k), B Fs(k)], [0, A_K]],
// noise covariance [[Sigma_W, Sigma_W], [Sigma_W, Sigma_W]] under shared noise
// and blockdiag(Sigma_W, Sigma_W) under independent noise.
class MomentTrajectory {
 public:
  MomentTrajectory(std::vector<Vector> means, std::vector<SymMatrix> covs,
                   AffineControlLaw law, Matrix stationary_gain,
                   NoiseCoupling coupling);

  Index horizon() const { return static_cast<Index>(means_.size()) - 1; }
  Index state_dim() const { return gain_.cols(); }
  Index control_dim() const { return gain_.rows(); }
  NoiseCoupling coupling() const { return coupling_; }

  const Vector& mean(Index k) const { return means_.at(static_cast<size_t>(k)); }
  const SymMatrix& cov(Index k) const { return covs_.at(static_cast<size_t>(k)); }
  const AffineControlLaw& law() const { return law_; }
  const Matrix& stationary_gain() const { return gain_; }

  // E||G Z(k) + g||^2_W.
  double quadratic(Index k, const Matrix& G, const Vector& g,
                   const SymMatrix& W) const;

  // Marginals and the selectors for the processes the diagnostics evaluate.
  GaussianState x_state(Index k) const;
  GaussianState xs_state(Index k) const;
  Matrix x_selector() const;          // X          = [I 0] Z
  Matrix xs_selector() const;         // Xs         = [0 I] Z
  Matrix diff_selector() const;       // X - Xs     = [I -I] Z
  Matrix control_selector(Index k) const;       // U       = [Fx Fs] Z + c
  Matrix stationary_control_selector() const;   // Us      = [0 K] Z
  Matrix control_diff_selector(Index k) const;  // U - Us  = [Fx Fs-K] Z + c
  // (X - Xs, U - Us) stacked: [[I, -I], [Fx, Fs - K]] Z + [0; c].
  Matrix joint_diff_selector(Index k) const;
  Vector joint_diff_offset(Index k) const;

 private:
  std::vector<Vector> means_;
  std::vector<SymMatrix> covs_;
  AffineControlLaw law_;
  Matrix gain_;  // stationary K, for the Us selectors
  NoiseCoupling coupling_;
};

// Standard start: X(0) ~ init independent of Xs(0) ~ N(0, Sigma_s).
MomentTrajectory propagate_joint_moments(const LtiStochasticSystem& sys,
                                         const AffineControlLaw& law,
                                         const StationaryPair& pair,
                                         const GaussianState& init, Index N,
                                         NoiseCoupling coupling = NoiseCoupling::Shared);

// Explicit initial joint moments (2n mean, 2n x 2n cov), for coupled starts
// such as X(0) = Xs(0).
MomentTrajectory propagate_joint_moments(const LtiStochasticSystem& sys,
                                         const AffineControlLaw& law,
                                         const StationaryPair& pair,
                                         const Vector& init_mean,
                                         const SymMatrix& init_cov, Index N,
                                         NoiseCoupling coupling = NoiseCoupling::Shared);

// l(X(k), U(k)) from the propagated moments.
double trajectory_stage_cost(const QuadraticCost& cost,
                             const MomentTrajectory& traj, Index k);

// sum_{k<N} l(X(k), U(k)) from the propagated moments.
double trajectory_cost(const QuadraticCost& cost, const MomentTrajectory& traj,
                       Index N);

}  // namespace stoclq
