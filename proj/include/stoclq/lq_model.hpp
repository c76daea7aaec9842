#pragma once

#include "stoclq/matrix_kernel.hpp"

// Problem data for the stochastic linear-quadratic setting:
//   X(k+1) = A X(k) + B U(k) + W(k),  W(k) ~ N(0, Sigma_W) i.i.d.
// with stage cost l(X, U) = E[ ||X||_Q^2 + ||U||_R^2 ].

namespace stoclq {

class LtiStochasticSystem {
 public:
  // Validates: A square n x n, B is n x l, Sigma_W is n x n positive
  // semidefinite (clamped factorization must reconstruct), all entries finite.
  LtiStochasticSystem(const Matrix& A, const Matrix& B, const SymMatrix& sigma_w);

  Index state_dim() const { return a_.rows(); }
  Index control_dim() const { return b_.cols(); }
  const Matrix& A() const { return a_; }
  const Matrix& B() const { return b_; }
  const SymMatrix& sigma_w() const { return sigma_w_; }
  // L with Sigma_W = L L^T (clamped PSD factor), used to correlate samples.
  const Matrix& noise_factor() const { return noise_factor_; }

 private:
  Matrix a_, b_;
  SymMatrix sigma_w_;
  Matrix noise_factor_;
};

class QuadraticCost {
 public:
  // Q must be positive semidefinite, R positive definite.
  QuadraticCost(const SymMatrix& Q, const SymMatrix& R);

  const SymMatrix& Q() const { return q_; }
  const SymMatrix& R() const { return r_; }
  // Lq with Q = Lq Lq^T, used as the output map in the detectability probe.
  const Matrix& q_factor() const { return q_factor_; }

 private:
  SymMatrix q_, r_;
  Matrix q_factor_;
};

// First and second moments of a Gaussian state; cov must be PSD.
struct GaussianState {
  GaussianState(const Vector& mean_in, const SymMatrix& cov_in);
  Vector mean;
  SymMatrix cov;
};

// System + cost + initial state, as read from a problem JSON file.
struct Problem {
  LtiStochasticSystem sys;
  QuadraticCost cost;
  GaussianState x0;
};

// Stabilizability / detectability are probed by whether the associated
// Riccati value iterations converge (stabilizable: DARE for (A, B, I, I);
// detectable: dual DARE for (A^T, Lq, I, I) with Q = Lq Lq^T). These are
// convergence proxies, not PBH rank tests, hence the `proxy_probes` flag.
struct ValidationReport {
  bool dimensions_ok = false;
  bool stabilizable = false;
  bool detectable = false;
  int stabilizable_iterations = 0;
  int detectable_iterations = 0;
  bool proxy_probes = true;
  bool ok() const { return dimensions_ok && stabilizable && detectable; }
};
ValidationReport validate(const LtiStochasticSystem& sys, const QuadraticCost& cost);

// l(X, U) for Gaussian moments:
//   tr(Q cov_x) + mean_x^T Q mean_x + tr(R cov_u) + mean_u^T R mean_u.
// The state/control cross-covariance does not enter a separable quadratic
// stage cost; the parameter exists so call sites carry the full joint moment.
double stage_cost(const QuadraticCost& cost, const GaussianState& state,
                  const Vector& ctrl_mean, const SymMatrix& ctrl_cov,
                  const Matrix& cross_cov);

}  // namespace stoclq
