#include "stoclq/riccati.hpp"

#include "stoclq/stationary.hpp"

namespace stoclq {

namespace {

struct BackwardStep {
  SymMatrix P_prev;
  Matrix K;
  SymMatrix Rtilde;
};

// One backward Riccati step from P_next. Throws NotPositiveDefinite if
// R + B^T P_next B fails to factor (cannot happen for R > 0, P_next >= 0).
BackwardStep backward_step(const LtiStochasticSystem& sys,
                           const QuadraticCost& cost, const SymMatrix& P_next) {
  const Matrix& A = sys.A();
  const Matrix& B = sys.B();
  BackwardStep step;
  step.Rtilde =
      SymMatrix(cost.R().mat() + symmetrize(B.transpose() * P_next.mat() * B));
  const Matrix cross = B.transpose() * P_next.mat() * A;  // B^T P A
  const Matrix gain = solve_linear(step.Rtilde, cross);   // Rtilde^{-1} B^T P A
  step.K = -gain;
  step.P_prev = SymMatrix(symmetrize(A.transpose() * P_next.mat() * A) +
                          cost.Q().mat() - symmetrize(cross.transpose() * gain));
  return step;
}

void check_problem_dims(const LtiStochasticSystem& sys, const QuadraticCost& cost) {
  if (cost.Q().dim() != sys.state_dim() || cost.R().dim() != sys.control_dim())
    throw std::invalid_argument("riccati: cost/system dimension mismatch");
}

}  // namespace

GainSchedule riccati_backward(const LtiStochasticSystem& sys,
                              const QuadraticCost& cost, Index N,
                              const SymMatrix& terminal) {
  check_problem_dims(sys, cost);
  if (N < 0) throw std::invalid_argument("riccati_backward: N must be >= 0");
  if (terminal.dim() != sys.state_dim())
    throw std::invalid_argument("riccati_backward: terminal dimension mismatch");
  if (!is_positive_semidefinite(terminal))
    throw std::invalid_argument("riccati_backward: terminal weight must be PSD");

  GainSchedule sched;
  sched.horizon = N;
  sched.P_seq.resize(N + 1);
  sched.K_seq.resize(N);
  sched.P_seq[N] = terminal;
  for (Index k = N - 1; k >= 0; --k) {
    BackwardStep step = backward_step(sys, cost, sched.P_seq[k + 1]);
    if (!is_positive_semidefinite(step.P_prev))
      throw std::logic_error("riccati_backward: P_N(k) lost semidefiniteness");
    sched.P_seq[k] = step.P_prev;
    sched.K_seq[k] = step.K;
  }
  return sched;
}

RiccatiSolution solve_dare(const LtiStochasticSystem& sys,
                           const QuadraticCost& cost) {
  check_problem_dims(sys, cost);
  constexpr int kMaxIter = 100000;
  SymMatrix P = cost.Q();
  int iterations = 0;
  bool converged = false;
  for (int it = 1; it <= kMaxIter; ++it) {
    iterations = it;
    const BackwardStep step = backward_step(sys, cost, P);
    const double diff = max_abs(step.P_prev.mat() - P.mat());
    P = step.P_prev;
    if (max_abs(P.mat()) > 1e100)
      throw NoConvergence("solve_dare: value iteration diverged");
    if (diff <= 1e-12 * (1.0 + max_abs(P.mat()))) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NoConvergence("solve_dare: value iteration hit the iteration cap");

  // One more step at the fixed point gives the gain consistent with P and the
  // DARE residual.
  const BackwardStep fixed = backward_step(sys, cost, P);
  RiccatiSolution sol;
  sol.P = P;
  sol.K = fixed.K;
  sol.Rtilde = fixed.Rtilde;
  sol.iterations = iterations;
  sol.residual = max_abs(fixed.P_prev.mat() - P.mat());
  if (sol.residual > 1e-9 * (1.0 + max_abs(P.mat())))
    throw NoConvergence("solve_dare: DARE residual above tolerance");

  const double rho = spectral_radius_estimate(sys.A() + sys.B() * sol.K);
  if (!(rho < 1.0))
    throw NoConvergence("solve_dare: closed loop A + B K is not Schur stable");
  return sol;
}

CostDecomposition modified_cost_decomposition(const LtiStochasticSystem& sys,
                                              const QuadraticCost& cost,
                                              const RiccatiSolution& sol,
                                              const MomentTrajectory& traj,
                                              Index N) {
  if (N < 0 || N > traj.horizon())
    throw std::invalid_argument("modified_cost_decomposition: N out of range");
  const Index n = sys.state_dim();
  CostDecomposition dec;
  for (Index k = 0; k < N; ++k) {
    // E||U(k) - K X(k)||^2_Rtilde with U(k) - K X(k) affine in Z = (X, Xs).
    Matrix G = traj.control_selector(k);
    G.leftCols(n) -= sol.K;
    dec.feedback_deviation +=
        traj.quadratic(k, G, traj.law().offset(k), sol.Rtilde);
  }
  const Matrix selx = traj.x_selector();
  const Vector zero_offset = Vector::Zero(n);
  dec.initial_term = traj.quadratic(0, selx, zero_offset, sol.P);
  dec.terminal_term = -traj.quadratic(N, selx, zero_offset, sol.P);
  dec.noise_term =
      static_cast<double>(N) * (sol.P.mat() * sys.sigma_w().mat()).trace();
  return dec;
}

}  // namespace stoclq
