#pragma once

#include <vector>

#include "stoclq/lq_model.hpp"

namespace stoclq {

class MomentTrajectory;  // stationary.hpp

// Finite-horizon backward Riccati pass with terminal weight P_N(N):
//   K_N(k)   = -[R + B^T P_N(k+1) B]^{-1} B^T P_N(k+1) A
//   P_N(k)   = A^T P_N(k+1) A + Q
//              - A^T P_N(k+1) B [R + B^T P_N(k+1) B]^{-1} B^T P_N(k+1) A
// P_seq has N+1 entries (P_seq[N] = terminal), K_seq has N.
struct GainSchedule {
  Index horizon = 0;
  std::vector<SymMatrix> P_seq;
  std::vector<Matrix> K_seq;
};
GainSchedule riccati_backward(const LtiStochasticSystem& sys,
                              const QuadraticCost& cost, Index N,
                              const SymMatrix& terminal);

// Stationary solution P of the DARE with its gain K = -[R + B^T P B]^{-1}
// B^T P A, found by value iteration from P_0 = Q. Stops when
// ||P_{j+1} - P_j||_max <= 1e-12 (1 + ||P_j||_max); throws NoConvergence at
// 100000 iterations or on divergence. The returned closed loop A + B K is
// verified Schur stable.
struct RiccatiSolution {
  SymMatrix P;
  Matrix K;
  SymMatrix Rtilde;  // R + B^T P B
  int iterations = 0;
  double residual = 0.0;  // ||P - dare_step(P)||_max
};
RiccatiSolution solve_dare(const LtiStochasticSystem& sys,
                           const QuadraticCost& cost);

// Exact decomposition of the expected cost of any admissible control over
// horizon N (completion of squares under the DARE solution):
//   J_N = sum_k E||U(k) - K X(k)||^2_Rtilde
//         + E||X(0)||^2_P - E||X(N)||^2_P + N tr(P Sigma_W).
struct CostDecomposition {
  double feedback_deviation = 0.0;  // sum_k E||U(k) - K X(k)||^2_Rtilde
  double initial_term = 0.0;        // E||X(0)||^2_P
  double terminal_term = 0.0;       // -E||X(N)||^2_P
  double noise_term = 0.0;          // N tr(P Sigma_W)
  double total() const {
    return feedback_deviation + initial_term + terminal_term + noise_term;
  }
};
CostDecomposition modified_cost_decomposition(const LtiStochasticSystem& sys,
                                              const QuadraticCost& cost,
                                              const RiccatiSolution& sol,
                                              const MomentTrajectory& traj,
                                              Index N);

}  // namespace stoclq
