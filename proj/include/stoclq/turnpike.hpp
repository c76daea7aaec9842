#pragma once

#include "stoclq/dissipativity.hpp"
#include "stoclq/simulate.hpp"

// Turnpike verification. With m_k = E||(X(k)-Xs(k), U(k)-Us(k))||^2_H,
// delta = J_N - N tr(P Sigma_W) and C = lambda_tilde(0) - M:
//
//   moment route:       #{k < N : m_k <= eps}          >= N - (delta + C)/eps
//   probability route:  #{k < N : P(||.||^2_H >= eps) <= eta}
//                                                      >= N - (delta + C)/(eps eta)
//
// The probability count is certified through Markov (m_k <= eps*eta implies
// P(... >= eps) <= eta); the empirical route replaces the Markov step with
// exceedance frequencies from a simulated ensemble.

namespace stoclq {

struct EpsCount {
  double eps = 0.0;
  Index q_eps = 0;     // #{k < N : m_k <= eps}
  double bound = 0.0;  // N - (delta + C)/eps
  double slack = 0.0;  // q_eps - bound (>= 0 when the certificate is valid)
};

struct ProbCount {
  double eps = 0.0;
  double eta = 0.0;
  Index exact_count = 0;  // Markov-certified instants
  double bound = 0.0;     // N - (delta + C)/(eps eta)
  double slack = 0.0;
  bool has_empirical = false;
  Index empirical_count = 0;
  std::vector<double> exceedance_freq;  // per k, only with ensemble data
};

struct TurnpikeReport {
  Index N = 0;
  std::vector<double> moment_values;  // m_k, k = 0..N-1
  double cost = 0.0;                  // J_N from exact moments
  double stationary_cost = 0.0;       // N tr(P Sigma_W)
  double delta = 0.0;                 // cost - stationary_cost (may be < 0)
  double storage_initial = 0.0;       // lambda_tilde(0)
  double lower_bound = 0.0;           // M
  double offset_C = 0.0;              // lambda_tilde(0) - M
  std::vector<EpsCount> eps_counts;
  std::vector<ProbCount> prob_counts;
};

// Propagates moments under `law` (shared noise), evaluates m_k, and checks the
// moment bound for each eps. Throws BoundViolated if a proved bound fails.
TurnpikeReport moment_turnpike(const LtiStochasticSystem& sys,
                               const QuadraticCost& cost,
                               const DissipativityCertificate& cert,
                               const AffineControlLaw& law,
                               const StationaryPair& pair,
                               const GaussianState& init, Index N,
                               const std::vector<double>& eps_list);

// Adds one (eps, eta) probability count to an existing report. The exact
// route is Markov on m_k (trivially N when eta >= 1); when an ensemble is
// given, per-step exceedance frequencies #{paths : ||v(k)||^2_H >= eps}/M are
// attached and counted against eta as the empirical route.
ProbCount probability_turnpike(const TurnpikeReport& report, double eps,
                               double eta, const SymMatrix& H,
                               const PathEnsemble* ensemble = nullptr);

// Deviation ||x(k) - xs(k)||_2 summarized over the mid-horizon window
// k in [N/4, 3N/4], the trailing window (3N/4, N], and at k = N.
struct MidHorizonProximity {
  Index N = 0;
  double mid_max = 0.0;
  double boundary_max = 0.0;
  double terminal_dev = 0.0;
};
MidHorizonProximity figure1_metrics(const Path& path);

}  // namespace stoclq
