#include "stoclq/turnpike.hpp"

#include <cmath>

namespace stoclq {

TurnpikeReport moment_turnpike(const LtiStochasticSystem& sys,
                               const QuadraticCost& cost,
                               const DissipativityCertificate& cert,
                               const AffineControlLaw& law,
                               const StationaryPair& pair,
                               const GaussianState& init, Index N,
                               const std::vector<double>& eps_list) {
  if (N < 1) throw std::invalid_argument("moment_turnpike: N must be >= 1");
  for (const double eps : eps_list)
    if (!(eps > 0.0))
      throw std::invalid_argument("moment_turnpike: eps must be > 0");

  const MomentTrajectory traj =
      propagate_joint_moments(sys, law, pair, init, N, NoiseCoupling::Shared);

  TurnpikeReport report;
  report.N = N;
  report.moment_values.resize(static_cast<size_t>(N));
  for (Index k = 0; k < N; ++k)
    report.moment_values[static_cast<size_t>(k)] = traj.quadratic(
        k, traj.joint_diff_selector(k), traj.joint_diff_offset(k), cert.H);

  report.cost = trajectory_cost(cost, traj, N);
  report.stationary_cost =
      static_cast<double>(N) * (cert.P.mat() * sys.sigma_w().mat()).trace();
  report.delta = report.cost - report.stationary_cost;
  report.storage_initial = storage_lambda_tilde(cert.P, cert.S, traj, 0);
  report.lower_bound = lower_bound_M(cert.P, cert.S, pair.cov);
  report.offset_C = report.storage_initial - report.lower_bound;

  for (const double eps : eps_list) {
    EpsCount entry;
    entry.eps = eps;
    for (const double m : report.moment_values)
      if (m <= eps) ++entry.q_eps;
    entry.bound =
        static_cast<double>(N) - (report.delta + report.offset_C) / eps;
    entry.slack = static_cast<double>(entry.q_eps) - entry.bound;
    if (entry.slack < -1e-9 * (1.0 + std::abs(entry.bound)))
      throw BoundViolated("moment_turnpike: Q_eps = " +
                          std::to_string(entry.q_eps) + " below bound " +
                          std::to_string(entry.bound) + " at eps = " +
                          std::to_string(eps));
    report.eps_counts.push_back(entry);
  }
  return report;
}

ProbCount probability_turnpike(const TurnpikeReport& report, double eps,
                               double eta, const SymMatrix& H,
                               const PathEnsemble* ensemble) {
  if (!(eps > 0.0) || !(eta > 0.0))
    throw std::invalid_argument("probability_turnpike: eps and eta must be > 0");
  const Index N = report.N;
  ProbCount entry;
  entry.eps = eps;
  entry.eta = eta;

  if (eta >= 1.0) {
    // P(... >= eps) <= 1 <= eta at every instant; no Markov step needed.
    entry.exact_count = N;
  } else {
    for (const double m : report.moment_values)
      if (m <= eps * eta) ++entry.exact_count;
  }
  entry.bound =
      static_cast<double>(N) - (report.delta + report.offset_C) / (eps * eta);
  entry.slack = static_cast<double>(entry.exact_count) - entry.bound;
  if (entry.slack < -1e-9 * (1.0 + std::abs(entry.bound)))
    throw BoundViolated("probability_turnpike: count " +
                        std::to_string(entry.exact_count) + " below bound " +
                        std::to_string(entry.bound) + " at eps = " +
                        std::to_string(eps) + ", eta = " + std::to_string(eta));

  if (ensemble != nullptr && !ensemble->paths.empty()) {
    if (ensemble->horizon < N)
      throw std::invalid_argument("probability_turnpike: ensemble shorter than N");
    const double m_paths = static_cast<double>(ensemble->paths.size());
    entry.exceedance_freq.assign(static_cast<size_t>(N), 0.0);
    for (const Path& path : ensemble->paths) {
      for (Index k = 0; k < N; ++k) {
        Vector v(path.x.cols() + path.u.cols());
        v << (path.x.row(k) - path.xs.row(k)).transpose(),
            (path.u.row(k) - path.us.row(k)).transpose();
        if (v.dot(H.mat() * v) >= eps)
          entry.exceedance_freq[static_cast<size_t>(k)] += 1.0;
      }
    }
    entry.has_empirical = true;
    for (Index k = 0; k < N; ++k) {
      entry.exceedance_freq[static_cast<size_t>(k)] /= m_paths;
      if (entry.exceedance_freq[static_cast<size_t>(k)] <= eta)
        ++entry.empirical_count;
    }
  }
  return entry;
}

MidHorizonProximity figure1_metrics(const Path& path) {
  const Index N = path.horizon;
  MidHorizonProximity prox;
  prox.N = N;
  const Index mid_lo = (N + 3) / 4;      // ceil(N/4)
  const Index mid_hi = (3 * N) / 4;      // floor(3N/4)
  for (Index k = 0; k <= N; ++k) {
    const double dev = (path.x.row(k) - path.xs.row(k)).norm();
    if (k >= mid_lo && k <= mid_hi)
      prox.mid_max = std::max(prox.mid_max, dev);
    else if (k > mid_hi)
      prox.boundary_max = std::max(prox.boundary_max, dev);
  }
  prox.terminal_dev = (path.x.row(N) - path.xs.row(N)).norm();
  return prox;
}

}  // namespace stoclq
