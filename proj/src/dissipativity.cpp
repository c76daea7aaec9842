#include "stoclq/dissipativity.hpp"

#include <cmath>

namespace stoclq {

namespace {

void check_problem_dims(const LtiStochasticSystem& sys, const QuadraticCost& cost) {
  if (cost.Q().dim() != sys.state_dim() || cost.R().dim() != sys.control_dim())
    throw std::invalid_argument("dissipativity: cost/system dimension mismatch");
}

// Certified smallest-eigenvalue margin of Q + S~ - A^T S~ A.
double inequality_margin(const LtiStochasticSystem& sys, const QuadraticCost& cost,
                         const Matrix& candidate) {
  const Matrix g = cost.Q().mat() + candidate -
                   sys.A().transpose() * candidate * sys.A();
  return certified_lambda_min_bound(SymMatrix(symmetrize(g)));
}

// Golden-section maximum of `f` on [lo, hi] (f unimodal); returns argmax.
template <typename F>
double golden_section_max(F&& f, double lo, double hi, int iters) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < iters; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc > fd ? c : d;
}

}  // namespace

SymMatrix find_Stilde(const LtiStochasticSystem& sys, const QuadraticCost& cost) {
  check_problem_dims(sys, cost);
  const Index n = sys.state_dim();
  const double threshold = 1e-10 * (1.0 + max_abs(cost.Q().mat()));
  const double log_lo = std::log(1e-8);
  const double log_hi = std::log(1e6);

  std::vector<Matrix> bases;
  bases.push_back(Matrix::Identity(n, n));
  try {
    const RiccatiSolution sol = solve_dare(sys, cost);
    if (is_positive_definite(sol.P)) bases.push_back(sol.P.mat());
  } catch (const std::exception&) {
    // No usable DARE solution; the sigma*P family is simply unavailable.
  }

  double best_margin = -std::numeric_limits<double>::infinity();
  for (const Matrix& base : bases) {
    auto f = [&](double t) { return inequality_margin(sys, cost, std::exp(t) * base); };
    const double t_star = golden_section_max(f, log_lo, log_hi, 80);
    // The maximum can sit at an endpoint; evaluate all three candidates.
    for (const double t : {t_star, log_lo, log_hi}) {
      const double margin = f(t);
      best_margin = std::max(best_margin, margin);
      if (margin >= threshold)
        return SymMatrix(std::exp(t) * base);
    }
  }
  throw CertificateNotFound(
      "find_Stilde: no sigma in [1e-8, 1e6] certifies Q + S~ - A^T S~ A > 0 "
      "(best margin " + std::to_string(best_margin) + ")",
      best_margin);
}

SymMatrix assemble_H(const LtiStochasticSystem& sys, const QuadraticCost& cost,
                     const SymMatrix& S_tilde, double gamma) {
  check_problem_dims(sys, cost);
  if (S_tilde.dim() != sys.state_dim())
    throw std::invalid_argument("assemble_H: S_tilde dimension mismatch");
  if (!(gamma > 0.0) || gamma > 1.0)
    throw std::invalid_argument("assemble_H: gamma must be in (0, 1]");
  const Matrix& A = sys.A();
  const Matrix& B = sys.B();
  const Matrix& St = S_tilde.mat();
  const Index n = sys.state_dim();
  const Index l = sys.control_dim();
  Matrix h(n + l, n + l);
  h.topLeftCorner(n, n) =
      cost.Q().mat() + gamma * (St - symmetrize(A.transpose() * St * A));
  h.bottomRightCorner(l, l) =
      cost.R().mat() - gamma * symmetrize(B.transpose() * St * B);
  h.topRightCorner(n, l) = -gamma * (A.transpose() * St * B);
  h.bottomLeftCorner(l, n) = h.topRightCorner(n, l).transpose();
  return SymMatrix(h);
}

namespace {

bool gamma_feasible(const LtiStochasticSystem& sys, const QuadraticCost& cost,
                    const SymMatrix& S_tilde, double gamma, SymMatrix* h_out) {
  const SymMatrix h = assemble_H(sys, cost, S_tilde, gamma);
  const Index l = sys.control_dim();
  const SymMatrix r_gamma(
      h.mat().bottomRightCorner(l, l));  // R - gamma B^T S~ B
  const bool ok = is_positive_definite(h) && is_positive_definite(r_gamma);
  if (ok && h_out != nullptr) *h_out = h;
  return ok;
}

}  // namespace

GammaResult find_gamma(const LtiStochasticSystem& sys, const QuadraticCost& cost,
                       const SymMatrix& S_tilde) {
  GammaResult res;
  double gamma = 1.0;
  while (!gamma_feasible(sys, cost, S_tilde, gamma, &res.H)) {
    gamma *= 0.5;
    if (gamma < 1e-12) {
      const SymMatrix h = assemble_H(sys, cost, S_tilde, 2.0 * gamma);
      throw CertificateNotFound(
          "find_gamma: no gamma in [1e-12, 1] makes H positive definite",
          certified_lambda_min_bound(h));
    }
  }
  if (gamma == 1.0) {
    res.gamma = 1.0;
    return res;
  }
  // Geometric refinement toward the infeasible boundary: returns the largest
  // certified-feasible gamma once the bracket ratio is within 1.01.
  double lo = gamma, hi = 2.0 * gamma;
  for (int it = 0; it < 60 && hi / lo > 1.01; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (gamma_feasible(sys, cost, S_tilde, mid, &res.H))
      lo = mid;
    else
      hi = mid;
  }
  // res.H currently holds the last feasible H evaluated, which may be from an
  // earlier bracket point; re-evaluate at the returned gamma.
  res.gamma = lo;
  res.H = assemble_H(sys, cost, S_tilde, lo);
  return res;
}

DissipativityCertificate build_certificate(
    const LtiStochasticSystem& sys, const QuadraticCost& cost,
    const RiccatiSolution& sol, const std::optional<SymMatrix>& S_tilde_override,
    const std::optional<double>& gamma_override) {
  check_problem_dims(sys, cost);
  DissipativityCertificate cert;
  cert.P = sol.P;

  if (S_tilde_override.has_value()) {
    const SymMatrix& st = *S_tilde_override;
    if (st.dim() != sys.state_dim())
      throw std::invalid_argument("build_certificate: S_tilde dimension mismatch");
    if (!is_positive_definite(st))
      throw CertificateNotFound("build_certificate: supplied S_tilde is not > 0",
                                certified_lambda_min_bound(st));
    const double margin = inequality_margin(sys, cost, st.mat());
    if (!(margin > 0.0))
      throw CertificateNotFound(
          "build_certificate: supplied S_tilde fails Q + S~ - A^T S~ A > 0",
          margin);
    cert.S_tilde = st;
  } else {
    cert.S_tilde = find_Stilde(sys, cost);
  }

  if (gamma_override.has_value()) {
    const double gamma = *gamma_override;
    if (!(gamma > 0.0) || gamma > 1.0)
      throw std::invalid_argument("build_certificate: gamma must be in (0, 1]");
    SymMatrix h;
    if (!gamma_feasible(sys, cost, cert.S_tilde, gamma, &h))
      throw CertificateNotFound(
          "build_certificate: supplied gamma does not certify H > 0",
          certified_lambda_min_bound(assemble_H(sys, cost, cert.S_tilde, gamma)));
    cert.gamma = gamma;
    cert.H = h;
  } else {
    const GammaResult gr = find_gamma(sys, cost, cert.S_tilde);
    cert.gamma = gr.gamma;
    cert.H = gr.H;
  }

  const Index n = sys.state_dim();
  const Index l = sys.control_dim();
  cert.S = SymMatrix(cert.gamma * cert.S_tilde.mat());
  cert.Q_gamma = SymMatrix(cert.H.mat().topLeftCorner(n, n));
  cert.R_gamma = SymMatrix(cert.H.mat().bottomRightCorner(l, l));
  cert.lambda_min_H_lower = certified_lambda_min_bound(cert.H);
  if (!(cert.lambda_min_H_lower > 0.0))
    throw CertificateNotFound(
        "build_certificate: certified lambda_min(H) lower bound is not positive",
        cert.lambda_min_H_lower);
  return cert;
}

double storage_lambda_hat(const SymMatrix& P, const MomentTrajectory& traj,
                          Index k) {
  const Index n = traj.state_dim();
  return -traj.quadratic(k, traj.x_selector(), Vector::Zero(n), P);
}

double storage_lambda_bar(const SymMatrix& P, const MomentTrajectory& traj,
                          Index k) {
  const Index n = traj.state_dim();
  const Vector zero = Vector::Zero(n);
  return -traj.quadratic(k, traj.x_selector(), zero, P) +
         traj.quadratic(k, traj.diff_selector(), zero, P);
}

double storage_lambda_tilde(const SymMatrix& P, const SymMatrix& S,
                            const MomentTrajectory& traj, Index k) {
  const Index n = traj.state_dim();
  return storage_lambda_bar(P, traj, k) +
         traj.quadratic(k, traj.diff_selector(), Vector::Zero(n), S);
}

double lower_bound_M(const SymMatrix& P, const SymMatrix& S,
                     const SymMatrix& stationary_cov) {
  if (P.dim() != S.dim() || P.dim() != stationary_cov.dim())
    throw std::invalid_argument("lower_bound_M: dimension mismatch");
  if (P.dim() == 0) return 0.0;
  // min over x of -||x||^2_P + ||x - xs||^2_{P+S} is -||xs||^2_{(P+S) S^{-1} P};
  // taking E over xs ~ N(0, stationary_cov):
  const Matrix sinv_p = solve_linear(S, P.mat());
  return -((P.mat() + S.mat()) * sinv_p * stationary_cov.mat()).trace();
}

ChainResiduals verify_dissipation_chain(const LtiStochasticSystem& sys,
                                        const QuadraticCost& cost,
                                        const DissipativityCertificate& cert,
                                        const RiccatiSolution& sol,
                                        const StationaryPair& pair,
                                        const AffineControlLaw& law,
                                        const GaussianState& init, Index N) {
  if (law.horizon() < N)
    throw std::invalid_argument("verify_dissipation_chain: law shorter than N");
  const MomentTrajectory traj =
      propagate_joint_moments(sys, law, pair, init, N, NoiseCoupling::Shared);
  const double stationary_rate =
      (cert.P.mat() * sys.sigma_w().mat()).trace();

  ChainResiduals res;
  const Index n = sys.state_dim();
  const Vector zero_n = Vector::Zero(n);
  for (Index k = 0; k < N; ++k) {
    const double supply =
        trajectory_stage_cost(cost, traj, k) - stationary_rate;

    // Chain 1: rate E||U - K X||^2_Rtilde.
    Matrix g1 = traj.control_selector(k);
    g1.leftCols(n) -= pair.K;
    const double rate1 = traj.quadratic(k, g1, law.offset(k), sol.Rtilde);
    const double lhs1 = supply + storage_lambda_hat(cert.P, traj, k) -
                        storage_lambda_hat(cert.P, traj, k + 1);

    // Chain 2: rate E[||X~||^2_Q + ||U~||^2_R].
    const double rate2 =
        traj.quadratic(k, traj.diff_selector(), zero_n, cost.Q()) +
        traj.quadratic(k, traj.control_diff_selector(k), law.offset(k), cost.R());
    const double lhs2 = supply + storage_lambda_bar(cert.P, traj, k) -
                        storage_lambda_bar(cert.P, traj, k + 1);

    // Chain 3: rate E||(X~, U~)||^2_H.
    const double rate3 = traj.quadratic(k, traj.joint_diff_selector(k),
                                        traj.joint_diff_offset(k), cert.H);
    const double lhs3 =
        supply + storage_lambda_tilde(cert.P, cert.S, traj, k) -
        storage_lambda_tilde(cert.P, cert.S, traj, k + 1);

    res.hat_max = std::max(res.hat_max, std::abs(lhs1 - rate1));
    res.bar_max = std::max(res.bar_max, std::abs(lhs2 - rate2));
    res.tilde_max = std::max(res.tilde_max, std::abs(lhs3 - rate3));
    for (const double v : {supply, rate1, rate2, rate3, lhs1, lhs2, lhs3})
      res.scale = std::max(res.scale, std::abs(v));
  }
  return res;
}

}  // namespace stoclq
