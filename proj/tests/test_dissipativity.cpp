#include <doctest.h>

#include <cmath>
#include <random>

#include "stoclq/dissipativity.hpp"
#include "stoclq/riccati.hpp"
#include "test_util.hpp"

using namespace stoclq;

namespace {

struct Solved {
  Problem p;
  RiccatiSolution sol;
  StationaryPair pair;
};

Solved solved_running_example() {
  Problem p{
      LtiStochasticSystem(Matrix::Constant(1, 1, 1.2), Matrix::Constant(1, 1, 1.0),
                          SymMatrix(Matrix::Constant(1, 1, 10.0))),
      QuadraticCost(SymMatrix(Matrix::Constant(1, 1, 1.0)),
                    SymMatrix(Matrix::Constant(1, 1, 5.0))),
      GaussianState(Vector::Constant(1, 3.0), SymMatrix(Matrix::Constant(1, 1, 1.5)))};
  RiccatiSolution sol = solve_dare(p.sys, p.cost);
  StationaryPair pair = build_stationary_pair(p.sys, sol);
  return Solved{std::move(p), std::move(sol), std::move(pair)};
}

}  // namespace

TEST_SUITE_BEGIN("dissipativity");

TEST_CASE("find_Stilde: contraction with PD Q always certifies") {
  const LtiStochasticSystem sys(0.5 * Matrix::Identity(2, 2),
                                Matrix::Identity(2, 2), SymMatrix::Identity(2));
  const QuadraticCost cost(SymMatrix::Identity(2), SymMatrix::Identity(2));
  const SymMatrix st = find_Stilde(sys, cost);
  CHECK(is_positive_definite(st));
  const SymMatrix g(symmetrize(cost.Q().mat() + st.mat() -
                               sys.A().transpose() * st.mat() * sys.A()));
  CHECK(certified_lambda_min_bound(g) > 0.0);
}

TEST_CASE("find_Stilde: running example stays inside the scalar feasibility bound") {
  const Solved s = solved_running_example();
  const SymMatrix st = find_Stilde(s.p.sys, s.p.cost);
  // Feasibility in the scalar case is 1 - 0.44 sigma > 0, sigma < 2.2727.
  const double sigma_eff = st(0, 0);
  CHECK(sigma_eff > 0.0);
  CHECK(1.0 - 0.44 * sigma_eff > 0.0);
  const double margin =
      certified_lambda_min_bound(SymMatrix(Matrix::Constant(
          1, 1, 1.0 + sigma_eff - 1.44 * sigma_eff)));
  CHECK(margin > 0.0);
}

TEST_CASE("find_Stilde: expanding map with Q = 0 has no certificate") {
  const LtiStochasticSystem sys(Matrix::Constant(1, 1, 2.0),
                                Matrix::Constant(1, 1, 1.0), SymMatrix::Identity(1));
  const QuadraticCost cost(SymMatrix::Zero(1), SymMatrix::Identity(1));
  try {
    find_Stilde(sys, cost);
    FAIL("expected CertificateNotFound");
  } catch (const CertificateNotFound& e) {
    CHECK(e.best_margin <= 0.0);
  }
}

TEST_CASE("assemble_H: running example at sigma = 1, gamma = 0.1") {
  const Solved s = solved_running_example();
  const SymMatrix h = assemble_H(s.p.sys, s.p.cost, SymMatrix::Identity(1), 0.1);
  CHECK(h(0, 0) == doctest::Approx(0.956).epsilon(1e-12));
  CHECK(h(0, 1) == doctest::Approx(-0.12).epsilon(1e-12));
  CHECK(h(1, 0) == doctest::Approx(-0.12).epsilon(1e-12));
  CHECK(h(1, 1) == doctest::Approx(4.9).epsilon(1e-12));
}

TEST_CASE("assemble_H: gamma -> 0 approaches block-diag(Q, R)") {
  const Solved s = solved_running_example();
  const SymMatrix h = assemble_H(s.p.sys, s.p.cost, SymMatrix::Identity(1), 1e-9);
  CHECK(std::abs(h(0, 0) - 1.0) <= 1e-8);
  CHECK(std::abs(h(1, 1) - 5.0) <= 1e-8);
  CHECK(std::abs(h(0, 1)) <= 1e-8);

  CHECK_THROWS_AS(assemble_H(s.p.sys, s.p.cost, SymMatrix::Identity(1), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(assemble_H(s.p.sys, s.p.cost, SymMatrix::Identity(1), 1.5),
                  std::invalid_argument);
}

TEST_CASE("assemble_H: scalar case matches the symmetric block form") {
  // n = l = 1: H must equal 1/2 [[2 Q_g, g E], [g E, 2 R_g]] with
  // E = -(A' S B + B' S A).
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(-2.0, 2.0), upos(0.1, 3.0),
      ug(0.05, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const double a = u(rng), b = u(rng), q = upos(rng), r = upos(rng),
                 sigma = upos(rng), gamma = ug(rng);
    const LtiStochasticSystem sys(Matrix::Constant(1, 1, a),
                                  Matrix::Constant(1, 1, b), SymMatrix::Identity(1));
    const QuadraticCost cost(SymMatrix(Matrix::Constant(1, 1, q)),
                             SymMatrix(Matrix::Constant(1, 1, r)));
    const SymMatrix st(Matrix::Constant(1, 1, sigma));
    const SymMatrix h = assemble_H(sys, cost, st, gamma);

    const double q_g = q + gamma * (sigma - a * sigma * a);
    const double r_g = r - gamma * b * sigma * b;
    const double e = -(a * sigma * b + b * sigma * a);
    CHECK(h(0, 0) == doctest::Approx(0.5 * 2.0 * q_g).epsilon(1e-14));
    CHECK(h(1, 1) == doctest::Approx(0.5 * 2.0 * r_g).epsilon(1e-14));
    CHECK(h(0, 1) == doctest::Approx(0.5 * gamma * e).epsilon(1e-14));
  }
}

TEST_CASE("find_gamma: decoupled PD blocks accept gamma = 1 immediately") {
  const LtiStochasticSystem sys(Matrix::Zero(1, 1), Matrix::Zero(1, 1),
                                SymMatrix::Identity(1));
  const QuadraticCost cost(SymMatrix::Identity(1), SymMatrix::Identity(1));
  const GammaResult res = find_gamma(sys, cost, SymMatrix::Identity(1));
  CHECK(res.gamma == 1.0);
  CHECK(res.H(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(res.H(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("find_gamma: running example with sigma = 1 accepts gamma = 1") {
  // det H(gamma) = 5 - 3.2 gamma - gamma^2 stays positive up to ~1.0995,
  // so the whole admissible interval (0, 1] is feasible.
  const Solved s = solved_running_example();
  const GammaResult res = find_gamma(s.p.sys, s.p.cost, SymMatrix::Identity(1));
  CHECK(res.gamma == 1.0);
  const double q_g = 1.0 - 0.44 * res.gamma;
  const double det = q_g * (5.0 - res.gamma) - std::pow(1.2 * res.gamma, 2);
  CHECK(q_g > 0.0);
  CHECK(det > 0.0);
  CHECK(is_positive_definite(res.H));
}

TEST_CASE("find_gamma: barely-PD R forces a tiny but certified gamma") {
  const LtiStochasticSystem sys(Matrix::Constant(1, 1, 0.5),
                                Matrix::Constant(1, 1, 0.1), SymMatrix::Identity(1));
  const QuadraticCost cost(SymMatrix::Identity(1),
                           SymMatrix(Matrix::Constant(1, 1, 1e-6)));
  const SymMatrix st = find_Stilde(sys, cost);
  const GammaResult res = find_gamma(sys, cost, st);
  CHECK(res.gamma > 0.0);
  CHECK(res.gamma <= 1.0);
  CHECK(is_positive_definite(res.H));
  const SymMatrix r_gamma(Matrix::Constant(
      1, 1,
      1e-6 - res.gamma * 0.1 * st(0, 0) * 0.1));
  CHECK(is_positive_definite(r_gamma));
}

TEST_CASE("build_certificate: invariants on the running example") {
  const Solved s = solved_running_example();
  const DissipativityCertificate cert =
      build_certificate(s.p.sys, s.p.cost, s.sol);
  CHECK(cert.gamma > 0.0);
  CHECK(cert.gamma <= 1.0);
  CHECK(max_abs(cert.S.mat() - cert.gamma * cert.S_tilde.mat()) <= 1e-15);
  CHECK(is_positive_definite(cert.Q_gamma));
  CHECK(is_positive_definite(cert.R_gamma));
  CHECK(is_positive_definite(cert.H));
  CHECK(cert.lambda_min_H_lower > 0.0);
  CHECK(max_abs(cert.P.mat() - s.sol.P.mat()) == 0.0);

  // H-block consistency with Q_gamma / R_gamma.
  CHECK(cert.H(0, 0) == doctest::Approx(cert.Q_gamma(0, 0)).epsilon(1e-14));
  CHECK(cert.H(1, 1) == doctest::Approx(cert.R_gamma(0, 0)).epsilon(1e-14));
}

TEST_CASE("build_certificate: overrides are verified, not trusted") {
  const Solved s = solved_running_example();

  // sigma = 1 is feasible (margin 0.56); gamma = 0.5 keeps H PD.
  const DissipativityCertificate ok = build_certificate(
      s.p.sys, s.p.cost, s.sol, SymMatrix::Identity(1), 0.5);
  CHECK(ok.gamma == 0.5);
  CHECK(ok.S_tilde(0, 0) == 1.0);
  CHECK(ok.lambda_min_H_lower > 0.0);

  // sigma = 3 violates 1 - 0.44 sigma > 0.
  CHECK_THROWS_AS(build_certificate(s.p.sys, s.p.cost, s.sol,
                                    SymMatrix(Matrix::Constant(1, 1, 3.0)),
                                    std::nullopt),
                  CertificateNotFound);

  // Not-PD S_tilde is rejected outright.
  CHECK_THROWS_AS(build_certificate(s.p.sys, s.p.cost, s.sol, SymMatrix::Zero(1),
                                    std::nullopt),
                  CertificateNotFound);

  // An infeasible gamma for a barely-PD R system.
  const LtiStochasticSystem tiny_r_sys(Matrix::Constant(1, 1, 0.5),
                                       Matrix::Constant(1, 1, 0.1),
                                       SymMatrix::Identity(1));
  const QuadraticCost tiny_r_cost(SymMatrix::Identity(1),
                                  SymMatrix(Matrix::Constant(1, 1, 1e-6)));
  const RiccatiSolution tiny_sol = solve_dare(tiny_r_sys, tiny_r_cost);
  CHECK_THROWS_AS(build_certificate(tiny_r_sys, tiny_r_cost, tiny_sol,
                                    SymMatrix::Identity(1), 0.5),
                  CertificateNotFound);

  CHECK_THROWS_AS(build_certificate(s.p.sys, s.p.cost, s.sol,
                                    SymMatrix::Identity(1), 1.5),
                  std::invalid_argument);
}

TEST_CASE("storage functions: closed-form values at k = 0") {
  const Solved s = solved_running_example();
  const Index N = 5;
  const AffineControlLaw law = AffineControlLaw::steady_gain(s.sol.K, N);
  const MomentTrajectory traj =
      propagate_joint_moments(s.p.sys, law, s.pair, s.p.x0, N);
  const double p_val = s.sol.P(0, 0);
  const double sigma_s = s.pair.cov(0, 0);

  // lambda_hat(0) = -P E||X0||^2 = -P (1.5 + 9) ~ -45.67.
  const double hat = storage_lambda_hat(s.sol.P, traj, 0);
  CHECK(hat == doctest::Approx(-p_val * 10.5).epsilon(1e-12));
  CHECK(std::abs(hat - (-45.67)) <= 0.01);

  // Independent start: lambda_bar(0) = tr(P Sigma_s).
  const double bar = storage_lambda_bar(s.sol.P, traj, 0);
  CHECK(bar == doctest::Approx(p_val * sigma_s).epsilon(1e-12));

  // lambda_tilde adds the S-weighted difference term.
  const DissipativityCertificate cert =
      build_certificate(s.p.sys, s.p.cost, s.sol, SymMatrix::Identity(1), 0.5);
  const double tilde = storage_lambda_tilde(s.sol.P, cert.S, traj, 0);
  const double diff_sq = 10.5 + sigma_s;  // E||X0 - Xs0||^2, independent blocks
  CHECK(tilde == doctest::Approx(bar + cert.S(0, 0) * diff_sq).epsilon(1e-12));
}

TEST_CASE("storage lambda_bar: coupled start equals -tr(P Sigma_s)") {
  const Solved s = solved_running_example();
  const Index N = 3;
  const AffineControlLaw law = AffineControlLaw::steady_gain(s.sol.K, N);
  const double sv = s.pair.cov(0, 0);
  Matrix cov0(2, 2);
  cov0 << sv, sv, sv, sv;
  const MomentTrajectory traj = propagate_joint_moments(
      s.p.sys, law, s.pair, Vector::Zero(2), SymMatrix(cov0), N);
  CHECK(storage_lambda_bar(s.sol.P, traj, 0) ==
        doctest::Approx(-s.sol.P(0, 0) * sv).epsilon(1e-12));
}

TEST_CASE("lower_bound_M: scalar closed form and degenerate case") {
  CHECK(lower_bound_M(SymMatrix::Identity(1), SymMatrix::Identity(1),
                      SymMatrix::Zero(1)) == 0.0);

  const double p = 4.3495, sv = 0.5, sigma_s = 17.0;
  const double m = lower_bound_M(SymMatrix(Matrix::Constant(1, 1, p)),
                                 SymMatrix(Matrix::Constant(1, 1, sv)),
                                 SymMatrix(Matrix::Constant(1, 1, sigma_s)));
  const double expected = -(p + sv) * p / sv * sigma_s;
  CHECK(m == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(m - (-717.2)) <= 0.5);

  CHECK_THROWS_AS(lower_bound_M(SymMatrix::Identity(1), SymMatrix::Zero(1),
                                SymMatrix::Identity(1)),
                  NotPositiveDefinite);
}

TEST_CASE("lower_bound_M is the infimum of lambda_tilde over joint laws") {
  std::mt19937_64 rng(52);
  for (int rounds = 0; rounds < 5; ++rounds) {
    const Index n = 1 + static_cast<Index>(rng() % 3);
    const SymMatrix p_mat = testutil::random_spd(rng, n, 0.0);
    const SymMatrix s_mat = testutil::random_spd(rng, n, 0.2);
    const SymMatrix sigma_s = testutil::random_spd(rng, n, 0.1);
    const double m = lower_bound_M(p_mat, s_mat, sigma_s);

    // lambda_tilde for X = G Xs + xi with xi ~ N(mu, cov_xi) independent:
    //   E[-||X||_P^2 + ||X - Xs||_{P+S}^2].
    auto tilde = [&](const Matrix& g, const Vector& mu, const SymMatrix& cov_xi) {
      const Matrix cov_x =
          g * sigma_s.mat() * g.transpose() + cov_xi.mat();
      const Matrix id = Matrix::Identity(n, n);
      const Matrix cov_d = (g - id) * sigma_s.mat() * (g - id).transpose() +
                           cov_xi.mat();
      const Matrix ps = p_mat.mat() + s_mat.mat();
      return -((p_mat.mat() * cov_x).trace() + mu.dot(p_mat.mat() * mu)) +
             (ps * cov_d).trace() + mu.dot(ps * mu);
    };

    for (int trial = 0; trial < 400; ++trial) {
      const Matrix g = testutil::random_matrix(rng, n, n, 2.0);
      const Vector mu = testutil::random_matrix(rng, n, 1, 2.0);
      const SymMatrix cov_xi = testutil::random_spd(rng, n, 0.0);
      const double value = tilde(g, mu, cov_xi);
      CHECK(value >= m - 1e-9 * (1.0 + std::abs(m)));
    }

    // The bound is attained by the pointwise minimizer X = S^{-1}(P+S) Xs.
    const Matrix g_star = solve_linear(s_mat, Matrix(p_mat.mat() + s_mat.mat()));
    const double at_star = tilde(g_star, Vector::Zero(n), SymMatrix::Zero(n));
    CHECK(at_star == doctest::Approx(m).epsilon(1e-9));
  }
}

TEST_CASE("verify_dissipation_chain: identities hold along optimal and perturbed laws") {
  const Solved s = solved_running_example();
  const DissipativityCertificate cert =
      build_certificate(s.p.sys, s.p.cost, s.sol);
  const Index N = 30;
  const GainSchedule sched =
      riccati_backward(s.p.sys, s.p.cost, N, SymMatrix::Zero(1));
  const AffineControlLaw optimal = AffineControlLaw::from_schedule(sched);

  const ChainResiduals res = verify_dissipation_chain(
      s.p.sys, s.p.cost, cert, s.sol, s.pair, optimal, s.p.x0, N);
  CHECK(res.hat_max <= 1e-8);
  CHECK(res.bar_max <= 1e-8);
  CHECK(res.tilde_max <= 1e-8);
  CHECK(res.scale > 0.0);

  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    const AffineControlLaw law =
        optimal.plus(testutil::random_perturbation(rng, 1, 1, N, 0.1));
    const ChainResiduals pr = verify_dissipation_chain(
        s.p.sys, s.p.cost, cert, s.sol, s.pair, law, s.p.x0, N);
    CHECK(pr.hat_max <= 1e-8);
    CHECK(pr.bar_max <= 1e-8);
    CHECK(pr.tilde_max <= 1e-8);
  }
}

TEST_CASE("verify_dissipation_chain: steady feedback makes the first rate vanish") {
  const Solved s = solved_running_example();
  const DissipativityCertificate cert =
      build_certificate(s.p.sys, s.p.cost, s.sol);
  const Index N = 10;
  const AffineControlLaw law = AffineControlLaw::steady_gain(s.sol.K, N);
  const MomentTrajectory traj =
      propagate_joint_moments(s.p.sys, law, s.pair, s.p.x0, N);
  for (Index k = 0; k < N; ++k) {
    Matrix g = traj.control_selector(k);
    g.leftCols(1) -= s.sol.K;
    CHECK(traj.quadratic(k, g, law.offset(k), s.sol.Rtilde) <= 1e-14);
  }
  const ChainResiduals res = verify_dissipation_chain(
      s.p.sys, s.p.cost, cert, s.sol, s.pair, law, s.p.x0, N);
  CHECK(res.hat_max <= 1e-10);
}

TEST_CASE("lambda_tilde stays above M and the H rate dominates the raw norm") {
  const Solved s = solved_running_example();
  const DissipativityCertificate cert =
      build_certificate(s.p.sys, s.p.cost, s.sol);
  const Index N = 12;
  const GainSchedule sched =
      riccati_backward(s.p.sys, s.p.cost, N, SymMatrix::Zero(1));
  const AffineControlLaw law = AffineControlLaw::from_schedule(sched);
  const MomentTrajectory traj =
      propagate_joint_moments(s.p.sys, law, s.pair, s.p.x0, N);
  const double m = lower_bound_M(cert.P, cert.S, s.pair.cov);
  const SymMatrix id2 = SymMatrix::Identity(2);
  for (Index k = 0; k <= N; ++k) {
    CHECK(storage_lambda_tilde(cert.P, cert.S, traj, k) >=
          m - 1e-9 * (1.0 + std::abs(m)));
  }
  for (Index k = 0; k < N; ++k) {
    const double rate = traj.quadratic(k, traj.joint_diff_selector(k),
                                       traj.joint_diff_offset(k), cert.H);
    const double raw = traj.quadratic(k, traj.joint_diff_selector(k),
                                      traj.joint_diff_offset(k), id2);
    CHECK(rate >= cert.lambda_min_H_lower * raw - 1e-10);
  }
}

TEST_CASE("chain identities on random certified systems") {
  std::mt19937_64 rng(54);
  for (int trial = 0; trial < 3; ++trial) {
    const testutil::CertifiedProblem cp =
        testutil::random_certified_problem(rng, 4, 2);
    const Index N = 20;
    const GainSchedule sched =
        riccati_backward(cp.prob.sys, cp.prob.cost, N,
                         SymMatrix::Zero(cp.prob.sys.state_dim()));
    const AffineControlLaw law =
        AffineControlLaw::from_schedule(sched)
            .plus(testutil::random_perturbation(
                rng, cp.prob.sys.control_dim(), cp.prob.sys.state_dim(), N, 0.05));
    const ChainResiduals res =
        verify_dissipation_chain(cp.prob.sys, cp.prob.cost, cp.cert, cp.sol,
                                 cp.pair, law, cp.prob.x0, N);
    CHECK(res.hat_max <= 1e-8);
    CHECK(res.bar_max <= 1e-8);
    CHECK(res.tilde_max <= 1e-8);
  }
}

TEST_SUITE_END();
