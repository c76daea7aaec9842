#include <doctest.h>

#include <cmath>
#include <random>

#include "stoclq/riccati.hpp"
#include "stoclq/stationary.hpp"
#include "test_util.hpp"

using namespace stoclq;

namespace {

Problem running_example() {
  return Problem{
      LtiStochasticSystem(Matrix::Constant(1, 1, 1.2), Matrix::Constant(1, 1, 1.0),
                          SymMatrix(Matrix::Constant(1, 1, 10.0))),
      QuadraticCost(SymMatrix(Matrix::Constant(1, 1, 1.0)),
                    SymMatrix(Matrix::Constant(1, 1, 5.0))),
      GaussianState(Vector::Constant(1, 3.0), SymMatrix(Matrix::Constant(1, 1, 1.5)))};
}

// Second moment of X - Xs at step k, E[(X-Xs)(X-Xs)^T].
Matrix diff_second_moment(const MomentTrajectory& traj, Index k) {
  const Matrix d = traj.diff_selector();
  const Vector mu = d * traj.mean(k);
  return d * traj.cov(k).mat() * d.transpose() + mu * mu.transpose();
}

}  // namespace

TEST_SUITE_BEGIN("stationary");

TEST_CASE("solve_lyapunov: A_K = 0 returns Sigma_W") {
  std::mt19937_64 rng(41);
  const SymMatrix sw = testutil::random_spd(rng, 3, 0.1);
  const SymMatrix sigma = solve_lyapunov(Matrix::Zero(3, 3), sw);
  CHECK(max_abs(sigma.mat() - sw.mat()) <= 1e-12);
}

TEST_CASE("solve_lyapunov: scalar and diagonal geometric series") {
  // Scalar: sigma = sigma_w / (1 - a^2).
  const SymMatrix s1 =
      solve_lyapunov(Matrix::Constant(1, 1, 0.5), SymMatrix::Identity(1));
  CHECK(s1(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));

  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 0.5;
  a(1, 1) = 0.2;
  const SymMatrix s2 = solve_lyapunov(a, SymMatrix::Identity(2));
  CHECK(s2(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(s2(1, 1) == doctest::Approx(25.0 / 24.0).epsilon(1e-12));
  CHECK(std::abs(s2(0, 1)) <= 1e-12);
}

TEST_CASE("solve_lyapunov: residual contract on random stable maps") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 1 + static_cast<Index>(rng() % 5);
    Matrix a = testutil::random_matrix(rng, n, n);
    const double rho = testutil::exact_spectral_radius(a);
    if (rho < 1e-6) continue;
    a *= (0.2 + 0.75 * (trial / 20.0)) / rho;
    const SymMatrix sw = testutil::random_spd(rng, n, 0.05);
    const SymMatrix sigma = solve_lyapunov(a, sw);
    CHECK(max_abs(sigma.mat() - a * sigma.mat() * a.transpose() - sw.mat()) <=
          1e-9 * (1.0 + max_abs(sigma.mat())));
  }
}

TEST_CASE("solve_lyapunov rejects unstable maps") {
  CHECK_THROWS_AS(
      solve_lyapunov(Matrix::Constant(1, 1, 1.1), SymMatrix::Identity(1)),
      NoConvergence);
}

TEST_CASE("build_stationary_pair: running example gives Sigma_s near 17") {
  const Problem p = running_example();
  const RiccatiSolution sol = solve_dare(p.sys, p.cost);
  const StationaryPair pair = build_stationary_pair(p.sys, sol);
  const double a_k = 1.2 + sol.K(0, 0);
  CHECK(std::abs(pair.A_K(0, 0) - a_k) <= 1e-14);
  CHECK(pair.cov(0, 0) ==
        doctest::Approx(10.0 / (1.0 - a_k * a_k)).epsilon(1e-10));
  CHECK(std::abs(pair.cov(0, 0) - 17.0) <= 0.05);
  CHECK(max_abs(pair.mean) == 0.0);
}

TEST_CASE("build_stationary_pair: zero noise degenerates to the origin") {
  const LtiStochasticSystem sys(Matrix::Constant(1, 1, 1.2),
                                Matrix::Constant(1, 1, 1.0), SymMatrix::Zero(1));
  const QuadraticCost cost(SymMatrix::Identity(1),
                           SymMatrix(Matrix::Constant(1, 1, 5.0)));
  const RiccatiSolution sol = solve_dare(sys, cost);
  const StationaryPair pair = build_stationary_pair(sys, sol);
  CHECK(max_abs(pair.cov.mat()) == 0.0);
}

TEST_CASE("quadratic_form_expectation: scalar hand value") {
  // E (2 Z + 1)^2 with Z ~ N(3, 4): 4*4 + 7^2 = 65.
  const double v = quadratic_form_expectation(
      SymMatrix::Identity(1), Matrix::Constant(1, 1, 2.0), Vector::Constant(1, 1.0),
      Vector::Constant(1, 3.0), SymMatrix(Matrix::Constant(1, 1, 4.0)));
  CHECK(v == doctest::Approx(65.0).epsilon(1e-14));
}

TEST_CASE("propagate_joint_moments: initial block structure and stationarity") {
  const Problem p = running_example();
  const RiccatiSolution sol = solve_dare(p.sys, p.cost);
  const StationaryPair pair = build_stationary_pair(p.sys, sol);
  const Index N = 10000;
  const AffineControlLaw law = AffineControlLaw::steady_gain(sol.K, N);
  const MomentTrajectory traj = propagate_joint_moments(p.sys, law, pair, p.x0, N);

  // k = 0: independent blocks.
  CHECK(traj.mean(0)(0) == 3.0);
  CHECK(traj.mean(0)(1) == 0.0);
  CHECK(traj.cov(0)(0, 0) == 1.5);
  CHECK(traj.cov(0)(0, 1) == 0.0);
  CHECK(traj.cov(0)(1, 1) == pair.cov(0, 0));

  // The Xs marginal stays (0, Sigma_s) for all k.
  double worst_mean = 0.0, worst_cov = 0.0;
  for (Index k = 0; k <= N; k += 100) {
    const GaussianState xs = traj.xs_state(k);
    worst_mean = std::max(worst_mean, max_abs(xs.mean));
    worst_cov = std::max(worst_cov, max_abs(xs.cov.mat() - pair.cov.mat()));
  }
  CHECK(worst_mean <= 1e-9);
  CHECK(worst_cov <= 1e-9 * (1.0 + max_abs(pair.cov.mat())));
}

TEST_CASE("propagate_joint_moments: fully coupled start is a fixed point") {
  const Problem p = running_example();
  const RiccatiSolution sol = solve_dare(p.sys, p.cost);
  const StationaryPair pair = build_stationary_pair(p.sys, sol);
  const Index N = 50;
  const AffineControlLaw law = AffineControlLaw::steady_gain(sol.K, N);

  Vector mean0 = Vector::Zero(2);
  Matrix cov0(2, 2);
  const double s = pair.cov(0, 0);
  cov0 << s, s, s, s;  // X(0) = Xs(0) almost surely
  const MomentTrajectory traj =
      propagate_joint_moments(p.sys, law, pair, mean0, SymMatrix(cov0), N);
  for (Index k = 0; k <= N; ++k) {
    CHECK(max_abs(traj.mean(k)) <= 1e-9);
    CHECK(max_abs(traj.cov(k).mat() - cov0) <= 1e-9 * (1.0 + s));
    // And the difference process is exactly degenerate.
    CHECK(std::abs(diff_second_moment(traj, k)(0, 0)) <= 1e-9);
  }
}

TEST_CASE("difference process contracts noise-free under shared noise") {
  std::mt19937_64 rng(43);
  const testutil::CertifiedProblem cp = testutil::random_certified_problem(rng, 4, 2);
  const Index N = 25;
  const AffineControlLaw law = AffineControlLaw::steady_gain(cp.sol.K, N);
  const MomentTrajectory traj =
      propagate_joint_moments(cp.prob.sys, law, cp.pair, cp.prob.x0, N);

  double scale = 1.0;
  for (Index k = 0; k < N; ++k) {
    const Matrix d_now = diff_second_moment(traj, k);
    const Matrix d_next = diff_second_moment(traj, k + 1);
    const Matrix predicted = cp.pair.A_K * d_now * cp.pair.A_K.transpose();
    scale = std::max(scale, max_abs(d_now));
    CHECK(max_abs(d_next - predicted) <= 1e-10 * scale);
  }
}

TEST_CASE("independent coupling keeps the difference process noisy") {
  const Problem p = running_example();
  const RiccatiSolution sol = solve_dare(p.sys, p.cost);
  const StationaryPair pair = build_stationary_pair(p.sys, sol);
  const Index N = 200;
  const AffineControlLaw law = AffineControlLaw::steady_gain(sol.K, N);
  const GaussianState x0(Vector::Zero(1), pair.cov);
  const MomentTrajectory traj = propagate_joint_moments(
      p.sys, law, pair, x0, N, NoiseCoupling::Independent);
  // The difference covariance settles at 2 Sigma_s when both processes start
  // from the stationary law but are driven by independent noise.
  CHECK(diff_second_moment(traj, N)(0, 0) ==
        doctest::Approx(2.0 * pair.cov(0, 0)).epsilon(1e-6));

  const MomentTrajectory shared =
      propagate_joint_moments(p.sys, law, pair, x0, N, NoiseCoupling::Shared);
  CHECK(diff_second_moment(shared, N)(0, 0) <= 1e-8);
}

TEST_CASE("propagate_joint_moments: zero noise follows the deterministic recursion") {
  const LtiStochasticSystem sys(Matrix::Constant(1, 1, 1.2),
                                Matrix::Constant(1, 1, 1.0), SymMatrix::Zero(1));
  const QuadraticCost cost(SymMatrix::Identity(1),
                           SymMatrix(Matrix::Constant(1, 1, 5.0)));
  const RiccatiSolution sol = solve_dare(sys, cost);
  const StationaryPair pair = build_stationary_pair(sys, sol);
  const Index N = 12;
  const AffineControlLaw law = AffineControlLaw::steady_gain(sol.K, N);
  const GaussianState x0(Vector::Constant(1, 2.0), SymMatrix::Zero(1));
  const MomentTrajectory traj = propagate_joint_moments(sys, law, pair, x0, N);

  double x = 2.0;
  const double a_k = 1.2 + sol.K(0, 0);
  for (Index k = 0; k <= N; ++k) {
    CHECK(traj.mean(k)(0) == doctest::Approx(x).epsilon(1e-12));
    CHECK(traj.mean(k)(1) == 0.0);
    CHECK(max_abs(traj.cov(k).mat()) <= 1e-15);
    x *= a_k;
  }
}

TEST_CASE("trajectory_cost sums the stage costs") {
  const Problem p = running_example();
  const RiccatiSolution sol = solve_dare(p.sys, p.cost);
  const StationaryPair pair = build_stationary_pair(p.sys, sol);
  const Index N = 6;
  const AffineControlLaw law = AffineControlLaw::steady_gain(sol.K, N);
  const MomentTrajectory traj = propagate_joint_moments(p.sys, law, pair, p.x0, N);
  double total = 0.0;
  for (Index k = 0; k < N; ++k) total += trajectory_stage_cost(p.cost, traj, k);
  CHECK(trajectory_cost(p.cost, traj, N) ==
        doctest::Approx(total).epsilon(1e-14));
  CHECK_THROWS_AS(trajectory_cost(p.cost, traj, N + 1), std::invalid_argument);
}

TEST_CASE("law shorter than the horizon is rejected") {
  const Problem p = running_example();
  const RiccatiSolution sol = solve_dare(p.sys, p.cost);
  const StationaryPair pair = build_stationary_pair(p.sys, sol);
  const AffineControlLaw law = AffineControlLaw::steady_gain(sol.K, 5);
  CHECK_THROWS_AS(propagate_joint_moments(p.sys, law, pair, p.x0, 6),
                  std::invalid_argument);
}

TEST_SUITE_END();
