#include <doctest.h>

#include <cmath>
#include <random>

#include "stoclq/matrix_kernel.hpp"
#include "test_util.hpp"

using namespace stoclq;

TEST_SUITE_BEGIN("matrix_kernel");

TEST_CASE("SymMatrix validates its input") {
  CHECK_THROWS_AS(SymMatrix(Matrix::Zero(2, 3)), std::invalid_argument);

  Matrix skew(2, 2);
  skew << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS(SymMatrix{skew}, std::invalid_argument);

  Matrix nan_mat = Matrix::Zero(2, 2);
  nan_mat(0, 1) = nan_mat(1, 0) = std::nan("");
  CHECK_THROWS_AS(SymMatrix{nan_mat}, std::invalid_argument);

  // Roundoff-level asymmetry is absorbed by symmetrization.
  Matrix nearly(2, 2);
  nearly << 1.0, 2.0, 2.0 + 1e-14, 1.0;
  const SymMatrix s(nearly);
  CHECK(s(0, 1) == s(1, 0));
}

TEST_CASE("cholesky: identity factors to identity") {
  const CholeskyResult res = cholesky(SymMatrix::Identity(2));
  REQUIRE(res.positive_definite);
  CHECK(max_abs(res.L - Matrix::Identity(2, 2)) == 0.0);
}

TEST_CASE("cholesky: [[4,2],[2,3]] has the closed-form factor") {
  Matrix m(2, 2);
  m << 4.0, 2.0, 2.0, 3.0;
  const SymMatrix sm(m);
  const CholeskyResult res = cholesky(sm);
  REQUIRE(res.positive_definite);
  CHECK(res.L(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(res.L(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(res.L(1, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(res.L(0, 1) == 0.0);
  CHECK(max_abs(res.L * res.L.transpose() - m) <= 1e-10 * (1.0 + max_abs(m)));
}

TEST_CASE("cholesky: indefinite [[1,2],[2,1]] fails at pivot 1") {
  // Eigenvalues 3 and -1 (characteristic polynomial (1-x)^2 - 4).
  Matrix m(2, 2);
  m << 1.0, 2.0, 2.0, 1.0;
  const CholeskyResult res = cholesky(SymMatrix(m));
  CHECK_FALSE(res.positive_definite);
  CHECK(res.failing_pivot == 1);
  CHECK(res.failing_value < 0.0);
}

TEST_CASE("is_positive_definite / semidefinite edge cases") {
  CHECK_FALSE(is_positive_definite(SymMatrix::Zero(3)));
  CHECK(is_positive_semidefinite(SymMatrix::Zero(3)));

  // Rank one: PSD but not PD.
  Matrix ones = Matrix::Ones(2, 2);
  CHECK_FALSE(is_positive_definite(SymMatrix(ones)));
  CHECK(is_positive_semidefinite(SymMatrix(ones)));

  Matrix indef(2, 2);
  indef << 1.0, 2.0, 2.0, 1.0;
  CHECK_FALSE(is_positive_semidefinite(SymMatrix(indef)));
}

TEST_CASE("cholesky_psd reconstructs what it accepts") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 1 + static_cast<Index>(rng() % 5);
    const Index r = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(n));
    const Matrix g = testutil::random_matrix(rng, n, r);
    const SymMatrix m(g * g.transpose());  // rank <= r, PSD
    const PsdFactorResult res = cholesky_psd(m);
    REQUIRE(res.positive_semidefinite);
    CHECK(max_abs(res.L * res.L.transpose() - m.mat()) <=
          1e-9 * (1.0 + max_abs(m.mat())));
  }
}

TEST_CASE("spectral_radius_estimate: pinned values") {
  CHECK(spectral_radius_estimate(Matrix::Zero(3, 3)) == 0.0);

  const Matrix a_k = Matrix::Constant(1, 1, 0.64174);
  CHECK(std::abs(spectral_radius_estimate(a_k) - 0.64174) <= 1e-6);

  Matrix nilpotent(2, 2);
  nilpotent << 0.0, 1.0, 0.0, 0.0;
  CHECK(spectral_radius_estimate(nilpotent) == 0.0);
}

TEST_CASE("spectral_radius_estimate: cI property") {
  for (const double c : {0.5, -0.7, 1.5, 2.0, 1e-3}) {
    for (const Index n : {1, 2, 5}) {
      const double est = spectral_radius_estimate(c * Matrix::Identity(n, n));
      CHECK(std::abs(est - std::abs(c)) <= 1e-6);
    }
  }
}

TEST_CASE("spectral_radius_estimate agrees with the eigenvalue oracle") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 1 + static_cast<Index>(rng() % 5);
    Matrix m = testutil::random_matrix(rng, n, n);
    const double rho = testutil::exact_spectral_radius(m);
    if (rho < 1e-6) continue;
    // Keep clear of the band around 1 where the probe may throw.
    const double target = (trial % 2 == 0) ? 0.8 : 1.3;
    m *= target / rho;
    const double est = spectral_radius_estimate(m);
    CHECK(std::abs(est - target) <= 1e-4 * (1.0 + target));
  }
}

TEST_CASE("solve_linear: identity and scalar oracle") {
  Vector b(3);
  b << 1.0, -2.0, 0.5;
  const Vector x = solve_linear(SymMatrix::Identity(3), b);
  CHECK(max_abs(x - b) <= 1e-14);

  // [[5]] x = [[1.2 * 4.3495]]  ->  x = 1.043880
  const SymMatrix five(Matrix::Constant(1, 1, 5.0));
  const Matrix rhs = Matrix::Constant(1, 1, 1.2 * 4.3495);
  const Matrix sol = solve_linear(five, rhs);
  CHECK(sol(0, 0) == doctest::Approx(1.2 * 4.3495 / 5.0).epsilon(1e-14));
}

TEST_CASE("solve_linear: residual contract on random SPD systems") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 1 + static_cast<Index>(rng() % 6);
    const SymMatrix m = testutil::random_spd(rng, n, 0.05);
    const Matrix rhs = testutil::random_matrix(rng, n, 2, 3.0);
    const Matrix x = solve_linear(m, rhs);
    CHECK(max_abs(m.mat() * x - rhs) <= 1e-10 * (1.0 + max_abs(rhs)));
  }
  CHECK_THROWS_AS(solve_linear(SymMatrix::Zero(2), Vector(Vector::Zero(2))),
                  NotPositiveDefinite);
}

TEST_CASE("certified_lambda_min_bound brackets the true smallest eigenvalue") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 60; ++trial) {
    const Index n = 1 + static_cast<Index>(rng() % 5);
    const Matrix g = testutil::random_matrix(rng, n, n, 2.0);
    const SymMatrix m(symmetrize(g));
    const double exact = testutil::exact_lambda_min(m);
    const double bound = certified_lambda_min_bound(m);
    const double tol = 1e-8 * (1.0 + max_abs(m.mat()));
    CHECK(bound <= exact + tol);
    CHECK(bound >= exact - tol);
  }
}

TEST_SUITE_END();
