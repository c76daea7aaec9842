#include "stoclq/matrix_kernel.hpp"

#include <cmath>
#include <limits>

namespace stoclq {

double max_abs(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("SymMatrix: matrix must be square");
  if (!all_finite(m))
    throw std::invalid_argument("SymMatrix: entries must be finite");
  const double asym = max_abs(m - m.transpose());
  if (asym > 1e-12 * (1.0 + max_abs(m)))
    throw std::invalid_argument("SymMatrix: asymmetry " + std::to_string(asym) +
                                " exceeds tolerance");
  mat_ = symmetrize(m);
}

SymMatrix SymMatrix::Zero(Index dim) { return SymMatrix(Matrix::Zero(dim, dim)); }

SymMatrix SymMatrix::Identity(Index dim) {
  return SymMatrix(Matrix::Identity(dim, dim));
}

SymMatrix SymMatrix::FromDiagonal(const Vector& diag) {
  return SymMatrix(Matrix(diag.asDiagonal()));
}

CholeskyResult cholesky(const SymMatrix& m) {
  const Index n = m.dim();
  const double pivot_tol = std::max(0.0, 1e-12 * m.trace() / std::max<Index>(n, 1));
  CholeskyResult res;
  res.L = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double d = m(j, j) - res.L.row(j).head(j).squaredNorm();
    if (!(d > pivot_tol)) {
      res.positive_definite = false;
      res.failing_pivot = j;
      res.failing_value = d;
      return res;
    }
    res.L(j, j) = std::sqrt(d);
    for (Index i = j + 1; i < n; ++i) {
      const double s = m(i, j) - res.L.row(i).head(j).dot(res.L.row(j).head(j));
      res.L(i, j) = s / res.L(j, j);
    }
  }
  res.positive_definite = true;
  return res;
}

PsdFactorResult cholesky_psd(const SymMatrix& m) {
  const Index n = m.dim();
  const double pivot_tol =
      std::max(0.0, 1e-12 * m.trace() / std::max<Index>(n, 1));
  PsdFactorResult res;
  res.L = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double d = m(j, j) - res.L.row(j).head(j).squaredNorm();
    if (d > pivot_tol) {
      res.L(j, j) = std::sqrt(d);
      for (Index i = j + 1; i < n; ++i) {
        const double s = m(i, j) - res.L.row(i).head(j).dot(res.L.row(j).head(j));
        res.L(i, j) = s / res.L(j, j);
      }
    } else if (d >= -pivot_tol) {
      // Clamp: treat this direction as exactly null. The reconstruction check
      // below catches the case where the clamped column actually mattered.
      res.L(j, j) = 0.0;
    } else {
      res.positive_semidefinite = false;
      res.failing_pivot = j;
      return res;
    }
  }
  const double recon = max_abs(res.L * res.L.transpose() - m.mat());
  if (recon > 1e-9 * (1.0 + max_abs(m.mat()))) {
    res.positive_semidefinite = false;
    res.failing_pivot = n;  // clamping hid indefiniteness; no single pivot
    return res;
  }
  res.positive_semidefinite = true;
  return res;
}

bool is_positive_definite(const SymMatrix& m) {
  return cholesky(m).positive_definite;
}

bool is_positive_semidefinite(const SymMatrix& m) {
  return cholesky_psd(m).positive_semidefinite;
}

namespace {

// Lyapunov-iteration stability probe: S_{i+1} = m S_i m^T + I converges iff
// rho(m) < 1. Partial sums are doubled each round (S holds sum_{k<2^j} m^k
// (m^T)^k), so even rho barely below 1 settles in ~40 rounds.
bool lyapunov_iteration_converges(const Matrix& m) {
  const Index n = m.rows();
  Matrix s = Matrix::Identity(n, n);
  Matrix pw = m;
  for (int j = 0; j < 60; ++j) {
    if (!pw.allFinite() || max_abs(pw) > 1e100 || max_abs(s) > 1e100)
      return false;
    const Matrix inc = pw * s * pw.transpose();
    const double base = max_abs(s);
    s += inc;
    if (max_abs(inc) <= 1e-12 * (1.0 + base)) return true;
    pw = (pw * pw).eval();
  }
  return false;
}

}  // namespace

double spectral_radius_estimate(const Matrix& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("spectral_radius_estimate: matrix must be square");
  if (!all_finite(m))
    throw std::invalid_argument("spectral_radius_estimate: entries must be finite");
  if (m.size() == 0) return 0.0;

  const double fro = m.norm();
  double est = fro;
  if (fro > 0.0) {
    // Gelfand sequence a_j = ||m^(2^j)||_F^(1/2^j); the iterate is renormalized
    // after each squaring and the log of the accumulated scale is carried
    // separately so nothing overflows.
    double log_scale = std::log(fro);
    Matrix mhat = m / fro;
    for (int j = 1; j <= 40; ++j) {
      mhat = (mhat * mhat).eval();
      const double c = mhat.norm();
      if (c == 0.0) {
        est = 0.0;  // nilpotent
        break;
      }
      log_scale = 2.0 * log_scale + std::log(c);
      mhat /= c;
      const double next = std::exp(log_scale / std::pow(2.0, j));
      // The tail behind the settle point is roughly another step of the same
      // size, so settle well inside the documented 1e-6 accuracy.
      const bool settled = std::abs(next - est) < 1e-7;
      est = next;
      if (settled) break;
    }
  } else {
    est = 0.0;
  }

  const bool gelfand_stable = est < 1.0;
  const bool lyapunov_stable = lyapunov_iteration_converges(m);
  if (gelfand_stable != lyapunov_stable) {
    const bool in_band = est >= 1.0 - 1e-4 && est <= 1.0 + 1e-4;
    throw InconclusiveStability(
        std::string("spectral_radius_estimate: Gelfand estimate ") +
        std::to_string(est) + " and Lyapunov probe disagree" +
        (in_band ? " (estimate inside the band [1-1e-4, 1+1e-4])" : ""));
  }
  return est;
}

namespace {

Matrix cholesky_solve(const Matrix& L, const Matrix& rhs) {
  Matrix x = L.triangularView<Eigen::Lower>().solve(rhs);
  L.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

}  // namespace

Matrix solve_linear(const SymMatrix& m, const Matrix& rhs) {
  if (m.dim() != rhs.rows())
    throw std::invalid_argument("solve_linear: dimension mismatch");
  const CholeskyResult chol = cholesky(m);
  if (!chol.positive_definite)
    throw NotPositiveDefinite("solve_linear: matrix is not positive definite",
                              chol.failing_pivot);
  Matrix x = cholesky_solve(chol.L, rhs);
  // One step of iterative refinement against the unfactored matrix.
  const Matrix resid = rhs - m.mat() * x;
  x += cholesky_solve(chol.L, resid);
  return x;
}

Vector solve_linear(const SymMatrix& m, const Vector& rhs) {
  return Vector(solve_linear(m, Matrix(rhs)));
}

double certified_lambda_min_bound(const SymMatrix& m) {
  const Index n = m.dim();
  if (n == 0) return 0.0;
  const double scale = max_abs(m.mat());
  const Matrix id = Matrix::Identity(n, n);
  // lambda_min is in (lo, hi]: m - lo*I is certainly PD, m - hi*I certainly not.
  double lo = -(static_cast<double>(n) * scale + 1.0);
  double hi = m.mat().diagonal().minCoeff() + 1.0;
  for (int it = 0; it < 200; ++it) {
    if (hi - lo <= 1e-15 * (1.0 + std::abs(hi) + std::abs(lo))) break;
    const double mid = 0.5 * (lo + hi);
    if (is_positive_definite(SymMatrix(m.mat() - mid * id)))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace stoclq
