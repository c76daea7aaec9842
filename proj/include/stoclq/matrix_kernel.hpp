#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

// Dense symmetric-matrix kernel used by everything above it. Storage and
// arithmetic are Eigen; the factorizations and the stability probe are written
// out here because the rest of the library depends on their exact failure
// semantics (failing pivot index, certified margins, no general eigensolver).

namespace stoclq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Iterative solver hit its cap or diverged.
struct NoConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A positive-definite factorization was required and failed; `pivot` is the
// index of the first non-positive pivot.
struct NotPositiveDefinite : std::runtime_error {
  NotPositiveDefinite(const std::string& what, Index pivot_index)
      : std::runtime_error(what), pivot(pivot_index) {}
  Index pivot;
};

// The Gelfand estimate and the Lyapunov-iteration probe disagree about
// stability (spectral radius inside the unresolvable band around 1).
struct InconclusiveStability : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No dissipativity certificate found; carries the best margin seen.
struct CertificateNotFound : std::runtime_error {
  CertificateNotFound(const std::string& what, double margin)
      : std::runtime_error(what), best_margin(margin) {}
  double best_margin;
};

// A proved turnpike bound failed numerically (should never happen for inputs
// that satisfy the certificate preconditions).
struct BoundViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Perturbation with E||V(k)||^2 = 0 for every k; the gap curve is identically
// zero and says nothing.
struct DegeneratePerturbation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Entrywise max-abs norm; 0 for empty matrices.
double max_abs(const Matrix& m);

bool all_finite(const Matrix& m);

// (m + m^T) / 2
Matrix symmetrize(const Matrix& m);

// Symmetric matrix, validated on construction: square, finite entries,
// ||m - m^T||_max <= 1e-12 * (1 + ||m||_max). Stores (m + m^T)/2 so downstream
// code never sees roundoff asymmetry.
class SymMatrix {
 public:
  SymMatrix() : mat_(0, 0) {}
  explicit SymMatrix(const Matrix& m);

  static SymMatrix Zero(Index dim);
  static SymMatrix Identity(Index dim);
  static SymMatrix FromDiagonal(const Vector& diag);

  Index dim() const { return mat_.rows(); }
  const Matrix& mat() const { return mat_; }
  double operator()(Index i, Index j) const { return mat_(i, j); }
  double trace() const { return mat_.trace(); }

 private:
  Matrix mat_;
};

// Lower-triangular Cholesky with explicit failure reporting. A pivot d_j must
// satisfy d_j > pivot_tol = 1e-12 * trace(m) / dim (clamped at 0); the first
// failing index is reported instead of throwing, because callers use this as a
// positive-definiteness classifier.
struct CholeskyResult {
  bool positive_definite = false;
  Matrix L;                  // valid only when positive_definite
  Index failing_pivot = -1;  // set only on failure
  double failing_value = 0.0;
};
CholeskyResult cholesky(const SymMatrix& m);

// Positive-semidefinite variant: pivots within +/- pivot_tol are clamped to
// zero (their column is zeroed); a pivot below -pivot_tol rejects. On success
// L L^T must reconstruct m to 1e-9 * (1 + ||m||_max), otherwise the clamping
// hid genuine indefiniteness and the matrix is rejected.
struct PsdFactorResult {
  bool positive_semidefinite = false;
  Matrix L;
  Index failing_pivot = -1;
};
PsdFactorResult cholesky_psd(const SymMatrix& m);

bool is_positive_definite(const SymMatrix& m);
bool is_positive_semidefinite(const SymMatrix& m);

// Spectral radius via the Gelfand sequence ||m^(2^j)||_F^(1/2^j) with
// renormalized squaring (stops when consecutive estimates differ by < 1e-6 or
// at j = 40), cross-checked against convergence of the Lyapunov iteration
// S_{i+1} = m S_i m^T + I, which converges iff rho(m) < 1. Throws
// InconclusiveStability when the two indicators disagree (band around 1).
double spectral_radius_estimate(const Matrix& m);

// Solve m x = rhs for symmetric positive definite m via Cholesky, with one
// step of iterative refinement. Residual contract:
// ||m x - rhs||_max <= 1e-10 * (1 + ||rhs||_max).
Matrix solve_linear(const SymMatrix& m, const Matrix& rhs);
Vector solve_linear(const SymMatrix& m, const Vector& rhs);

// Largest c, found by bisected Cholesky on m - c I, such that m - c I is
// certified positive definite; this is a signed lower bound on the smallest
// eigenvalue (negative for indefinite m).
double certified_lambda_min_bound(const SymMatrix& m);

}  // namespace stoclq
