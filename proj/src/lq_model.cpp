#include "stoclq/lq_model.hpp"

namespace stoclq {

LtiStochasticSystem::LtiStochasticSystem(const Matrix& A, const Matrix& B,
                                         const SymMatrix& sigma_w)
    : a_(A), b_(B), sigma_w_(sigma_w) {
  if (a_.rows() != a_.cols())
    throw std::invalid_argument("LtiStochasticSystem: A must be square");
  if (b_.rows() != a_.rows())
    throw std::invalid_argument("LtiStochasticSystem: B must have as many rows as A");
  if (b_.cols() < 1)
    throw std::invalid_argument("LtiStochasticSystem: B must have at least one column");
  if (!all_finite(a_) || !all_finite(b_))
    throw std::invalid_argument("LtiStochasticSystem: entries must be finite");
  if (sigma_w_.dim() != a_.rows())
    throw std::invalid_argument("LtiStochasticSystem: Sigma_W dimension mismatch");
  const PsdFactorResult f = cholesky_psd(sigma_w_);
  if (!f.positive_semidefinite)
    throw std::invalid_argument(
        "LtiStochasticSystem: Sigma_W is not positive semidefinite (pivot " +
        std::to_string(f.failing_pivot) + ")");
  noise_factor_ = f.L;
}

QuadraticCost::QuadraticCost(const SymMatrix& Q, const SymMatrix& R)
    : q_(Q), r_(R) {
  const PsdFactorResult f = cholesky_psd(q_);
  if (!f.positive_semidefinite)
    throw std::invalid_argument("QuadraticCost: Q is not positive semidefinite (pivot " +
                                std::to_string(f.failing_pivot) + ")");
  q_factor_ = f.L;
  const CholeskyResult rc = cholesky(r_);
  if (!rc.positive_definite)
    throw std::invalid_argument("QuadraticCost: R is not positive definite (pivot " +
                                std::to_string(rc.failing_pivot) + ")");
}

GaussianState::GaussianState(const Vector& mean_in, const SymMatrix& cov_in)
    : mean(mean_in), cov(cov_in) {
  if (mean.size() != cov.dim())
    throw std::invalid_argument("GaussianState: mean/cov dimension mismatch");
  if (!mean.allFinite())
    throw std::invalid_argument("GaussianState: mean must be finite");
  if (!is_positive_semidefinite(cov))
    throw std::invalid_argument("GaussianState: cov is not positive semidefinite");
}

namespace {

struct DareProbe {
  bool converged = false;
  int iterations = 0;
};

// Value iteration for the DARE of (A, B, I, I) starting from P = I. Converges
// iff (A, B) is stabilizable; divergence is cut off early once ||P|| blows up.
DareProbe dare_probe(const Matrix& A, const Matrix& B, int max_iter) {
  const Index n = A.rows();
  const Index l = B.cols();
  const Matrix id_n = Matrix::Identity(n, n);
  const Matrix id_l = Matrix::Identity(l, l);
  Matrix P = id_n;
  DareProbe probe;
  for (int it = 1; it <= max_iter; ++it) {
    probe.iterations = it;
    Matrix next;
    if (l == 0 || B.size() == 0 || max_abs(B) == 0.0) {
      next = symmetrize(A.transpose() * P * A) + id_n;
    } else {
      const Matrix rtilde = symmetrize(id_l + B.transpose() * P * B);
      const Matrix mcross = B.transpose() * P * A;
      const Matrix gain = solve_linear(SymMatrix(rtilde), mcross);
      next = symmetrize(A.transpose() * P * A) + id_n -
             symmetrize(mcross.transpose() * gain);
    }
    const double diff = max_abs(next - P);
    P = next;
    if (max_abs(P) > 1e100) return probe;  // diverged
    if (diff <= 1e-10 * (1.0 + max_abs(P))) {
      probe.converged = true;
      return probe;
    }
  }
  return probe;
}

}  // namespace

ValidationReport validate(const LtiStochasticSystem& sys, const QuadraticCost& cost) {
  ValidationReport report;
  report.dimensions_ok = cost.Q().dim() == sys.state_dim() &&
                         cost.R().dim() == sys.control_dim();
  if (!report.dimensions_ok) return report;

  constexpr int kProbeCap = 10000;
  const DareProbe stab = dare_probe(sys.A(), sys.B(), kProbeCap);
  report.stabilizable = stab.converged;
  report.stabilizable_iterations = stab.iterations;

  // (A, C) with C^T C = Q is detectable iff (A^T, Lq) is stabilizable.
  const DareProbe det = dare_probe(sys.A().transpose(), cost.q_factor(), kProbeCap);
  report.detectable = det.converged;
  report.detectable_iterations = det.iterations;
  return report;
}

double stage_cost(const QuadraticCost& cost, const GaussianState& state,
                  const Vector& ctrl_mean, const SymMatrix& ctrl_cov,
                  const Matrix& cross_cov) {
  if (state.mean.size() != cost.Q().dim())
    throw std::invalid_argument("stage_cost: state dimension mismatch");
  if (ctrl_mean.size() != cost.R().dim() || ctrl_cov.dim() != cost.R().dim())
    throw std::invalid_argument("stage_cost: control dimension mismatch");
  (void)cross_cov;  // separable cost; see header
  const double state_part = (cost.Q().mat() * state.cov.mat()).trace() +
                            state.mean.dot(cost.Q().mat() * state.mean);
  const double ctrl_part = (cost.R().mat() * ctrl_cov.mat()).trace() +
                           ctrl_mean.dot(cost.R().mat() * ctrl_mean);
  return state_part + ctrl_part;
}

}  // namespace stoclq
