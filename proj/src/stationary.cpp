#include "stoclq/stationary.hpp"

namespace stoclq {

SymMatrix solve_lyapunov(const Matrix& A_K, const SymMatrix& sigma_w) {
  if (A_K.rows() != A_K.cols() || A_K.rows() != sigma_w.dim())
    throw std::invalid_argument("solve_lyapunov: dimension mismatch");
  const double rho = spectral_radius_estimate(A_K);
  if (!(rho < 1.0))
    throw NoConvergence("solve_lyapunov: rho(A_K) = " + std::to_string(rho) +
                        " >= 1, no stationary covariance");

  Matrix s = sigma_w.mat();
  Matrix pw = A_K;
  bool settled = false;
  for (int j = 0; j < 100; ++j) {
    const Matrix inc = symmetrize(pw * s * pw.transpose());
    const double base = max_abs(s);
    s += inc;
    if (max_abs(s) > 1e100)
      throw NoConvergence("solve_lyapunov: doubling iteration diverged");
    if (max_abs(inc) <= 1e-12 * (1.0 + base)) {
      settled = true;
      break;
    }
    pw = (pw * pw).eval();
  }
  if (!settled)
    throw NoConvergence("solve_lyapunov: doubling iteration hit the cap");

  const SymMatrix sigma(symmetrize(s));
  const double resid =
      max_abs(sigma.mat() - A_K * sigma.mat() * A_K.transpose() - sigma_w.mat());
  if (resid > 1e-9 * (1.0 + max_abs(sigma.mat())))
    throw NoConvergence("solve_lyapunov: residual above tolerance");
  return sigma;
}

StationaryPair build_stationary_pair(const LtiStochasticSystem& sys,
                                     const RiccatiSolution& sol) {
  StationaryPair pair;
  pair.K = sol.K;
  pair.A_K = sys.A() + sys.B() * sol.K;
  pair.cov = solve_lyapunov(pair.A_K, sys.sigma_w());
  pair.mean = Vector::Zero(sys.state_dim());
  return pair;
}

double quadratic_form_expectation(const SymMatrix& W, const Matrix& G,
                                  const Vector& g, const Vector& mean,
                                  const SymMatrix& cov) {
  if (G.rows() != W.dim() || G.cols() != cov.dim() || g.size() != W.dim() ||
      mean.size() != cov.dim())
    throw std::invalid_argument("quadratic_form_expectation: dimension mismatch");
  const Vector m = G * mean + g;
  return (W.mat() * G * cov.mat() * G.transpose()).trace() + m.dot(W.mat() * m);
}

MomentTrajectory::MomentTrajectory(std::vector<Vector> means,
                                   std::vector<SymMatrix> covs,
                                   AffineControlLaw law, Matrix stationary_gain,
                                   NoiseCoupling coupling)
    : means_(std::move(means)),
      covs_(std::move(covs)),
      law_(std::move(law)),
      gain_(std::move(stationary_gain)),
      coupling_(coupling) {
  if (means_.empty() || means_.size() != covs_.size())
    throw std::invalid_argument("MomentTrajectory: mean/cov lengths must match");
  if (law_.horizon() + 1 < static_cast<Index>(means_.size()))
    throw std::invalid_argument("MomentTrajectory: law shorter than trajectory");
}

double MomentTrajectory::quadratic(Index k, const Matrix& G, const Vector& g,
                                   const SymMatrix& W) const {
  return quadratic_form_expectation(W, G, g, mean(k), cov(k));
}

GaussianState MomentTrajectory::x_state(Index k) const {
  const Index n = state_dim();
  return GaussianState(mean(k).head(n),
                       SymMatrix(cov(k).mat().topLeftCorner(n, n)));
}

GaussianState MomentTrajectory::xs_state(Index k) const {
  const Index n = state_dim();
  return GaussianState(mean(k).tail(n),
                       SymMatrix(cov(k).mat().bottomRightCorner(n, n)));
}

Matrix MomentTrajectory::x_selector() const {
  const Index n = state_dim();
  Matrix sel(n, 2 * n);
  sel << Matrix::Identity(n, n), Matrix::Zero(n, n);
  return sel;
}

Matrix MomentTrajectory::xs_selector() const {
  const Index n = state_dim();
  Matrix sel(n, 2 * n);
  sel << Matrix::Zero(n, n), Matrix::Identity(n, n);
  return sel;
}

Matrix MomentTrajectory::diff_selector() const {
  const Index n = state_dim();
  Matrix sel(n, 2 * n);
  sel << Matrix::Identity(n, n), -Matrix::Identity(n, n);
  return sel;
}

Matrix MomentTrajectory::control_selector(Index k) const {
  return law_.selector(k);
}

Matrix MomentTrajectory::stationary_control_selector() const {
  const Index n = state_dim();
  Matrix sel(control_dim(), 2 * n);
  sel << Matrix::Zero(control_dim(), n), gain_;
  return sel;
}

Matrix MomentTrajectory::control_diff_selector(Index k) const {
  Matrix sel = law_.selector(k);
  sel.rightCols(state_dim()) -= gain_;
  return sel;
}

Matrix MomentTrajectory::joint_diff_selector(Index k) const {
  const Index n = state_dim();
  const Index l = control_dim();
  Matrix sel(n + l, 2 * n);
  sel.topRows(n) = diff_selector();
  sel.bottomRows(l) = control_diff_selector(k);
  return sel;
}

Vector MomentTrajectory::joint_diff_offset(Index k) const {
  Vector off = Vector::Zero(state_dim() + control_dim());
  off.tail(control_dim()) = law_.offset(k);
  return off;
}

MomentTrajectory propagate_joint_moments(const LtiStochasticSystem& sys,
                                         const AffineControlLaw& law,
                                         const StationaryPair& pair,
                                         const GaussianState& init, Index N,
                                         NoiseCoupling coupling) {
  const Index n = sys.state_dim();
  if (init.mean.size() != n)
    throw std::invalid_argument("propagate_joint_moments: init dimension mismatch");
  Vector mean0 = Vector::Zero(2 * n);
  mean0.head(n) = init.mean;
  Matrix cov0 = Matrix::Zero(2 * n, 2 * n);
  cov0.topLeftCorner(n, n) = init.cov.mat();
  cov0.bottomRightCorner(n, n) = pair.cov.mat();
  return propagate_joint_moments(sys, law, pair, mean0, SymMatrix(cov0), N,
                                 coupling);
}

MomentTrajectory propagate_joint_moments(const LtiStochasticSystem& sys,
                                         const AffineControlLaw& law,
                                         const StationaryPair& pair,
                                         const Vector& init_mean,
                                         const SymMatrix& init_cov, Index N,
                                         NoiseCoupling coupling) {
  const Index n = sys.state_dim();
  const Index l = sys.control_dim();
  if (N < 0) throw std::invalid_argument("propagate_joint_moments: N must be >= 0");
  if (law.horizon() < N)
    throw std::invalid_argument("propagate_joint_moments: law horizon " +
                                std::to_string(law.horizon()) +
                                " shorter than N = " + std::to_string(N));
  if (law.state_dim() != n || law.control_dim() != l)
    throw std::invalid_argument("propagate_joint_moments: law dimension mismatch");
  if (init_mean.size() != 2 * n || init_cov.dim() != 2 * n)
    throw std::invalid_argument("propagate_joint_moments: joint init must be 2n");

  Matrix noise_cov = Matrix::Zero(2 * n, 2 * n);
  noise_cov.topLeftCorner(n, n) = sys.sigma_w().mat();
  noise_cov.bottomRightCorner(n, n) = sys.sigma_w().mat();
  if (coupling == NoiseCoupling::Shared) {
    noise_cov.topRightCorner(n, n) = sys.sigma_w().mat();
    noise_cov.bottomLeftCorner(n, n) = sys.sigma_w().mat();
  }

  std::vector<Vector> means(N + 1);
  std::vector<SymMatrix> covs(N + 1);
  means[0] = init_mean;
  covs[0] = init_cov;
  for (Index k = 0; k < N; ++k) {
    Matrix T(2 * n, 2 * n);
    T.topLeftCorner(n, n) = sys.A() + sys.B() * law.Fx(k);
    T.topRightCorner(n, n) = sys.B() * law.Fs(k);
    T.bottomLeftCorner(n, n) = Matrix::Zero(n, n);
    T.bottomRightCorner(n, n) = pair.A_K;
    Vector drift = Vector::Zero(2 * n);
    drift.head(n) = sys.B() * law.offset(k);

    means[k + 1] = T * means[k] + drift;
    covs[k + 1] =
        SymMatrix(symmetrize(T * covs[k].mat() * T.transpose()) + noise_cov);
  }
  return MomentTrajectory(std::move(means), std::move(covs), law, pair.K,
                          coupling);
}

double trajectory_stage_cost(const QuadraticCost& cost,
                             const MomentTrajectory& traj, Index k) {
  if (k < 0 || k >= traj.horizon() + 1 || k >= traj.law().horizon())
    throw std::invalid_argument("trajectory_stage_cost: k out of range");
  const GaussianState x = traj.x_state(k);
  const Matrix sel = traj.control_selector(k);
  const Vector u_mean = sel * traj.mean(k) + traj.law().offset(k);
  const SymMatrix u_cov(symmetrize(sel * traj.cov(k).mat() * sel.transpose()));
  const Matrix cross =
      traj.cov(k).mat().topRows(traj.state_dim()) * sel.transpose();
  return stage_cost(cost, x, u_mean, u_cov, cross);
}

double trajectory_cost(const QuadraticCost& cost, const MomentTrajectory& traj,
                       Index N) {
  if (N < 0 || N > traj.horizon())
    throw std::invalid_argument("trajectory_cost: N out of range");
  double total = 0.0;
  for (Index k = 0; k < N; ++k) total += trajectory_stage_cost(cost, traj, k);
  return total;
}

}  // namespace stoclq
