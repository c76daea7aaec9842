#include "stoclq/control_law.hpp"

namespace stoclq {

AffineControlLaw::AffineControlLaw(std::vector<Matrix> Fx, std::vector<Matrix> Fs,
                                   std::vector<Vector> offset)
    : fx_(std::move(Fx)), fs_(std::move(Fs)), c_(std::move(offset)) {
  if (fx_.empty() || fx_.size() != fs_.size() || fx_.size() != c_.size())
    throw std::invalid_argument("AffineControlLaw: Fx/Fs/offset lengths must match");
  const Index l = fx_[0].rows();
  const Index n = fx_[0].cols();
  for (size_t k = 0; k < fx_.size(); ++k) {
    if (fx_[k].rows() != l || fx_[k].cols() != n || fs_[k].rows() != l ||
        fs_[k].cols() != n || c_[k].size() != l)
      throw std::invalid_argument("AffineControlLaw: inconsistent dimensions at step " +
                                  std::to_string(k));
    if (!all_finite(fx_[k]) || !all_finite(fs_[k]) || !c_[k].allFinite())
      throw std::invalid_argument("AffineControlLaw: entries must be finite");
  }
}

AffineControlLaw AffineControlLaw::steady_gain(const Matrix& K, Index horizon) {
  if (horizon < 1)
    throw std::invalid_argument("AffineControlLaw: horizon must be >= 1");
  const Matrix zero = Matrix::Zero(K.rows(), K.cols());
  const Vector zc = Vector::Zero(K.rows());
  return AffineControlLaw(std::vector<Matrix>(horizon, K),
                          std::vector<Matrix>(horizon, zero),
                          std::vector<Vector>(horizon, zc));
}

AffineControlLaw AffineControlLaw::from_schedule(const GainSchedule& sched) {
  if (sched.horizon < 1)
    throw std::invalid_argument("AffineControlLaw: schedule horizon must be >= 1");
  const Matrix& K0 = sched.K_seq.at(0);
  const Matrix zero = Matrix::Zero(K0.rows(), K0.cols());
  const Vector zc = Vector::Zero(K0.rows());
  return AffineControlLaw(sched.K_seq,
                          std::vector<Matrix>(sched.K_seq.size(), zero),
                          std::vector<Vector>(sched.K_seq.size(), zc));
}

AffineControlLaw AffineControlLaw::zero(Index control_dim, Index state_dim,
                                        Index horizon) {
  const Matrix zmat = Matrix::Zero(control_dim, state_dim);
  return AffineControlLaw(std::vector<Matrix>(horizon, zmat),
                          std::vector<Matrix>(horizon, zmat),
                          std::vector<Vector>(horizon, Vector::Zero(control_dim)));
}

Matrix AffineControlLaw::selector(Index k) const {
  const Matrix& fx = Fx(k);
  Matrix sel(fx.rows(), 2 * fx.cols());
  sel << fx, Fs(k);
  return sel;
}

AffineControlLaw AffineControlLaw::plus(const AffineControlLaw& other) const {
  if (other.horizon() != horizon() || other.state_dim() != state_dim() ||
      other.control_dim() != control_dim())
    throw std::invalid_argument("AffineControlLaw: superposition shape mismatch");
  std::vector<Matrix> fx(fx_.size()), fs(fs_.size());
  std::vector<Vector> c(c_.size());
  for (size_t k = 0; k < fx_.size(); ++k) {
    fx[k] = fx_[k] + other.fx_[k];
    fs[k] = fs_[k] + other.fs_[k];
    c[k] = c_[k] + other.c_[k];
  }
  return AffineControlLaw(std::move(fx), std::move(fs), std::move(c));
}

}  // namespace stoclq
