#pragma once

#include <vector>

#include "stoclq/riccati.hpp"

namespace stoclq {

// Control laws affine in the augmented state Z(k) = (X(k), Xs(k)):
//   U(k) = Fx(k) X(k) + Fs(k) Xs(k) + c(k),  k = 0..horizon-1.
// This covers finite-horizon gain schedules (Fs = 0, c = 0), the steady
// stationary gain, and every perturbation the gap/turnpike diagnostics need.
class AffineControlLaw {
 public:
  AffineControlLaw(std::vector<Matrix> Fx, std::vector<Matrix> Fs,
                   std::vector<Vector> offset);

  static AffineControlLaw steady_gain(const Matrix& K, Index horizon);
  static AffineControlLaw from_schedule(const GainSchedule& sched);
  // U = Fx X + Fs Xs + c with all three identically zero (size from K template
  // dims is not available, so dims are explicit).
  static AffineControlLaw zero(Index control_dim, Index state_dim, Index horizon);

  Index horizon() const { return static_cast<Index>(fx_.size()); }
  Index state_dim() const { return fx_.empty() ? 0 : fx_[0].cols(); }
  Index control_dim() const { return fx_.empty() ? 0 : fx_[0].rows(); }

  const Matrix& Fx(Index k) const { return fx_.at(static_cast<size_t>(k)); }
  const Matrix& Fs(Index k) const { return fs_.at(static_cast<size_t>(k)); }
  const Vector& offset(Index k) const { return c_.at(static_cast<size_t>(k)); }

  // [Fx(k) Fs(k)], so that U(k) = selector(k) Z(k) + offset(k).
  Matrix selector(Index k) const;

  // Superposition: (this + other) applied to the same state.
  AffineControlLaw plus(const AffineControlLaw& other) const;

 private:
  std::vector<Matrix> fx_, fs_;
  std::vector<Vector> c_;
};

}  // namespace stoclq
