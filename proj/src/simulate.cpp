#include "stoclq/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace stoclq {

namespace {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Substream seed for (parent seed, index, lane); lane separates the noise
// stream from the initial-condition stream of the same path.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index,
                                   std::uint64_t lane) {
  std::uint64_t h = splitmix64(seed ^ 0x8f1bbcdc9d02f1e5ULL);
  h = splitmix64(h ^ (index + 1) * 0xd1342543de82ef95ULL);
  return splitmix64(h ^ (lane + 1) * 0xaf251af3b0f025b5ULL);
}

}  // namespace

double standard_normal_sample(std::uint64_t seed, std::uint64_t tag,
                              std::uint64_t step, std::uint64_t component) {
  std::uint64_t h = seed;
  h = splitmix64(h ^ (tag + 1) * 0xa24baed4963ee407ULL);
  h = splitmix64(h ^ (step + 1) * 0x9fb21c651e98df25ULL);
  h = splitmix64(h ^ (component + 1) * 0xd6e8feb86659fd93ULL);
  const std::uint64_t z1 = splitmix64(h);
  const std::uint64_t z2 = splitmix64(z1);
  // u1 in (0, 1] keeps the log finite; u2 in [0, 1).
  const double u1 = static_cast<double>((z1 >> 11) + 1) * 0x1p-53;
  const double u2 = static_cast<double>(z2 >> 11) * 0x1p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

// xi ~ N(0, I) of dimension n for (seed, tag, step).
Vector standard_normal_vector(std::uint64_t seed, std::uint64_t tag,
                              std::uint64_t step, Index n) {
  Vector xi(n);
  for (Index i = 0; i < n; ++i)
    xi(i) = standard_normal_sample(seed, tag, step, static_cast<std::uint64_t>(i));
  return xi;
}

}  // namespace

NoiseRealization sample_noise(std::uint64_t seed, Index N,
                              const SymMatrix& sigma_w) {
  if (N < 0) throw std::invalid_argument("sample_noise: N must be >= 0");
  const PsdFactorResult f = cholesky_psd(sigma_w);
  if (!f.positive_semidefinite)
    throw std::invalid_argument("sample_noise: sigma_w is not PSD");
  const Index n = sigma_w.dim();
  NoiseRealization noise;
  noise.seed = seed;
  noise.horizon = N;
  noise.samples.resize(N, n);
  for (Index k = 0; k < N; ++k) {
    const Vector xi =
        standard_normal_vector(seed, 0, static_cast<std::uint64_t>(k), n);
    noise.samples.row(k) = (f.L * xi).transpose();
  }
  return noise;
}

Path simulate_pair(const LtiStochasticSystem& sys, const QuadraticCost& cost,
                   const AffineControlLaw& law, const StationaryPair& pair,
                   const GaussianState& x0, const NoiseRealization& noise,
                   std::uint64_t path_seed) {
  const Index n = sys.state_dim();
  const Index l = sys.control_dim();
  const Index N = noise.horizon;
  if (noise.samples.cols() != n)
    throw std::invalid_argument("simulate_pair: noise dimension mismatch");
  if (law.horizon() < N)
    throw std::invalid_argument("simulate_pair: law shorter than the noise");
  if (x0.mean.size() != n)
    throw std::invalid_argument("simulate_pair: x0 dimension mismatch");

  const PsdFactorResult fx0 = cholesky_psd(x0.cov);
  if (!fx0.positive_semidefinite)
    throw std::invalid_argument("simulate_pair: x0 covariance is not PSD");
  const PsdFactorResult fs = cholesky_psd(pair.cov);
  if (!fs.positive_semidefinite)
    throw std::invalid_argument("simulate_pair: stationary covariance is not PSD");

  Path path;
  path.horizon = N;
  path.x.resize(N + 1, n);
  path.xs.resize(N + 1, n);
  path.u.resize(N, l);
  path.us.resize(N, l);
  path.w = noise.samples;
  path.stage_costs.resize(N);

  path.x.row(0) =
      (x0.mean + fx0.L * standard_normal_vector(path_seed, 1, 0, n)).transpose();
  path.xs.row(0) =
      (pair.mean + fs.L * standard_normal_vector(path_seed, 2, 0, n)).transpose();

  for (Index k = 0; k < N; ++k) {
    const Vector xk = path.x.row(k).transpose();
    const Vector xsk = path.xs.row(k).transpose();
    const Vector uk = law.Fx(k) * xk + law.Fs(k) * xsk + law.offset(k);
    const Vector usk = pair.K * xsk;
    const Vector wk = noise.samples.row(k).transpose();
    path.u.row(k) = uk.transpose();
    path.us.row(k) = usk.transpose();
    path.x.row(k + 1) = (sys.A() * xk + sys.B() * uk + wk).transpose();
    path.xs.row(k + 1) = (pair.A_K * xsk + wk).transpose();
    path.stage_costs(k) =
        xk.dot(cost.Q().mat() * xk) + uk.dot(cost.R().mat() * uk);
  }
  return path;
}

PathEnsemble simulate_ensemble(const LtiStochasticSystem& sys,
                               const QuadraticCost& cost,
                               const AffineControlLaw& law,
                               const StationaryPair& pair,
                               const GaussianState& x0, Index N, Index M,
                               std::uint64_t seed) {
  if (M < 1) throw std::invalid_argument("simulate_ensemble: M must be >= 1");
  PathEnsemble ens;
  ens.horizon = N;
  ens.paths.reserve(static_cast<size_t>(M));
  for (Index i = 0; i < M; ++i) {
    const std::uint64_t idx = static_cast<std::uint64_t>(i);
    const NoiseRealization noise =
        sample_noise(derive_stream(seed, idx, 0), N, sys.sigma_w());
    ens.paths.push_back(
        simulate_pair(sys, cost, law, pair, x0, noise, derive_stream(seed, idx, 1)));
  }
  return ens;
}

EmpiricalCost empirical_cost(const PathEnsemble& ensemble) {
  const Index m = static_cast<Index>(ensemble.paths.size());
  if (m < 2)
    throw std::invalid_argument("empirical_cost: needs at least two paths");
  Vector totals(m);
  for (Index i = 0; i < m; ++i)
    totals(i) = ensemble.paths[static_cast<size_t>(i)].stage_costs.sum();
  EmpiricalCost out;
  out.mean = totals.mean();
  const double var =
      (totals.array() - out.mean).square().sum() / static_cast<double>(m - 1);
  out.std_error = std::sqrt(var / static_cast<double>(m));
  return out;
}

GapCurve overtaking_gap(const LtiStochasticSystem& sys, const QuadraticCost& cost,
                        const RiccatiSolution& sol, const StationaryPair& pair,
                        const AffineControlLaw& perturbation,
                        const GaussianState& init,
                        const std::vector<Index>& horizon_grid) {
  if (horizon_grid.empty())
    throw std::invalid_argument("overtaking_gap: empty horizon grid");
  if (!std::is_sorted(horizon_grid.begin(), horizon_grid.end()) ||
      horizon_grid.front() < 1)
    throw std::invalid_argument("overtaking_gap: grid must be ascending, >= 1");
  const Index n_max = horizon_grid.back();
  if (perturbation.horizon() < n_max)
    throw std::invalid_argument("overtaking_gap: perturbation shorter than grid");

  const AffineControlLaw base = AffineControlLaw::steady_gain(sol.K, n_max);
  const AffineControlLaw perturbed = base.plus(perturbation);
  const MomentTrajectory traj_base =
      propagate_joint_moments(sys, base, pair, init, n_max);
  const MomentTrajectory traj_pert =
      propagate_joint_moments(sys, perturbed, pair, init, n_max);

  // Degeneracy: V(k) = Gx X + Gs Xs + g evaluated on the perturbed trajectory.
  const SymMatrix id_l = SymMatrix::Identity(sys.control_dim());
  double v_total = 0.0;
  for (Index k = 0; k < n_max; ++k)
    v_total += traj_pert.quadratic(k, perturbation.selector(k),
                                   perturbation.offset(k), id_l);
  if (!(v_total > 0.0))
    throw DegeneratePerturbation(
        "overtaking_gap: perturbation has E||V(k)||^2 = 0 for every k");

  GapCurve curve;
  curve.horizons = horizon_grid;
  curve.gap.reserve(horizon_grid.size());
  double j_base = 0.0, j_pert = 0.0;
  size_t next = 0;
  for (Index k = 0; k <= n_max; ++k) {
    while (next < horizon_grid.size() && horizon_grid[next] == k) {
      curve.gap.push_back(j_pert - j_base);
      ++next;
    }
    if (k == n_max) break;
    j_base += trajectory_stage_cost(cost, traj_base, k);
    j_pert += trajectory_stage_cost(cost, traj_pert, k);
  }

  const size_t tail = std::max<size_t>(1, curve.gap.size() / 4);
  curve.tail_infimum = *std::min_element(curve.gap.end() - static_cast<long>(tail),
                                         curve.gap.end());
  if (curve.tail_infimum > 0.0) {
    curve.settle_horizon = curve.horizons.front();
    for (size_t i = 0; i < curve.gap.size(); ++i) {
      if (!(curve.gap[i] > 0.5 * curve.tail_infimum))
        curve.settle_horizon =
            (i + 1 < curve.horizons.size()) ? curve.horizons[i + 1] : -1;
    }
  }
  return curve;
}

}  // namespace stoclq
