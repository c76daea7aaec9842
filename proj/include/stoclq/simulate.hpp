#pragma once

#include <cstdint>
#include <vector>

#include "stoclq/stationary.hpp"

namespace stoclq {

// One standard normal per index, reproducibly: SplitMix64 mixes
// (seed, tag, step, component) into a counter-mode stream and Box-Muller turns
// it into N(0,1) (cosine branch only, the sine twin is discarded). Tags:
// 0 = process noise, 1 = initial state, 2 = initial stationary state.
double standard_normal_sample(std::uint64_t seed, std::uint64_t tag,
                              std::uint64_t step, std::uint64_t component);

// A noise realization w(0..N-1) with w(k) ~ N(0, sigma_w), correlated through
// the clamped Cholesky factor of sigma_w. Pure function of (seed, N, sigma_w).
struct NoiseRealization {
  std::uint64_t seed = 0;
  Index horizon = 0;
  Matrix samples;  // N x n, row k = w(k)^T
};
NoiseRealization sample_noise(std::uint64_t seed, Index N,
                              const SymMatrix& sigma_w);

// One realized trajectory of the pair (X, Xs) under shared noise:
//   X(k+1)  = A X(k) + B U(k) + w(k),   U = Fx X + Fs Xs + c,
//   Xs(k+1) = A_K Xs(k) + w(k),         Us = K Xs.
// States are stored one row per step (rows 0..N), controls rows 0..N-1.
struct Path {
  Index horizon = 0;
  Matrix x, xs;  // (N+1) x n
  Matrix u, us;  // N x l
  Matrix w;      // N x n (copy of the driving noise)
  Vector stage_costs;  // realized x^T Q x + u^T R u, length N
};
Path simulate_pair(const LtiStochasticSystem& sys, const QuadraticCost& cost,
                   const AffineControlLaw& law, const StationaryPair& pair,
                   const GaussianState& x0, const NoiseRealization& noise,
                   std::uint64_t path_seed);

// M independent paths with per-path substreams derived from (seed, path
// index); each path is a pure function of its own substream, so the ensemble
// is reproducible and embarrassingly parallel.
struct PathEnsemble {
  Index horizon = 0;
  std::vector<Path> paths;
};
PathEnsemble simulate_ensemble(const LtiStochasticSystem& sys,
                               const QuadraticCost& cost,
                               const AffineControlLaw& law,
                               const StationaryPair& pair,
                               const GaussianState& x0, Index N, Index M,
                               std::uint64_t seed);

// Sample mean and standard error of the realized total cost; requires at
// least two paths.
struct EmpiricalCost {
  double mean = 0.0;
  double std_error = 0.0;
};
EmpiricalCost empirical_cost(const PathEnsemble& ensemble);

// Gap curve Delta(N) = J_N(steady gain + perturbation) - J_N(steady gain),
// evaluated from exact moments on a horizon grid. The tail is the last
// quarter of the grid (at least one point); settle_horizon is the first grid
// point from which Delta stays above half the tail infimum (-1 if the tail
// infimum is not positive). Throws DegeneratePerturbation when the
// perturbation has E||V(k)||^2 = 0 for every k.
struct GapCurve {
  std::vector<Index> horizons;
  std::vector<double> gap;
  double tail_infimum = 0.0;
  Index settle_horizon = -1;
};
GapCurve overtaking_gap(const LtiStochasticSystem& sys, const QuadraticCost& cost,
                        const RiccatiSolution& sol, const StationaryPair& pair,
                        const AffineControlLaw& perturbation,
                        const GaussianState& init,
                        const std::vector<Index>& horizon_grid);

}  // namespace stoclq
