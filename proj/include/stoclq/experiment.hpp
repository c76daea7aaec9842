#pragma once

#include <filesystem>
#include <optional>

#include "stoclq/json_io.hpp"

// Orchestration for the CLI subcommands. Everything here is deterministic in
// (config, seed): rerunning a command writes byte-identical files.

namespace stoclq {

struct ExperimentConfig {
  std::optional<Problem> problem;
  std::vector<Index> horizons{20};
  std::uint64_t seed = 1;
  Index ensemble = 1000;
  std::vector<double> eps{1.0};
  std::vector<double> eta{0.25};
  NoiseCoupling coupling = NoiseCoupling::Shared;
  std::optional<SymMatrix> S_tilde_override;
  std::optional<double> gamma_override;
  std::filesystem::path out_dir = ".";

  const Problem& require_problem() const;
};

// Reads a config JSON; `problem` may be inline or a `problem_file` path
// resolved relative to the config file. Throws std::invalid_argument on
// schema violations.
ExperimentConfig load_config(const std::filesystem::path& config_path);

// The running example: A = 1.2, B = 1, Q = 1, R = 5, Sigma_W = 10,
// X(0) ~ N(3, 1.5).
Problem reference_example_problem();

struct SolveResult {
  ValidationReport validation;
  RiccatiSolution sol;
  StationaryPair pair;
};
SolveResult run_solve(const ExperimentConfig& cfg);

struct CertifyResult {
  SolveResult solve;
  DissipativityCertificate cert;
  ChainResiduals residuals;
};
CertifyResult run_certify(const ExperimentConfig& cfg);

struct SimulateResult {
  SolveResult solve;
  PathEnsemble ensemble;
  EmpiricalCost empirical;
  double exact_cost = 0.0;
};
SimulateResult run_simulate(const ExperimentConfig& cfg);

struct DiagnoseResult {
  CertifyResult certify;
  std::vector<TurnpikeReport> reports;  // one per horizon
};
DiagnoseResult run_diagnose(const ExperimentConfig& cfg);

// Full pipeline on the reference example: solve, certify, turnpike diagnosis
// across the horizons, a single shared noise realization simulated under each
// horizon's optimal gains (figure data), an ensemble at the largest horizon,
// and one impulse-perturbation gap curve. Files are written only when out_dir
// is given.
struct ReferenceExampleResult {
  SolveResult solve;
  DissipativityCertificate cert;
  ChainResiduals residuals;
  std::vector<TurnpikeReport> reports;
  std::vector<MidHorizonProximity> figure;
  EmpiricalCost empirical;
  double exact_cost = 0.0;
  GapCurve gap;
};
ReferenceExampleResult run_reference_example(
    std::uint64_t seed, const std::optional<std::filesystem::path>& out_dir,
    Index ensemble = 10000, std::vector<Index> horizons = {10, 20, 40},
    std::vector<double> eps = {0.5, 1.0, 2.0, 5.0},
    std::vector<double> eta = {0.1, 0.25, 0.5});

}  // namespace stoclq
