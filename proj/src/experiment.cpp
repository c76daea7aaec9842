#include "stoclq/experiment.hpp"

#include <fstream>

namespace stoclq {

namespace {

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

const Problem& ExperimentConfig::require_problem() const {
  if (!problem.has_value())
    throw std::invalid_argument("config: no problem given");
  return *problem;
}

ExperimentConfig load_config(const std::filesystem::path& config_path) {
  std::ifstream is(config_path);
  if (!is)
    throw std::invalid_argument("config: cannot open " + config_path.string());
  Json j;
  try {
    j = Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument("config: invalid JSON: " + std::string(e.what()));
  }

  ExperimentConfig cfg;
  if (j.contains("problem")) {
    cfg.problem = problem_from_json(j["problem"]);
  } else if (j.contains("problem_file")) {
    const std::filesystem::path pf =
        config_path.parent_path() / j["problem_file"].get<std::string>();
    std::ifstream pis(pf);
    if (!pis) throw std::invalid_argument("config: cannot open " + pf.string());
    Json pj;
    try {
      pj = Json::parse(pis);
    } catch (const Json::parse_error& e) {
      throw std::invalid_argument("config: invalid problem JSON: " +
                                  std::string(e.what()));
    }
    cfg.problem = problem_from_json(pj);
  } else {
    throw std::invalid_argument("config: needs \"problem\" or \"problem_file\"");
  }

  try {
    if (j.contains("horizons")) {
      cfg.horizons.clear();
      for (const auto& n : j.at("horizons"))
        cfg.horizons.push_back(n.get<Index>());
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("ensemble")) cfg.ensemble = j.at("ensemble").get<Index>();
    if (j.contains("eps")) {
      cfg.eps.clear();
      for (const auto& e : j.at("eps")) cfg.eps.push_back(e.get<double>());
    }
    if (j.contains("eta")) {
      cfg.eta.clear();
      for (const auto& e : j.at("eta")) cfg.eta.push_back(e.get<double>());
    }
    if (j.contains("noise_coupling")) {
      const std::string c = j.at("noise_coupling").get<std::string>();
      if (c == "shared")
        cfg.coupling = NoiseCoupling::Shared;
      else if (c == "independent")
        cfg.coupling = NoiseCoupling::Independent;
      else
        throw std::invalid_argument(
            "config: noise_coupling must be \"shared\" or \"independent\"");
    }
    if (j.contains("Stilde"))
      cfg.S_tilde_override = SymMatrix(matrix_from_json(j.at("Stilde"), "Stilde"));
    if (j.contains("gamma")) cfg.gamma_override = j.at("gamma").get<double>();
    if (j.contains("out_dir"))
      cfg.out_dir = config_path.parent_path() / j.at("out_dir").get<std::string>();
  } catch (const Json::exception& e) {
    throw std::invalid_argument("config: " + std::string(e.what()));
  }

  if (cfg.horizons.empty())
    throw std::invalid_argument("config: horizons must be non-empty");
  for (const Index n : cfg.horizons)
    if (n < 1) throw std::invalid_argument("config: horizons must be >= 1");
  if (cfg.ensemble < 1)
    throw std::invalid_argument("config: ensemble must be >= 1");
  return cfg;
}

Problem reference_example_problem() {
  const Matrix a = Matrix::Constant(1, 1, 1.2);
  const Matrix b = Matrix::Constant(1, 1, 1.0);
  const SymMatrix q(Matrix::Constant(1, 1, 1.0));
  const SymMatrix r(Matrix::Constant(1, 1, 5.0));
  const SymMatrix sigma_w(Matrix::Constant(1, 1, 10.0));
  Vector mu0(1);
  mu0 << 3.0;
  const SymMatrix cov0(Matrix::Constant(1, 1, 1.5));
  return Problem{LtiStochasticSystem(a, b, sigma_w), QuadraticCost(q, r),
                 GaussianState(mu0, cov0)};
}

namespace {

Index max_horizon(const std::vector<Index>& horizons) {
  Index n = 1;
  for (const Index h : horizons) n = std::max(n, h);
  return n;
}

SolveResult solve_problem(const Problem& p) {
  SolveResult res;
  res.validation = validate(p.sys, p.cost);
  if (!res.validation.dimensions_ok)
    throw std::invalid_argument("solve: problem dimensions are inconsistent");
  if (!res.validation.stabilizable || !res.validation.detectable)
    throw NoConvergence(
        "solve: system failed the stabilizability/detectability probes");
  res.sol = solve_dare(p.sys, p.cost);
  res.pair = build_stationary_pair(p.sys, res.sol);
  return res;
}

Json solve_to_json(const SolveResult& res) {
  return Json{{"validation", validation_to_json(res.validation)},
              {"riccati", riccati_to_json(res.sol)},
              {"stationary", stationary_to_json(res.pair)}};
}

}  // namespace

SolveResult run_solve(const ExperimentConfig& cfg) {
  const Problem& p = cfg.require_problem();
  SolveResult res = solve_problem(p);
  std::filesystem::create_directories(cfg.out_dir);
  write_json_file(cfg.out_dir / "riccati.json", solve_to_json(res));
  return res;
}

CertifyResult run_certify(const ExperimentConfig& cfg) {
  const Problem& p = cfg.require_problem();
  // Search for S~ before solving: an uncertifiable problem should report
  // CertificateNotFound (exit 3) rather than whatever the solver hits first.
  const SymMatrix s_tilde = cfg.S_tilde_override.has_value()
                                ? *cfg.S_tilde_override
                                : find_Stilde(p.sys, p.cost);
  CertifyResult res{solve_problem(p), {}, {}};
  res.cert = build_certificate(p.sys, p.cost, res.solve.sol, s_tilde,
                               cfg.gamma_override);
  const Index n_max = max_horizon(cfg.horizons);
  const GainSchedule sched = riccati_backward(
      p.sys, p.cost, n_max, SymMatrix::Zero(p.sys.state_dim()));
  res.residuals = verify_dissipation_chain(
      p.sys, p.cost, res.cert, res.solve.sol, res.solve.pair,
      AffineControlLaw::from_schedule(sched), p.x0, n_max);

  std::filesystem::create_directories(cfg.out_dir);
  write_json_file(cfg.out_dir / "certificate.json",
                  Json{{"certificate", certificate_to_json(res.cert)},
                       {"chain_residuals", chain_residuals_to_json(res.residuals)}});
  return res;
}

SimulateResult run_simulate(const ExperimentConfig& cfg) {
  const Problem& p = cfg.require_problem();
  SimulateResult res{solve_problem(p), {}, {}, 0.0};
  const Index n_max = max_horizon(cfg.horizons);
  const GainSchedule sched = riccati_backward(
      p.sys, p.cost, n_max, SymMatrix::Zero(p.sys.state_dim()));
  const AffineControlLaw law = AffineControlLaw::from_schedule(sched);
  res.ensemble = simulate_ensemble(p.sys, p.cost, law, res.solve.pair, p.x0,
                                   n_max, cfg.ensemble, cfg.seed);
  if (cfg.ensemble >= 2) res.empirical = empirical_cost(res.ensemble);
  const MomentTrajectory traj =
      propagate_joint_moments(p.sys, law, res.solve.pair, p.x0, n_max, cfg.coupling);
  res.exact_cost = trajectory_cost(p.cost, traj, n_max);

  std::filesystem::create_directories(cfg.out_dir);
  // paths.csv keeps at most 100 paths; the summary uses the full ensemble.
  PathEnsemble preview;
  preview.horizon = res.ensemble.horizon;
  const size_t keep = std::min<size_t>(res.ensemble.paths.size(), 100);
  preview.paths.assign(res.ensemble.paths.begin(),
                       res.ensemble.paths.begin() + static_cast<long>(keep));
  {
    std::ofstream os(cfg.out_dir / "paths.csv", std::ios::binary);
    write_paths_csv(os, preview);
  }
  Json summary{{"M", static_cast<Index>(res.ensemble.paths.size())},
               {"N", n_max},
               {"seed", cfg.seed},
               {"exact_cost", res.exact_cost}};
  if (cfg.ensemble >= 2) {
    summary["empirical_cost_mean"] = res.empirical.mean;
    summary["empirical_cost_std_error"] = res.empirical.std_error;
  }
  write_json_file(cfg.out_dir / "ensemble_summary.json", summary);
  return res;
}

DiagnoseResult run_diagnose(const ExperimentConfig& cfg) {
  const Problem& p = cfg.require_problem();
  DiagnoseResult res{run_certify(cfg), {}};
  const SolveResult& solve = res.certify.solve;

  for (const Index n : cfg.horizons) {
    const GainSchedule sched =
        riccati_backward(p.sys, p.cost, n, SymMatrix::Zero(p.sys.state_dim()));
    const AffineControlLaw law = AffineControlLaw::from_schedule(sched);
    TurnpikeReport report = moment_turnpike(p.sys, p.cost, res.certify.cert, law,
                                            solve.pair, p.x0, n, cfg.eps);
    const PathEnsemble ens = simulate_ensemble(p.sys, p.cost, law, solve.pair,
                                               p.x0, n, cfg.ensemble, cfg.seed);
    for (const double eps : cfg.eps)
      for (const double eta : cfg.eta)
        report.prob_counts.push_back(
            probability_turnpike(report, eps, eta, res.certify.cert.H, &ens));
    res.reports.push_back(std::move(report));
  }

  std::filesystem::create_directories(cfg.out_dir);
  Json reports = Json::array();
  for (const TurnpikeReport& r : res.reports)
    reports.push_back(turnpike_to_json(r));
  write_json_file(cfg.out_dir / "turnpike_report.json",
                  Json{{"seed", cfg.seed}, {"reports", reports}});
  {
    std::ofstream os(cfg.out_dir / "turnpike_per_k.csv", std::ios::binary);
    write_turnpike_csv(os, res.reports.back());
  }
  {
    const Index n_max = max_horizon(cfg.horizons);
    const GainSchedule sched = riccati_backward(
        p.sys, p.cost, n_max, SymMatrix::Zero(p.sys.state_dim()));
    const MomentTrajectory traj = propagate_joint_moments(
        p.sys, AffineControlLaw::from_schedule(sched), solve.pair, p.x0, n_max,
        cfg.coupling);
    std::ofstream os(cfg.out_dir / "moments.csv", std::ios::binary);
    write_moments_csv(os, traj);
  }
  return res;
}

namespace {

// k, w, xs, us, then x/u per horizon, with blanks where a column is not
// defined (w and every u at the final step, x/u beyond their horizon).
void write_figure_csv(std::ostream& os, const NoiseRealization& noise,
                      const Path& xs_source, const std::vector<Index>& horizons,
                      const std::vector<Path>& paths) {
  const Index n = xs_source.x.cols();
  const Index l = xs_source.u.cols();
  const Index n_max = noise.horizon;
  auto vec_cols = [&os](const std::string& base, Index dim) {
    for (Index i = 0; i < dim; ++i) os << "," << base << "_" << i;
  };
  os << "k";
  vec_cols("w", n);
  vec_cols("xs", n);
  vec_cols("us", l);
  for (size_t h = 0; h < horizons.size(); ++h) {
    vec_cols("x_N" + std::to_string(horizons[h]), n);
    vec_cols("u_N" + std::to_string(horizons[h]), l);
  }
  os << "\n";
  for (Index k = 0; k <= n_max; ++k) {
    os << k;
    for (Index i = 0; i < n; ++i)
      os << "," << (k < n_max ? fmt_double(noise.samples(k, i)) : "");
    for (Index i = 0; i < n; ++i) os << "," << fmt_double(xs_source.xs(k, i));
    for (Index i = 0; i < l; ++i)
      os << "," << (k < n_max ? fmt_double(xs_source.us(k, i)) : "");
    for (size_t h = 0; h < horizons.size(); ++h) {
      const Path& path = paths[h];
      for (Index i = 0; i < n; ++i)
        os << "," << (k <= path.horizon ? fmt_double(path.x(k, i)) : "");
      for (Index i = 0; i < l; ++i)
        os << "," << (k < path.horizon ? fmt_double(path.u(k, i)) : "");
    }
    os << "\n";
  }
}

}  // namespace

ReferenceExampleResult run_reference_example(
    std::uint64_t seed, const std::optional<std::filesystem::path>& out_dir,
    Index ensemble, std::vector<Index> horizons, std::vector<double> eps,
    std::vector<double> eta) {
  const Problem p = reference_example_problem();
  ReferenceExampleResult res;
  res.solve = solve_problem(p);
  res.cert = build_certificate(p.sys, p.cost, res.solve.sol);

  const Index n_max = max_horizon(horizons);
  const GainSchedule sched_max =
      riccati_backward(p.sys, p.cost, n_max, SymMatrix::Zero(p.sys.state_dim()));
  res.residuals = verify_dissipation_chain(
      p.sys, p.cost, res.cert, res.solve.sol, res.solve.pair,
      AffineControlLaw::from_schedule(sched_max), p.x0, n_max);

  // One shared noise realization and one initial draw reused by every horizon:
  // the stationary path is then identical across horizons and the states are
  // comparable pointwise.
  const NoiseRealization noise = sample_noise(seed, n_max, p.sys.sigma_w());
  std::vector<Path> figure_paths;
  size_t longest = 0;
  for (const Index n : horizons) {
    const GainSchedule sched =
        riccati_backward(p.sys, p.cost, n, SymMatrix::Zero(p.sys.state_dim()));
    const AffineControlLaw law = AffineControlLaw::from_schedule(sched);

    TurnpikeReport report =
        moment_turnpike(p.sys, p.cost, res.cert, law, res.solve.pair, p.x0, n, eps);
    const PathEnsemble horizon_ens = simulate_ensemble(
        p.sys, p.cost, law, res.solve.pair, p.x0, n, ensemble, seed);
    for (const double e : eps)
      for (const double h : eta)
        report.prob_counts.push_back(
            probability_turnpike(report, e, h, res.cert.H, &horizon_ens));
    res.reports.push_back(std::move(report));

    NoiseRealization trunc;
    trunc.seed = noise.seed;
    trunc.horizon = n;
    trunc.samples = noise.samples.topRows(n);
    const Path path =
        simulate_pair(p.sys, p.cost, law, res.solve.pair, p.x0, trunc, seed);
    res.figure.push_back(figure1_metrics(path));
    figure_paths.push_back(path);

    if (n == n_max) {
      longest = figure_paths.size() - 1;
      res.empirical = empirical_cost(horizon_ens);
      const MomentTrajectory traj =
          propagate_joint_moments(p.sys, law, res.solve.pair, p.x0, n);
      res.exact_cost = trajectory_cost(p.cost, traj, n);
    }
  }

  // Gap curve for an impulse of 0.5 on the control at k = 0.
  const Index l = p.sys.control_dim();
  std::vector<Matrix> fx(n_max, Matrix::Zero(l, p.sys.state_dim()));
  std::vector<Vector> c(n_max, Vector::Zero(l));
  c[0](0) = 0.5;
  const AffineControlLaw impulse(fx, fx, std::move(c));
  std::vector<Index> grid;
  for (Index k = 2; k <= n_max; k += 2) grid.push_back(k);
  res.gap = overtaking_gap(p.sys, p.cost, res.solve.sol, res.solve.pair, impulse,
                           p.x0, grid);

  if (out_dir.has_value()) {
    std::filesystem::create_directories(*out_dir);
    write_json_file(*out_dir / "problem.json", problem_to_json(p));
    write_json_file(*out_dir / "riccati.json", solve_to_json(res.solve));
    write_json_file(
        *out_dir / "certificate.json",
        Json{{"certificate", certificate_to_json(res.cert)},
             {"chain_residuals", chain_residuals_to_json(res.residuals)}});
    Json reports = Json::array();
    for (const TurnpikeReport& r : res.reports)
      reports.push_back(turnpike_to_json(r));
    Json figure = Json::array();
    for (const MidHorizonProximity& m : res.figure)
      figure.push_back(Json{{"N", m.N},
                            {"mid_max", m.mid_max},
                            {"boundary_max", m.boundary_max},
                            {"terminal_dev", m.terminal_dev}});
    write_json_file(*out_dir / "turnpike_report.json",
                    Json{{"seed", seed},
                         {"reports", reports},
                         {"figure_metrics", figure},
                         {"empirical_cost_mean", res.empirical.mean},
                         {"empirical_cost_std_error", res.empirical.std_error},
                         {"exact_cost", res.exact_cost},
                         {"gap_curve", gap_curve_to_json(res.gap)}});
    {
      std::ofstream os(*out_dir / "turnpike_per_k.csv", std::ios::binary);
      write_turnpike_csv(os, res.reports.back());
    }
    {
      std::ofstream os(*out_dir / "figure1.csv", std::ios::binary);
      write_figure_csv(os, noise, figure_paths[longest], horizons, figure_paths);
    }
  }
  return res;
}

}  // namespace stoclq
