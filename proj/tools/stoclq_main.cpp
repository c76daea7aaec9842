// Command-line front end. Subcommands:
//   solve          DARE + stationary pair            -> riccati.json
//   certify        dissipativity certificate         -> certificate.json
//   simulate       path ensemble + cost summary      -> paths.csv, ensemble_summary.json
//   diagnose       turnpike bounds per horizon       -> turnpike_report.json, turnpike_per_k.csv, moments.csv
//   paper-example  built-in reference example, all of the above + figure1.csv
//
// Exit codes: 0 ok, 2 config/usage error, 3 certificate not found,
// 4 solver non-convergence, 5 proved bound violated numerically.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "stoclq/experiment.hpp"

namespace {

using namespace stoclq;

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  std::vector<Index> horizons;
  std::vector<double> eps, eta;
  std::uint64_t seed = 0;
  bool seed_given = false;
  Index ensemble = 0;
};

// Precedence for the seed: --seed flag, then TURNPIKE_SEED, then config file,
// then 1. Everything else: flag over config file.
void apply_overrides(ExperimentConfig& cfg, const CliOptions& opt) {
  if (opt.seed_given) {
    cfg.seed = opt.seed;
  } else if (const char* env = std::getenv("TURNPIKE_SEED")) {
    try {
      cfg.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw std::invalid_argument("TURNPIKE_SEED is not an integer");
    }
  }
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  if (!opt.horizons.empty()) cfg.horizons = opt.horizons;
  if (!opt.eps.empty()) cfg.eps = opt.eps;
  if (!opt.eta.empty()) cfg.eta = opt.eta;
  if (opt.ensemble > 0) cfg.ensemble = opt.ensemble;
  for (const Index n : cfg.horizons)
    if (n < 1) throw std::invalid_argument("horizons must be >= 1");
  for (const double e : cfg.eps)
    if (!(e > 0)) throw std::invalid_argument("eps must be > 0");
  for (const double e : cfg.eta)
    if (!(e > 0)) throw std::invalid_argument("eta must be > 0");
}

ExperimentConfig make_config(const CliOptions& opt) {
  if (opt.config_path.empty())
    throw std::invalid_argument("--config is required for this subcommand");
  ExperimentConfig cfg = load_config(opt.config_path);
  apply_overrides(cfg, opt);
  return cfg;
}

int dispatch(const std::string& cmd, const CliOptions& opt) {
  if (cmd == "solve") {
    const SolveResult res = run_solve(make_config(opt));
    std::cout << "K = " << res.sol.K << "\n"
              << "DARE iterations " << res.sol.iterations << ", residual "
              << res.sol.residual << "\n";
  } else if (cmd == "certify") {
    const CertifyResult res = run_certify(make_config(opt));
    std::cout << "gamma = " << res.cert.gamma << ", lambda_min(H) > "
              << res.cert.lambda_min_H_lower << "\n"
              << "chain residuals: " << res.residuals.hat_max << " "
              << res.residuals.bar_max << " " << res.residuals.tilde_max << "\n";
  } else if (cmd == "simulate") {
    const SimulateResult res = run_simulate(make_config(opt));
    std::cout << "paths " << res.ensemble.paths.size() << ", exact cost "
              << res.exact_cost;
    if (res.ensemble.paths.size() >= 2)
      std::cout << ", empirical " << res.empirical.mean << " +/- "
                << res.empirical.std_error;
    std::cout << "\n";
  } else if (cmd == "diagnose") {
    const DiagnoseResult res = run_diagnose(make_config(opt));
    for (const TurnpikeReport& r : res.reports) {
      std::cout << "N = " << r.N << ": delta = " << r.delta
                << ", C = " << r.offset_C;
      for (const EpsCount& e : r.eps_counts)
        std::cout << ", Q(" << e.eps << ") = " << e.q_eps << " >= " << e.bound;
      std::cout << "\n";
    }
  } else {  // paper-example
    ExperimentConfig cfg;  // defaults; no problem needed
    CliOptions with_defaults = opt;
    cfg.out_dir = opt.out_dir.empty() ? "paper_example_out" : opt.out_dir;
    with_defaults.out_dir = cfg.out_dir.string();
    apply_overrides(cfg, with_defaults);
    if (opt.horizons.empty()) cfg.horizons = {10, 20, 40};
    if (opt.eps.empty()) cfg.eps = {0.5, 1.0, 2.0, 5.0};
    if (opt.eta.empty()) cfg.eta = {0.1, 0.25, 0.5};
    if (opt.ensemble <= 0) cfg.ensemble = 10000;
    const ReferenceExampleResult res = run_reference_example(
        cfg.seed, cfg.out_dir, cfg.ensemble, cfg.horizons, cfg.eps, cfg.eta);
    std::cout << "K = " << res.solve.sol.K(0, 0) << ", P = "
              << res.solve.sol.P(0, 0) << ", Sigma_s = "
              << res.solve.pair.cov(0, 0) << "\n"
              << "gamma = " << res.cert.gamma << ", lambda_min(H) > "
              << res.cert.lambda_min_H_lower << "\n";
    for (const TurnpikeReport& r : res.reports) {
      std::cout << "N = " << r.N << ": delta = " << r.delta;
      for (const EpsCount& e : r.eps_counts)
        std::cout << ", Q(" << e.eps << ") = " << e.q_eps << " (bound "
                  << e.bound << ")";
      std::cout << "\n";
    }
    std::cout << "empirical cost " << res.empirical.mean << " +/- "
              << res.empirical.std_error << " (exact " << res.exact_cost
              << ")\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic LQ turnpike toolkit"};
  app.require_subcommand(1);

  CliOptions opt;
  for (const char* name :
       {"solve", "certify", "simulate", "diagnose", "paper-example"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config_path, "problem/config JSON file");
    sub->add_option("--seed", opt.seed, "RNG seed");
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--ensemble", opt.ensemble, "number of Monte-Carlo paths");
    sub->add_option("--horizons", opt.horizons, "horizon list")
        ->delimiter(',');
    sub->add_option("--eps", opt.eps, "epsilon list")->delimiter(',');
    sub->add_option("--eta", opt.eta, "eta list")->delimiter(',');
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  opt.seed_given = sub->count("--seed") > 0;

  using stoclq::Json;
  try {
    return dispatch(sub->get_name(), opt);
  } catch (const stoclq::CertificateNotFound& e) {
    std::cerr << Json{{"error", {{"type", "CertificateNotFound"},
                                 {"message", e.what()},
                                 {"best_margin", e.best_margin}}}}
                     .dump()
              << "\n";
    return 3;
  } catch (const stoclq::NoConvergence& e) {
    std::cerr << Json{{"error", {{"type", "NoConvergence"}, {"message", e.what()}}}}
                     .dump()
              << "\n";
    return 4;
  } catch (const stoclq::InconclusiveStability& e) {
    std::cerr << Json{{"error", {{"type", "InconclusiveStability"},
                                 {"message", e.what()}}}}
                     .dump()
              << "\n";
    return 4;
  } catch (const stoclq::BoundViolated& e) {
    std::cerr << Json{{"error", {{"type", "BoundViolated"}, {"message", e.what()}}}}
                     .dump()
              << "\n";
    return 5;
  } catch (const std::invalid_argument& e) {
    std::cerr << Json{{"error", {{"type", "ConfigError"}, {"message", e.what()}}}}
                     .dump()
              << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", {{"type", "InternalError"}, {"message", e.what()}}}}
                     .dump()
              << "\n";
    return 1;
  }
}
