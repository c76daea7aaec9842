// pybind11 bindings for the main operations. Matrices cross the boundary as
// numpy arrays (Eigen converters); SymMatrix is constructed from plain arrays
// on the way in and returned as arrays on the way out.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "stoclq/experiment.hpp"

namespace py = pybind11;
using namespace stoclq;

namespace {

SymMatrix sym(const Matrix& m) { return SymMatrix(m); }

AffineControlLaw make_law(const std::vector<Matrix>& fx,
                          const std::vector<Matrix>& fs,
                          const std::vector<Vector>& c) {
  return AffineControlLaw(fx, fs, c);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "stochastic LQ turnpike toolkit";

  py::register_exception<NoConvergence>(m, "NoConvergence");
  py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefinite");
  py::register_exception<InconclusiveStability>(m, "InconclusiveStability");
  py::register_exception<CertificateNotFound>(m, "CertificateNotFound");
  py::register_exception<BoundViolated>(m, "BoundViolated");
  py::register_exception<DegeneratePerturbation>(m, "DegeneratePerturbation");

  py::class_<LtiStochasticSystem>(m, "LtiStochasticSystem")
      .def(py::init([](const Matrix& a, const Matrix& b, const Matrix& sw) {
             return LtiStochasticSystem(a, b, sym(sw));
           }),
           py::arg("A"), py::arg("B"), py::arg("Sigma_W"))
      .def_property_readonly("A", &LtiStochasticSystem::A)
      .def_property_readonly("B", &LtiStochasticSystem::B)
      .def_property_readonly(
          "Sigma_W", [](const LtiStochasticSystem& s) { return s.sigma_w().mat(); })
      .def_property_readonly("state_dim", &LtiStochasticSystem::state_dim)
      .def_property_readonly("control_dim", &LtiStochasticSystem::control_dim);

  py::class_<QuadraticCost>(m, "QuadraticCost")
      .def(py::init([](const Matrix& q, const Matrix& r) {
             return QuadraticCost(sym(q), sym(r));
           }),
           py::arg("Q"), py::arg("R"))
      .def_property_readonly("Q",
                             [](const QuadraticCost& c) { return c.Q().mat(); })
      .def_property_readonly("R",
                             [](const QuadraticCost& c) { return c.R().mat(); });

  py::class_<GaussianState>(m, "GaussianState")
      .def(py::init([](const Vector& mean, const Matrix& cov) {
             return GaussianState(mean, sym(cov));
           }),
           py::arg("mean"), py::arg("cov"))
      .def_readonly("mean", &GaussianState::mean)
      .def_property_readonly("cov",
                             [](const GaussianState& s) { return s.cov.mat(); });

  py::class_<ValidationReport>(m, "ValidationReport")
      .def_readonly("dimensions_ok", &ValidationReport::dimensions_ok)
      .def_readonly("stabilizable", &ValidationReport::stabilizable)
      .def_readonly("detectable", &ValidationReport::detectable)
      .def_readonly("proxy_probes", &ValidationReport::proxy_probes)
      .def("ok", &ValidationReport::ok);

  py::class_<RiccatiSolution>(m, "RiccatiSolution")
      .def_property_readonly("P",
                             [](const RiccatiSolution& s) { return s.P.mat(); })
      .def_readonly("K", &RiccatiSolution::K)
      .def_property_readonly(
          "Rtilde", [](const RiccatiSolution& s) { return s.Rtilde.mat(); })
      .def_readonly("iterations", &RiccatiSolution::iterations)
      .def_readonly("residual", &RiccatiSolution::residual);

  py::class_<GainSchedule>(m, "GainSchedule")
      .def_readonly("horizon", &GainSchedule::horizon)
      .def_property_readonly("P_seq",
                             [](const GainSchedule& g) {
                               std::vector<Matrix> out;
                               for (const auto& p : g.P_seq)
                                 out.push_back(p.mat());
                               return out;
                             })
      .def_readonly("K_seq", &GainSchedule::K_seq);

  py::class_<StationaryPair>(m, "StationaryPair")
      .def_readonly("K", &StationaryPair::K)
      .def_readonly("mean", &StationaryPair::mean)
      .def_property_readonly(
          "Sigma_s", [](const StationaryPair& p) { return p.cov.mat(); })
      .def_readonly("A_K", &StationaryPair::A_K);

  py::class_<AffineControlLaw>(m, "AffineControlLaw")
      .def(py::init(&make_law), py::arg("Fx"), py::arg("Fs"), py::arg("offset"))
      .def_static("steady_gain", &AffineControlLaw::steady_gain, py::arg("K"),
                  py::arg("horizon"))
      .def_static("from_schedule", &AffineControlLaw::from_schedule)
      .def_property_readonly("horizon", &AffineControlLaw::horizon)
      .def("plus", &AffineControlLaw::plus);

  py::enum_<NoiseCoupling>(m, "NoiseCoupling")
      .value("Shared", NoiseCoupling::Shared)
      .value("Independent", NoiseCoupling::Independent);

  py::class_<MomentTrajectory>(m, "MomentTrajectory")
      .def_property_readonly("horizon", &MomentTrajectory::horizon)
      .def("mean", &MomentTrajectory::mean, py::arg("k"))
      .def("cov",
           [](const MomentTrajectory& t, Index k) { return t.cov(k).mat(); },
           py::arg("k"));

  py::class_<DissipativityCertificate>(m, "DissipativityCertificate")
      .def_property_readonly(
          "P", [](const DissipativityCertificate& c) { return c.P.mat(); })
      .def_property_readonly(
          "S_tilde",
          [](const DissipativityCertificate& c) { return c.S_tilde.mat(); })
      .def_readonly("gamma", &DissipativityCertificate::gamma)
      .def_property_readonly(
          "S", [](const DissipativityCertificate& c) { return c.S.mat(); })
      .def_property_readonly(
          "H", [](const DissipativityCertificate& c) { return c.H.mat(); })
      .def_readonly("lambda_min_H_lower",
                    &DissipativityCertificate::lambda_min_H_lower);

  py::class_<ChainResiduals>(m, "ChainResiduals")
      .def_readonly("hat_max", &ChainResiduals::hat_max)
      .def_readonly("bar_max", &ChainResiduals::bar_max)
      .def_readonly("tilde_max", &ChainResiduals::tilde_max)
      .def_readonly("scale", &ChainResiduals::scale);

  py::class_<NoiseRealization>(m, "NoiseRealization")
      .def_readonly("seed", &NoiseRealization::seed)
      .def_readonly("horizon", &NoiseRealization::horizon)
      .def_readonly("samples", &NoiseRealization::samples);

  py::class_<Path>(m, "Path")
      .def_readonly("horizon", &Path::horizon)
      .def_readonly("x", &Path::x)
      .def_readonly("xs", &Path::xs)
      .def_readonly("u", &Path::u)
      .def_readonly("us", &Path::us)
      .def_readonly("w", &Path::w)
      .def_readonly("stage_costs", &Path::stage_costs);

  py::class_<PathEnsemble>(m, "PathEnsemble")
      .def_readonly("horizon", &PathEnsemble::horizon)
      .def_readonly("paths", &PathEnsemble::paths);

  py::class_<EmpiricalCost>(m, "EmpiricalCost")
      .def_readonly("mean", &EmpiricalCost::mean)
      .def_readonly("std_error", &EmpiricalCost::std_error);

  py::class_<EpsCount>(m, "EpsCount")
      .def_readonly("eps", &EpsCount::eps)
      .def_readonly("q_eps", &EpsCount::q_eps)
      .def_readonly("bound", &EpsCount::bound)
      .def_readonly("slack", &EpsCount::slack);

  py::class_<ProbCount>(m, "ProbCount")
      .def_readonly("eps", &ProbCount::eps)
      .def_readonly("eta", &ProbCount::eta)
      .def_readonly("exact_count", &ProbCount::exact_count)
      .def_readonly("bound", &ProbCount::bound)
      .def_readonly("slack", &ProbCount::slack)
      .def_readonly("has_empirical", &ProbCount::has_empirical)
      .def_readonly("empirical_count", &ProbCount::empirical_count)
      .def_readonly("exceedance_freq", &ProbCount::exceedance_freq);

  py::class_<TurnpikeReport>(m, "TurnpikeReport")
      .def_readonly("N", &TurnpikeReport::N)
      .def_readonly("moment_values", &TurnpikeReport::moment_values)
      .def_readonly("cost", &TurnpikeReport::cost)
      .def_readonly("stationary_cost", &TurnpikeReport::stationary_cost)
      .def_readonly("delta", &TurnpikeReport::delta)
      .def_readonly("C", &TurnpikeReport::offset_C)
      .def_readonly("lower_bound_M", &TurnpikeReport::lower_bound)
      .def_readonly("eps_counts", &TurnpikeReport::eps_counts)
      .def_readonly("prob_counts", &TurnpikeReport::prob_counts);

  py::class_<GapCurve>(m, "GapCurve")
      .def_readonly("horizons", &GapCurve::horizons)
      .def_readonly("gap", &GapCurve::gap)
      .def_readonly("tail_infimum", &GapCurve::tail_infimum)
      .def_readonly("settle_horizon", &GapCurve::settle_horizon);

  py::class_<MidHorizonProximity>(m, "MidHorizonProximity")
      .def_readonly("N", &MidHorizonProximity::N)
      .def_readonly("mid_max", &MidHorizonProximity::mid_max)
      .def_readonly("boundary_max", &MidHorizonProximity::boundary_max)
      .def_readonly("terminal_dev", &MidHorizonProximity::terminal_dev);

  m.def("validate", &validate, py::arg("sys"), py::arg("cost"));
  m.def("stage_cost",
        [](const QuadraticCost& cost, const GaussianState& state,
           const Vector& u_mean, const Matrix& u_cov, const Matrix& cross) {
          return stage_cost(cost, state, u_mean, sym(u_cov), cross);
        },
        py::arg("cost"), py::arg("state"), py::arg("ctrl_mean"),
        py::arg("ctrl_cov"), py::arg("cross_cov"));
  m.def("riccati_backward",
        [](const LtiStochasticSystem& sys, const QuadraticCost& cost, Index N,
           const Matrix& terminal) {
          return riccati_backward(sys, cost, N, sym(terminal));
        },
        py::arg("sys"), py::arg("cost"), py::arg("N"), py::arg("terminal"));
  m.def("solve_dare", &solve_dare, py::arg("sys"), py::arg("cost"));
  m.def("solve_lyapunov",
        [](const Matrix& a_k, const Matrix& sigma_w) {
          return solve_lyapunov(a_k, sym(sigma_w)).mat();
        },
        py::arg("A_K"), py::arg("Sigma_W"));
  m.def("build_stationary_pair", &build_stationary_pair, py::arg("sys"),
        py::arg("sol"));
  m.def("propagate_joint_moments",
        [](const LtiStochasticSystem& sys, const AffineControlLaw& law,
           const StationaryPair& pair, const GaussianState& init, Index N,
           NoiseCoupling coupling) {
          return propagate_joint_moments(sys, law, pair, init, N, coupling);
        },
        py::arg("sys"), py::arg("law"), py::arg("pair"), py::arg("init"),
        py::arg("N"), py::arg("coupling") = NoiseCoupling::Shared);
  m.def("trajectory_cost", &trajectory_cost, py::arg("cost"), py::arg("traj"),
        py::arg("N"));
  m.def("find_Stilde",
        [](const LtiStochasticSystem& sys, const QuadraticCost& cost) {
          return find_Stilde(sys, cost).mat();
        },
        py::arg("sys"), py::arg("cost"));
  m.def("assemble_H",
        [](const LtiStochasticSystem& sys, const QuadraticCost& cost,
           const Matrix& s_tilde, double gamma) {
          return assemble_H(sys, cost, sym(s_tilde), gamma).mat();
        },
        py::arg("sys"), py::arg("cost"), py::arg("S_tilde"), py::arg("gamma"));
  m.def("build_certificate",
        [](const LtiStochasticSystem& sys, const QuadraticCost& cost,
           const RiccatiSolution& sol, const std::optional<Matrix>& s_tilde,
           const std::optional<double>& gamma) {
          std::optional<SymMatrix> st;
          if (s_tilde.has_value()) st = sym(*s_tilde);
          return build_certificate(sys, cost, sol, st, gamma);
        },
        py::arg("sys"), py::arg("cost"), py::arg("sol"),
        py::arg("S_tilde") = std::nullopt, py::arg("gamma") = std::nullopt);
  m.def("lower_bound_M",
        [](const Matrix& p, const Matrix& s, const Matrix& cov) {
          return lower_bound_M(sym(p), sym(s), sym(cov));
        },
        py::arg("P"), py::arg("S"), py::arg("stationary_cov"));
  m.def("verify_dissipation_chain", &verify_dissipation_chain, py::arg("sys"),
        py::arg("cost"), py::arg("cert"), py::arg("sol"), py::arg("pair"),
        py::arg("law"), py::arg("init"), py::arg("N"));
  m.def("sample_noise",
        [](std::uint64_t seed, Index N, const Matrix& sigma_w) {
          return sample_noise(seed, N, sym(sigma_w));
        },
        py::arg("seed"), py::arg("N"), py::arg("Sigma_W"));
  m.def("simulate_pair", &simulate_pair, py::arg("sys"), py::arg("cost"),
        py::arg("law"), py::arg("pair"), py::arg("x0"), py::arg("noise"),
        py::arg("path_seed"));
  m.def("simulate_ensemble", &simulate_ensemble, py::arg("sys"), py::arg("cost"),
        py::arg("law"), py::arg("pair"), py::arg("x0"), py::arg("N"),
        py::arg("M"), py::arg("seed"));
  m.def("empirical_cost", &empirical_cost, py::arg("ensemble"));
  m.def("overtaking_gap", &overtaking_gap, py::arg("sys"), py::arg("cost"),
        py::arg("sol"), py::arg("pair"), py::arg("perturbation"),
        py::arg("init"), py::arg("horizon_grid"));
  m.def("moment_turnpike", &moment_turnpike, py::arg("sys"), py::arg("cost"),
        py::arg("cert"), py::arg("law"), py::arg("pair"), py::arg("init"),
        py::arg("N"), py::arg("eps_list"));
  m.def("probability_turnpike",
        [](const TurnpikeReport& report, double eps, double eta,
           const Matrix& h, const PathEnsemble* ens) {
          return probability_turnpike(report, eps, eta, sym(h), ens);
        },
        py::arg("report"), py::arg("eps"), py::arg("eta"), py::arg("H"),
        py::arg("ensemble") = nullptr);
  m.def("figure1_metrics", &figure1_metrics, py::arg("path"));
  m.def("spectral_radius_estimate", &spectral_radius_estimate, py::arg("m"));
  m.def("standard_normal_sample", &standard_normal_sample, py::arg("seed"),
        py::arg("tag"), py::arg("step"), py::arg("component"));
  m.def("reference_example_problem", []() {
    const Problem p = reference_example_problem();
    return py::make_tuple(p.sys, p.cost, p.x0);
  });
  m.def("run_reference_example",
        [](std::uint64_t seed, const std::optional<std::filesystem::path>& out,
           Index ensemble) {
          return run_reference_example(seed, out, ensemble);
        },
        py::arg("seed") = 1, py::arg("out_dir") = std::nullopt,
        py::arg("ensemble") = 2000);

  py::class_<SolveResult>(m, "SolveResult")
      .def_readonly("validation", &SolveResult::validation)
      .def_readonly("sol", &SolveResult::sol)
      .def_readonly("pair", &SolveResult::pair);

  py::class_<ReferenceExampleResult>(m, "ReferenceExampleResult")
      .def_readonly("solve", &ReferenceExampleResult::solve)
      .def_readonly("cert", &ReferenceExampleResult::cert)
      .def_readonly("residuals", &ReferenceExampleResult::residuals)
      .def_readonly("reports", &ReferenceExampleResult::reports)
      .def_readonly("figure", &ReferenceExampleResult::figure)
      .def_readonly("empirical", &ReferenceExampleResult::empirical)
      .def_readonly("exact_cost", &ReferenceExampleResult::exact_cost)
      .def_readonly("gap", &ReferenceExampleResult::gap);
}
