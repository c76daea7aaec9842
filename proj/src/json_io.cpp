#include "stoclq/json_io.hpp"

#include <cstdio>
#include <ostream>

namespace stoclq {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_to_json(const Vector& v) {
  Json arr = Json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Matrix matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument(what + ": expected a non-empty array of rows");
  const size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty())
    throw std::invalid_argument(what + ": rows must be non-empty arrays");
  const size_t cols = j[0].size();
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw std::invalid_argument(what + ": ragged rows");
    for (size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number())
        throw std::invalid_argument(what + ": entries must be numbers");
      m(static_cast<Index>(i), static_cast<Index>(k)) = j[i][k].get<double>();
    }
  }
  if (!all_finite(m))
    throw std::invalid_argument(what + ": entries must be finite");
  return m;
}

Vector vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array())
    throw std::invalid_argument(what + ": expected an array");
  Vector v(static_cast<Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw std::invalid_argument(what + ": entries must be numbers");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  if (!v.allFinite())
    throw std::invalid_argument(what + ": entries must be finite");
  return v;
}

namespace {

SymMatrix sym_from_json(const Json& j, const std::string& what) {
  try {
    return SymMatrix(matrix_from_json(j, what));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(what + ": " + e.what());
  }
}

}  // namespace

Problem problem_from_json(const Json& j) {
  for (const char* key :
       {"A", "B", "Q", "R", "Sigma_W", "x0_mean", "x0_cov"}) {
    if (!j.contains(key))
      throw std::invalid_argument(std::string("problem: missing key \"") + key +
                                  "\"");
  }
  const Matrix a = matrix_from_json(j["A"], "A");
  const Matrix b = matrix_from_json(j["B"], "B");
  LtiStochasticSystem sys(a, b, sym_from_json(j["Sigma_W"], "Sigma_W"));
  QuadraticCost cost(sym_from_json(j["Q"], "Q"), sym_from_json(j["R"], "R"));
  GaussianState x0(vector_from_json(j["x0_mean"], "x0_mean"),
                   sym_from_json(j["x0_cov"], "x0_cov"));
  if (cost.Q().dim() != sys.state_dim() || cost.R().dim() != sys.control_dim())
    throw std::invalid_argument("problem: Q/R dimensions do not match A/B");
  if (x0.mean.size() != sys.state_dim())
    throw std::invalid_argument("problem: x0 dimension does not match A");
  return Problem{std::move(sys), std::move(cost), std::move(x0)};
}

Json problem_to_json(const Problem& p) {
  return Json{{"A", matrix_to_json(p.sys.A())},
              {"B", matrix_to_json(p.sys.B())},
              {"Q", matrix_to_json(p.cost.Q().mat())},
              {"R", matrix_to_json(p.cost.R().mat())},
              {"Sigma_W", matrix_to_json(p.sys.sigma_w().mat())},
              {"x0_mean", vector_to_json(p.x0.mean)},
              {"x0_cov", matrix_to_json(p.x0.cov.mat())}};
}

Json validation_to_json(const ValidationReport& report) {
  return Json{{"dimensions_ok", report.dimensions_ok},
              {"stabilizable", report.stabilizable},
              {"detectable", report.detectable},
              {"stabilizable_iterations", report.stabilizable_iterations},
              {"detectable_iterations", report.detectable_iterations},
              {"proxy_probes", report.proxy_probes}};
}

Json riccati_to_json(const RiccatiSolution& sol) {
  return Json{{"P", matrix_to_json(sol.P.mat())},
              {"K", matrix_to_json(sol.K)},
              {"Rtilde", matrix_to_json(sol.Rtilde.mat())},
              {"iterations", sol.iterations},
              {"residual", sol.residual}};
}

Json stationary_to_json(const StationaryPair& pair) {
  return Json{{"K", matrix_to_json(pair.K)},
              {"mean", vector_to_json(pair.mean)},
              {"Sigma_s", matrix_to_json(pair.cov.mat())},
              {"A_K", matrix_to_json(pair.A_K)}};
}

Json certificate_to_json(const DissipativityCertificate& cert) {
  return Json{{"P", matrix_to_json(cert.P.mat())},
              {"S_tilde", matrix_to_json(cert.S_tilde.mat())},
              {"gamma", cert.gamma},
              {"S", matrix_to_json(cert.S.mat())},
              {"Q_gamma", matrix_to_json(cert.Q_gamma.mat())},
              {"R_gamma", matrix_to_json(cert.R_gamma.mat())},
              {"H", matrix_to_json(cert.H.mat())},
              {"lambda_min_H_lower", cert.lambda_min_H_lower}};
}

Json chain_residuals_to_json(const ChainResiduals& res) {
  return Json{{"lambda_hat_max_residual", res.hat_max},
              {"lambda_bar_max_residual", res.bar_max},
              {"lambda_tilde_max_residual", res.tilde_max},
              {"scale", res.scale}};
}

Json turnpike_to_json(const TurnpikeReport& report) {
  Json eps_entries = Json::array();
  for (const EpsCount& e : report.eps_counts)
    eps_entries.push_back(Json{{"eps", e.eps},
                               {"Q_eps", e.q_eps},
                               {"bound", e.bound},
                               {"slack", e.slack}});
  Json prob_entries = Json::array();
  for (const ProbCount& p : report.prob_counts) {
    Json entry{{"eps", p.eps},
               {"eta", p.eta},
               {"exact_count", p.exact_count},
               {"bound", p.bound},
               {"slack", p.slack}};
    if (p.has_empirical) entry["empirical_count"] = p.empirical_count;
    prob_entries.push_back(std::move(entry));
  }
  return Json{{"N", report.N},
              {"moment_values", report.moment_values},
              {"cost", report.cost},
              {"stationary_cost", report.stationary_cost},
              {"delta", report.delta},
              {"storage_initial", report.storage_initial},
              {"lower_bound_M", report.lower_bound},
              {"C", report.offset_C},
              {"moment_bounds", eps_entries},
              {"probability_bounds", prob_entries}};
}

Json gap_curve_to_json(const GapCurve& curve) {
  Json horizons = Json::array();
  for (const Index n : curve.horizons) horizons.push_back(n);
  return Json{{"horizons", horizons},
              {"gap", curve.gap},
              {"tail_infimum", curve.tail_infimum},
              {"settle_horizon", curve.settle_horizon}};
}

void write_moments_csv(std::ostream& os, const MomentTrajectory& traj) {
  const Index dim = 2 * traj.state_dim();
  os << "k";
  for (Index i = 0; i < dim; ++i) os << ",mean_" << i;
  for (Index i = 0; i < dim; ++i)
    for (Index j = i; j < dim; ++j) os << ",cov_" << i << "_" << j;
  os << "\n";
  for (Index k = 0; k <= traj.horizon(); ++k) {
    os << k;
    for (Index i = 0; i < dim; ++i) os << "," << fmt_double(traj.mean(k)(i));
    for (Index i = 0; i < dim; ++i)
      for (Index j = i; j < dim; ++j)
        os << "," << fmt_double(traj.cov(k)(i, j));
    os << "\n";
  }
}

void write_paths_csv(std::ostream& os, const PathEnsemble& ensemble) {
  if (ensemble.paths.empty()) {
    os << "path_id,k\n";
    return;
  }
  const Index n = ensemble.paths[0].x.cols();
  const Index l = ensemble.paths[0].u.cols();
  os << "path_id,k";
  for (Index i = 0; i < n; ++i) os << ",x_" << i;
  for (Index i = 0; i < n; ++i) os << ",xs_" << i;
  for (Index i = 0; i < l; ++i) os << ",u_" << i;
  for (Index i = 0; i < l; ++i) os << ",us_" << i;
  for (Index i = 0; i < n; ++i) os << ",w_" << i;
  os << "\n";
  for (size_t p = 0; p < ensemble.paths.size(); ++p) {
    const Path& path = ensemble.paths[p];
    for (Index k = 0; k <= path.horizon; ++k) {
      os << p << "," << k;
      for (Index i = 0; i < n; ++i) os << "," << fmt_double(path.x(k, i));
      for (Index i = 0; i < n; ++i) os << "," << fmt_double(path.xs(k, i));
      if (k < path.horizon) {
        for (Index i = 0; i < l; ++i) os << "," << fmt_double(path.u(k, i));
        for (Index i = 0; i < l; ++i) os << "," << fmt_double(path.us(k, i));
        for (Index i = 0; i < n; ++i) os << "," << fmt_double(path.w(k, i));
      } else {
        for (Index i = 0; i < 2 * l + n; ++i) os << ",";
      }
      os << "\n";
    }
  }
}

void write_turnpike_csv(std::ostream& os, const TurnpikeReport& report) {
  os << "k,eps,eta,m_k,markov_bound,empirical_freq\n";
  auto emit = [&](double eps, double eta, bool has_eta,
                  const std::vector<double>* freq) {
    for (Index k = 0; k < report.N; ++k) {
      const double m = report.moment_values[static_cast<size_t>(k)];
      os << k << "," << fmt_double(eps) << ",";
      if (has_eta) os << fmt_double(eta);
      os << "," << fmt_double(m) << ","
         << fmt_double(std::min(1.0, std::max(0.0, m) / eps)) << ",";
      if (freq != nullptr) os << fmt_double((*freq)[static_cast<size_t>(k)]);
      os << "\n";
    }
  };
  for (const EpsCount& e : report.eps_counts)
    emit(e.eps, 0.0, false, nullptr);
  for (const ProbCount& p : report.prob_counts)
    emit(p.eps, p.eta, true,
         p.has_empirical ? &p.exceedance_freq : nullptr);
}

}  // namespace stoclq
