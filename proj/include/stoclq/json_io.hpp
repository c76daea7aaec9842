#pragma once

#include <iosfwd>

#include <json.hpp>

#include "stoclq/riccati.hpp"
#include "stoclq/turnpike.hpp"

namespace stoclq {

using Json = nlohmann::json;

// Matrices are nested row-major arrays; vectors are flat arrays. Parsing
// validates rectangular shape and finite entries.
Json matrix_to_json(const Matrix& m);
Json vector_to_json(const Vector& v);
Matrix matrix_from_json(const Json& j, const std::string& what);
Vector vector_from_json(const Json& j, const std::string& what);

// Problem schema:
// {"A": [[..]], "B": [[..]], "Q": [[..]], "R": [[..]], "Sigma_W": [[..]],
//  "x0_mean": [..], "x0_cov": [[..]]}
Problem problem_from_json(const Json& j);
Json problem_to_json(const Problem& p);

Json validation_to_json(const ValidationReport& report);
Json riccati_to_json(const RiccatiSolution& sol);
Json stationary_to_json(const StationaryPair& pair);
Json certificate_to_json(const DissipativityCertificate& cert);
Json chain_residuals_to_json(const ChainResiduals& res);
Json turnpike_to_json(const TurnpikeReport& report);
Json gap_curve_to_json(const GapCurve& curve);

// CSV emitters. Floats are printed with %.17g so output is deterministic and
// round-trips exactly.

// k, mean components, covariance upper triangle (row-major).
void write_moments_csv(std::ostream& os, const MomentTrajectory& traj);

// path_id, k, x components, xs components, u, us, w (w blank at k = N).
void write_paths_csv(std::ostream& os, const PathEnsemble& ensemble);

// One row per (k, entry): k, eps, eta, m_k, Markov bound min(1, m_k/eps),
// empirical exceedance frequency (blank when absent). eps-only entries have a
// blank eta.
void write_turnpike_csv(std::ostream& os, const TurnpikeReport& report);

}  // namespace stoclq
