"""Smoke tests for the python bindings: the main operations round-trip numpy
arrays and reproduce the reference-example numbers."""

import math

import numpy as np
import pytest

import stoclq

P_ORACLE = (3.2 + math.sqrt(30.24)) / 2.0  # scalar DARE root for the example


@pytest.fixture(scope="module")
def reference():
    sys, cost, x0 = stoclq.reference_example_problem()
    sol = stoclq.solve_dare(sys, cost)
    pair = stoclq.build_stationary_pair(sys, sol)
    return sys, cost, x0, sol, pair


def test_reference_problem_roundtrip(reference):
    sys, cost, x0, _, _ = reference
    assert np.allclose(sys.A, [[1.2]])
    assert np.allclose(sys.B, [[1.0]])
    assert np.allclose(sys.Sigma_W, [[10.0]])
    assert np.allclose(cost.Q, [[1.0]])
    assert np.allclose(cost.R, [[5.0]])
    assert np.allclose(x0.mean, [3.0])
    assert np.allclose(x0.cov, [[1.5]])
    assert stoclq.validate(sys, cost).ok()


def test_solve_dare_matches_oracle(reference):
    _, _, _, sol, pair = reference
    assert abs(sol.P[0, 0] - P_ORACLE) <= 1e-8
    assert abs(sol.K[0, 0] - (-0.5582573)) <= 1e-6
    assert sol.residual <= 1e-9 * (1.0 + abs(sol.P[0, 0]))
    assert abs(pair.Sigma_s[0, 0] - 17.0020) <= 1e-3
    assert np.allclose(pair.A_K, [[1.2 + sol.K[0, 0]]])


def test_dare_residual_on_matrix_system():
    a = np.array([[0.5, 0.1], [0.0, 0.3]])
    b = np.array([[1.0], [0.5]])
    sys = stoclq.LtiStochasticSystem(a, b, 0.1 * np.eye(2))
    cost = stoclq.QuadraticCost(np.eye(2), np.eye(1))
    sol = stoclq.solve_dare(sys, cost)
    p = sol.P
    gain_term = a.T @ p @ b @ np.linalg.solve(
        cost.R + b.T @ p @ b, b.T @ p @ a)
    residual = np.max(np.abs(p - (a.T @ p @ a + cost.Q - gain_term)))
    assert residual <= 1e-9 * (1.0 + np.max(np.abs(p)))


def test_certificate_and_turnpike_bounds(reference):
    sys, cost, x0, sol, pair = reference
    cert = stoclq.build_certificate(sys, cost, sol, S_tilde=np.eye(1),
                                    gamma=1.0)
    assert cert.gamma == 1.0
    assert cert.lambda_min_H_lower > 0.0

    sched = stoclq.riccati_backward(sys, cost, 12, np.zeros((1, 1)))
    law = stoclq.AffineControlLaw.from_schedule(sched)
    report = stoclq.moment_turnpike(sys, cost, cert, law, pair, x0, 12,
                                    [0.5, 1.0, 2.0])
    assert report.N == 12
    assert len(report.moment_values) == 12
    for ec in report.eps_counts:
        assert ec.slack >= -1e-9 * (1.0 + abs(ec.bound))
    pc = stoclq.probability_turnpike(report, 1.0, 0.25, cert.H)
    assert pc.slack >= -1e-9 * (1.0 + abs(pc.bound))
    assert not pc.has_empirical


def test_certificate_not_found_raises():
    sys = stoclq.LtiStochasticSystem(np.array([[2.0]]), np.array([[1.0]]),
                                     np.eye(1))
    cost = stoclq.QuadraticCost(np.zeros((1, 1)), np.eye(1))
    with pytest.raises(stoclq.CertificateNotFound):
        stoclq.find_Stilde(sys, cost)


def test_ensemble_and_noise_cancellation(reference):
    sys, cost, x0, sol, pair = reference
    law = stoclq.AffineControlLaw.steady_gain(pair.K, 10)
    ens = stoclq.simulate_ensemble(sys, cost, law, pair, x0, 10, 64, 3)
    assert ens.horizon == 10
    assert len(ens.paths) == 64
    path = ens.paths[0]
    assert path.x.shape == (11, 1)
    assert path.u.shape == (10, 1)
    diff = path.x - path.xs
    expected = diff[0].copy()
    for k in range(11):
        assert np.max(np.abs(diff[k] - expected)) <= 1e-10
        expected = pair.A_K @ expected
    emp = stoclq.empirical_cost(ens)
    assert emp.std_error > 0.0
    assert emp.mean > 0.0


def test_run_reference_example_in_memory():
    res = stoclq.run_reference_example(seed=1, out_dir=None, ensemble=300)
    assert abs(res.solve.sol.K[0, 0] - (-0.558)) <= 1e-3
    assert len(res.reports) == 3
    assert len(res.figure) == 3
    assert res.gap.tail_infimum > 0.0
    assert res.exact_cost > 0.0
    for rep in res.reports:
        for ec in rep.eps_counts:
            assert ec.slack >= -1e-9 * (1.0 + abs(ec.bound))
