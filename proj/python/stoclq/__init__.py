"""Stochastic linear-quadratic optimal control with turnpike diagnostics.

The heavy lifting lives in the compiled extension ``stoclq._core``; this
package re-exports its public surface.
"""

from ._core import (  # noqa: F401
    AffineControlLaw,
    BoundViolated,
    CertificateNotFound,
    ChainResiduals,
    DegeneratePerturbation,
    DissipativityCertificate,
    EmpiricalCost,
    EpsCount,
    GainSchedule,
    GapCurve,
    GaussianState,
    InconclusiveStability,
    LtiStochasticSystem,
    MidHorizonProximity,
    MomentTrajectory,
    NoConvergence,
    NoiseCoupling,
    NoiseRealization,
    NotPositiveDefinite,
    Path,
    PathEnsemble,
    ProbCount,
    QuadraticCost,
    ReferenceExampleResult,
    RiccatiSolution,
    SolveResult,
    StationaryPair,
    TurnpikeReport,
    ValidationReport,
    assemble_H,
    build_certificate,
    build_stationary_pair,
    empirical_cost,
    figure1_metrics,
    find_Stilde,
    lower_bound_M,
    moment_turnpike,
    overtaking_gap,
    probability_turnpike,
    propagate_joint_moments,
    reference_example_problem,
    riccati_backward,
    run_reference_example,
    sample_noise,
    simulate_ensemble,
    simulate_pair,
    solve_dare,
    solve_lyapunov,
    spectral_radius_estimate,
    stage_cost,
    standard_normal_sample,
    trajectory_cost,
    validate,
    verify_dissipation_chain,
)

__version__ = "0.1.0"
