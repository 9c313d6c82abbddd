"""Sensitivity limits for resolving two mutually coherent point sources.

The package computes moment-based bounds on how precisely the separation d
of two coherently illuminated points can be estimated from photon counts --
with a camera (direct imaging), a Hermite-Gauss spatial demultiplexer, or a
bucket detector -- and ships a seeded Monte-Carlo simulator whose linearized
estimators saturate those bounds exactly.

Quick start::

    from cohsep import SourceScene, Poisson, HermiteGauss, total_report
    rep = total_report(SourceScene(d=0.5, sigma=1.0), Poisson(), HermiteGauss())
    print(rep.bound_known_ns)   # per-cycle variance bound on d
"""

__version__ = "0.1.0"

from .bases import (
    Bucket,
    DirectImagingGrid,
    HermiteGauss,
    MeasurementBasis,
    ModeSignal,
    di_intensity,
    hg_mode_signal,
    di_mode_signal,
    bucket_signal,
    mode_signal,
    parse_basis,
)
from .errors import (
    DegenerateSceneError,
    QuadratureConvergenceError,
    SingularCovarianceError,
    SingularSensitivityError,
    UnsupportedStatisticsError,
)
from .montecarlo import (
    KNOWN_NS,
    UNKNOWN_NS,
    EstimationResult,
    ExperimentPlan,
    run_experiment,
    run_plans,
)
from .photostats import (
    CustomH,
    Fock,
    Poisson,
    SourceStatistics,
    Thermal,
    h_param,
    parse_statistics,
)
from .scene import (
    SourceScene,
    compute_chi,
    compute_delta,
    detected_variance,
    total_detected,
    total_detected_d_deriv,
)
from .sensitivity import (
    SensitivityReport,
    covariance,
    covariance_inverse,
    m0_closed,
    m0_quadrature_di,
    m0_sensitivity,
    m_D_explicit,
    m_eps_closed_di,
    m_eps_closed_hg,
    m_eps_from_signal,
    m_eps_quadrature_di,
    sensitivity_matrix,
    total_report,
)

__all__ = [
    "__version__",
    # scene
    "SourceScene", "compute_chi", "compute_delta", "total_detected",
    "total_detected_d_deriv", "detected_variance",
    # statistics
    "Fock", "Poisson", "Thermal", "CustomH", "SourceStatistics", "h_param",
    "parse_statistics",
    # bases
    "HermiteGauss", "DirectImagingGrid", "Bucket", "MeasurementBasis",
    "ModeSignal", "mode_signal", "hg_mode_signal", "di_mode_signal",
    "bucket_signal", "di_intensity", "parse_basis",
    # sensitivity
    "covariance", "covariance_inverse", "sensitivity_matrix",
    "m_eps_from_signal", "m_eps_closed_hg", "m_eps_closed_di",
    "m_eps_quadrature_di", "m0_closed", "m0_sensitivity", "m0_quadrature_di",
    "m_D_explicit", "SensitivityReport", "total_report",
    # simulation
    "ExperimentPlan", "EstimationResult", "run_experiment", "run_plans",
    "KNOWN_NS", "UNKNOWN_NS",
    # errors
    "DegenerateSceneError", "SingularCovarianceError",
    "SingularSensitivityError", "UnsupportedStatisticsError",
    "QuadratureConvergenceError",
]
