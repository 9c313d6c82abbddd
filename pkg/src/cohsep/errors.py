"""Exception types shared across the package."""


class DegenerateSceneError(ValueError):
    """The scene detects no light (fully destructive overlap at zero separation)."""


class SingularCovarianceError(ValueError):
    """The count covariance has no inverse (zero mode mean, or 1 + h*N_D = 0)."""


class SingularSensitivityError(ValueError):
    """The sensitivity matrix cannot be inverted for the requested parameters."""


class UnsupportedStatisticsError(ValueError):
    """The requested operation is not defined for this source-statistics model."""


class QuadratureConvergenceError(RuntimeError):
    """Numerical integration did not reach the requested accuracy."""
