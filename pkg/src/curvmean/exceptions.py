"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit with 2,
numerical failures (non-convergence, divergence, cut locus) with 3.
"""


class CurvmeanError(Exception):
    """Base class for all package errors."""


class InvalidInputError(CurvmeanError, ValueError):
    """Input violates a documented precondition (off-manifold point,
    non-finite coordinates, dimension mismatch, empty sample, ...)."""


class CutLocusError(CurvmeanError, ValueError):
    """Logarithm requested across the cut locus (antipodal points on the
    sphere), where it is genuinely multivalued."""


class DegeneratePlaneError(CurvmeanError, ValueError):
    """Sectional curvature of a degenerate (collinear) 2-plane."""


class DomainError(CurvmeanError, ValueError):
    """Scalar function evaluated outside its analytic domain."""


class DivergenceError(CurvmeanError, ArithmeticError):
    """Modulation factor diverges (concentration-condition boundary)."""


class DegenerateHessianError(CurvmeanError, ArithmeticError):
    """Expected Hessian is numerically singular; the asymptotic covariance
    is undefined, signalling breakdown of the CLT regime."""


class ConvergenceError(CurvmeanError, RuntimeError):
    """An iterative procedure failed to reach its tolerance."""


class ExperimentError(CurvmeanError, RuntimeError):
    """A Monte Carlo or quadrature experiment could not produce a valid
    result (too many failed trials, residuals below the noise floor)."""


class ConfigError(CurvmeanError, ValueError):
    """Invalid experiment or CLI configuration."""
