"""Exception types shared across the package."""


class WaveAsymError(Exception):
    """Base class for all package errors."""


class ConfigurationError(WaveAsymError):
    """Invalid configuration value (band limit, grid size, run config)."""


class DataError(WaveAsymError):
    """Non-finite or otherwise unusable numerical data."""


class DomainError(WaveAsymError):
    """Evaluation point outside the validity region of a formula."""


class ParityError(WaveAsymError):
    """A transform received input of the wrong parity."""


class IntegrabilityError(WaveAsymError):
    """Elliptic right-hand side has a nonzero spherical mean.

    Carries the offending mean value in ``.mean``.
    """

    def __init__(self, message, mean):
        super().__init__(message)
        self.mean = float(mean)


class DecayAssumptionError(WaveAsymError):
    """A source or radiation-field profile violates its decay envelope."""


class FitFailureError(WaveAsymError):
    """Least-squares expansion fit is ill conditioned or inconsistent."""


class MatchingFailureError(WaveAsymError):
    """A matching limit or decay-rate check failed; carries the measured slope."""

    def __init__(self, message, slope=None):
        super().__init__(message)
        self.slope = slope


class AssemblyError(WaveAsymError):
    """Cross-route consistency check failed during residual assembly."""
