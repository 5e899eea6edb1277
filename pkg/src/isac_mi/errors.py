"""Exception types shared across the package.

The CLI maps ConfigError to exit code 2 and every other error below to
exit code 3; error messages name the operation that failed.
"""


class ConfigError(ValueError):
    """Invalid scenario configuration or operation arguments."""


class DegenerateNoiseError(ValueError):
    """Noise covariance singular or numerically indistinguishable from it."""


class ConvergenceError(RuntimeError):
    """Iterative optimizer did not reach its stationarity tolerance."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class InfeasibleFrameError(ValueError):
    """Frame too short to carry the requested covariance rank."""


class UnreliableRegimeError(ValueError):
    """Slope estimation attempted outside the reliable high-power regime."""
