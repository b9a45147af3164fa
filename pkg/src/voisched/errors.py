"""Error types raised by the simulator and scheduler."""


class DegenerateGeometry(ValueError):
    """Platform agent sits on or outside the region boundary; the
    restoring force is undefined there."""


class InfeasibleLink(ValueError):
    """Rician link parameters cannot satisfy the outage target
    (sqrt(2G) must exceed the inverse Q-function of the outage eps)."""


class SingularInnovation(RuntimeError):
    """Innovation covariance is numerically singular (condition number
    above 1e12) and regularization is disabled."""


class ContractViolation(ValueError):
    """Inputs violate an interface contract (shape or consistency)."""


class ConfigError(ValueError):
    """Configuration file or override is malformed, has unknown keys,
    or fails validation."""
