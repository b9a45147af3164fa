"""Value-of-information sensor scheduling for digital-twin trajectory
tracking: dynamics and sensing simulator, outage-constrained link model,
Gaussian state estimator, scheduling policies, and a Monte Carlo
evaluation harness."""

from ._kernels import backend_name

__version__ = "0.1.0"

__all__ = ["backend_name", "__version__"]
