"""Numerical experiments on linear cocycles: finite-scale Lyapunov exponents,
the avalanche principle, large deviation probes and continuity checks."""
from .errors import CapacityError, CocycLabError, GateError, InvalidInputError

__version__ = "0.1.0"

__all__ = ["CapacityError", "CocycLabError", "GateError", "InvalidInputError", "__version__"]
