"""Small-world delivery-time toolkit.

Two engines under one roof: an exact recursion for the continuum-limit
expected message delivery time in planar small-world networks, and a Monte
Carlo simulator of finite dense networks routed by delta-greedy geographic
forwarding, used to validate the analytic curve.
"""

from .errors import InvariantViolation, ValidationError

__all__ = ["InvariantViolation", "ValidationError", "__version__"]

__version__ = "0.1.0"
