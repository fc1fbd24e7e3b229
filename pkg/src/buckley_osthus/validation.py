"""Input validation helpers shared by the estimators and the functional API."""

from __future__ import annotations

import numbers

import numpy as np

from .exceptions import ParameterError

MAX_SEED = 2**64 - 1


def check_attractiveness(a, name="a"):
    """Return ``a`` as a positive finite real, or raise :class:`ParameterError`."""
    if isinstance(a, bool) or not isinstance(a, numbers.Real):
        raise ParameterError(f"{name} must be a real number, got {a!r}")
    if not np.isfinite(float(a)) or a <= 0:
        raise ParameterError(f"{name} must be positive and finite, got {a!r}")
    return a


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ParameterError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ParameterError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_seed(seed):
    """Validate a 64-bit unsigned seed."""
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral):
        raise ParameterError(f"seed must be an integer, got {seed!r}")
    if not 0 <= seed <= MAX_SEED:
        raise ParameterError(f"seed must lie in [0, 2**64), got {seed}")
    return int(seed)


def check_k_grid(k_grid, name="k_grid", minimum=1):
    """Validate a nonempty strictly increasing list of integers ``>= minimum``."""
    ks = [check_positive_int(k, name, minimum) for k in k_grid]
    if not ks:
        raise ParameterError(f"{name} must be nonempty")
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ParameterError(f"{name} must be strictly increasing, got {ks}")
    return ks


def check_probability_open(eps, name="epsilon"):
    if isinstance(eps, bool) or not isinstance(eps, numbers.Real) or not 0 < eps < 1:
        raise ParameterError(f"{name} must lie in (0, 1), got {eps!r}")
    return float(eps)
