"""Special functions used by the moment bounds and quantile machinery.

erf, erfc and the Gamma function delegate to ``scipy.special``; the inverse
error function and the confluent hypergeometric function are implemented
here because their failure modes matter to the callers (domain checks on
``erf_inv``, convergence reporting on ``hyp1f1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp


class ConvergenceError(ArithmeticError):
    """A series or iterative scheme failed to meet its tolerance."""


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


@dataclass(frozen=True)
class HypergeometricParams:
    a: float
    b: float
    z: float

    def __post_init__(self):
        if _is_nonpositive_integer(self.b):
            raise ValueError(f"b must not be a non-positive integer, got {self.b}")


def erf(x):
    return _sp.erf(x)


def erfc(x):
    return _sp.erfc(x)


def erf_inv(p):
    """Inverse error function on (-1, 1).

    Starts from scipy's ``erfinv`` and applies one Newton step on ``erf`` so
    the round trip is tight even where the initial value is slightly off.
    """
    p_arr = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(p_arr)) or np.any(np.abs(p_arr) >= 1.0):
        raise ValueError("erf_inv requires |p| < 1")
    x = _sp.erfinv(p_arr)
    # Newton on erf(x) - p; derivative is 2/sqrt(pi) exp(-x^2)
    r = _sp.erf(x) - p_arr
    x = x - r * (0.5 * math.sqrt(math.pi)) * np.exp(x * x)
    if np.ndim(p) == 0:
        return float(x)
    return x


def gamma(x):
    x_arr = np.asarray(x, dtype=float)
    if np.any((x_arr <= 0) & (x_arr == np.floor(x_arr))):
        raise ValueError("gamma has poles at non-positive integers")
    out = _sp.gamma(x_arr)
    return float(out) if np.ndim(x) == 0 else out


def _kummer_series(a: float, b: float, z: float, max_terms: int) -> float:
    term = 1.0
    total = 1.0
    decreasing = 0
    prev = 1.0
    for n in range(max_terms):
        term *= (a + n) * z / ((b + n) * (n + 1))
        total += term
        if term == 0.0:
            return total
        mag = abs(term)
        decreasing = decreasing + 1 if mag < prev else 0
        prev = mag
        if decreasing >= 3 and mag < 1e-16 * abs(total):
            return total
    raise ConvergenceError(f"hyp1f1 series did not converge for a={a}, b={b}, z={z}")


def hyp1f1(a: float, b: float, z: float, max_terms: int = 10_000) -> float:
    """Kummer's function M(a, b, z) for real arguments.

    Positive z is summed directly (all terms share a sign once n > -a, so
    there is no cancellation when a > 0). Negative z goes through Kummer's
    transformation M(a, b, z) = e^z M(b - a, b, -z).
    """
    p = HypergeometricParams(float(a), float(b), float(z))
    if not math.isfinite(p.z):
        raise ValueError("z must be finite")
    if p.z == 0.0:
        return 1.0
    if p.z < 0.0:
        # a terminating polynomial is summed as is; otherwise transform
        if _is_nonpositive_integer(p.a):
            return _kummer_series(p.a, p.b, p.z, max_terms)
        return math.exp(p.z) * _kummer_series(p.b - p.a, p.b, -p.z, max_terms)
    return _kummer_series(p.a, p.b, p.z, max_terms)
