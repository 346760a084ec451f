"""κ-exponential and κ-logarithm with their derivatives.

All functions broadcast over numpy arrays. For κ at or below ``EPS_KAPPA`` the
ordinary exp/log branch is used.
"""

from __future__ import annotations

import numpy as np

EPS_KAPPA = 1e-8


def _check_kappa(kappa: float) -> float:
    kappa = float(kappa)
    if not kappa >= 0.0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    return kappa


def _positive(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("argument must be strictly positive")
    return x


def _out(v, like):
    return float(v) if np.ndim(like) == 0 else v


def exp_kappa(y, kappa: float):
    """(sqrt(1 + κ²y²) + κy)^(1/κ), evaluated as exp(asinh(κy)/κ).

    asinh is the log of the bracket and is accurate for either sign of κy,
    so no cancellation-avoiding rewrite is needed. Overflow saturates to inf.
    """
    kappa = _check_kappa(kappa)
    y_arr = np.asarray(y, dtype=float)
    with np.errstate(over="ignore"):
        if kappa <= EPS_KAPPA:
            v = np.exp(y_arr)
        else:
            v = np.exp(np.arcsinh(kappa * y_arr) / kappa)
    return _out(v, y)


def log_exp_kappa(y, kappa: float):
    """Natural log of exp_kappa, finite wherever y is."""
    kappa = _check_kappa(kappa)
    y_arr = np.asarray(y, dtype=float)
    v = y_arr if kappa <= EPS_KAPPA else np.arcsinh(kappa * y_arr) / kappa
    return _out(v, y)


def ln_kappa(x, kappa: float):
    """(x^κ - x^-κ)/(2κ), evaluated as sinh(κ ln x)/κ."""
    kappa = _check_kappa(kappa)
    x_arr = _positive(x)
    lx = np.log(x_arr)
    with np.errstate(over="ignore"):
        v = lx if kappa <= EPS_KAPPA else np.sinh(kappa * lx) / kappa
    return _out(v, x)


def exp_kappa_dy(y, kappa: float):
    kappa = _check_kappa(kappa)
    y_arr = np.asarray(y, dtype=float)
    v = np.asarray(exp_kappa(y_arr, kappa)) / np.sqrt(1.0 + (kappa * y_arr) ** 2)
    return _out(v, y)


def ln_kappa_dx(x, kappa: float):
    """(x^(κ-1) + x^(-κ-1))/2 = cosh(κ ln x)/x."""
    kappa = _check_kappa(kappa)
    x_arr = _positive(x)
    lx = np.log(x_arr)
    with np.errstate(over="ignore"):
        v = np.cosh(kappa * lx) / x_arr
    return _out(v, x)


def _c1(u: np.ndarray) -> np.ndarray:
    # (cosh u - sinh(u)/u)/u, series near 0
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1e-2
    us = np.where(small, 1.0, u)
    with np.errstate(over="ignore", invalid="ignore"):
        direct = (np.cosh(us) - np.sinh(us) / us) / us
    series = u / 3.0 + u**3 / 30.0 + u**5 / 840.0
    return np.where(small, series, direct)


def _c2(u: np.ndarray) -> np.ndarray:
    # sinh(u)/u - 2cosh(u)/u^2 + 2sinh(u)/u^3, series near 0
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 5e-2
    us = np.where(small, 1.0, u)
    with np.errstate(over="ignore", invalid="ignore"):
        direct = np.sinh(us) / us - 2.0 * np.cosh(us) / us**2 + 2.0 * np.sinh(us) / us**3
    u2 = u * u
    series = 1.0 / 3.0 + u2 / 10.0 + u2 * u2 / 168.0 + u2**3 / 6480.0
    return np.where(small, series, direct)


def ln_kappa_dkappa(x, kappa: float):
    """∂ln_κ(x)/∂κ = ln x (x^κ + x^-κ)/(2κ) - ln_κ(x)/κ, stable as κ → 0."""
    kappa = _check_kappa(kappa)
    lx = np.log(_positive(x))
    return _out(lx * lx * _c1(kappa * lx), x)


def ln_kappa_dkappa2(x, kappa: float):
    """Second derivative of ln_κ(x) with respect to κ."""
    kappa = _check_kappa(kappa)
    lx = np.log(_positive(x))
    return _out(lx**3 * _c2(kappa * lx), x)


def exp_kappa_dkappa(y, kappa: float):
    """∂exp_κ(y)/∂κ via the inverse-function rule on ln_κ."""
    kappa = _check_kappa(kappa)
    x = np.asarray(exp_kappa(y, kappa))
    v = -np.asarray(ln_kappa_dkappa(x, kappa)) / np.asarray(ln_kappa_dx(x, kappa))
    return _out(v, y)


def ln_kappa_inflection(kappa: float) -> float | None:
    """Inflection point of ln_κ, which only exists for κ > 1."""
    kappa = _check_kappa(kappa)
    if kappa <= 1.0:
        return None
    return ((kappa + 1.0) / (kappa - 1.0)) ** (1.0 / (2.0 * kappa))


def taylor_coefficients(kappa: float, n_max: int) -> np.ndarray:
    """Coefficients ξ_n of exp_κ(y) = Σ ξ_n y^n / n!.

    ξ_0 = ξ_1 = 1 and ξ_n = Π_{j=1}^{n-1} [1 - (2j - n)κ] for n ≥ 2.
    """
    kappa = _check_kappa(kappa)
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    xi = np.ones(n_max + 1)
    if kappa <= EPS_KAPPA:
        return xi
    for n in range(2, n_max + 1):
        j = np.arange(1, n)
        xi[n] = np.prod(1.0 - (2 * j - n) * kappa)
    return xi


def ln_kappa_compose(lam, x, kappa: float):
    """ln_κ(λx) from ln_κ(λ) and ln_κ(x) using the κ-composition law."""
    a = np.asarray(ln_kappa(lam, kappa))
    b = np.asarray(ln_kappa(x, kappa))
    v = a * np.sqrt(1.0 + (kappa * b) ** 2) + b * np.sqrt(1.0 + (kappa * a) ** 2)
    return float(v) if np.ndim(v) == 0 else v
