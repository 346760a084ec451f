"""Marginal κ-lognormal distribution κLN(μ, σ, κ).

X = exp_κ(Y) with Y ~ N(μ, σ²). Densities are evaluated in log space so the
deep tails neither underflow nor cancel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as _sp

from .kappa import EPS_KAPPA, exp_kappa, ln_kappa, ln_kappa_dx
from .special import erf_inv

_LOG_2SQRT2PI = math.log(2.0 * math.sqrt(2.0 * math.pi))

# a root is real when its imaginary part is below this, relative to 1 + |re|
ROOT_IMAG_TOL = 1e-9
ROOT_REAL_MIN = 1e-12


@dataclass(frozen=True)
class KappaParams:
    mu: float
    sigma: float
    kappa: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma) and math.isfinite(self.kappa)):
            raise ValueError("parameters must be finite")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.mu, self.sigma, self.kappa)


@dataclass(frozen=True)
class ModeReport:
    stationary_points: tuple[float, ...]
    modes: tuple[float, ...]
    root_count: int
    coefficients: tuple[float, float, float]
    minima: tuple[float, ...] = field(default=())


def _x(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("x must be strictly positive")
    return x


def _ret(v, like):
    return float(v) if np.ndim(like) == 0 else v


def log_jacobian(x, kappa: float):
    """ln((x^(κ-1) + x^(-κ-1))/2) = ln cosh(κ ln x) - ln x."""
    lx = np.log(_x(x))
    u = np.abs(kappa * lx)
    # ln cosh u = u + log1p(exp(-2u)) - ln 2
    return _ret(u + np.log1p(np.exp(-2.0 * u)) - math.log(2.0) - lx, x)


def _z(x, p: KappaParams) -> np.ndarray:
    with np.errstate(over="ignore"):
        return (np.asarray(ln_kappa(x, p.kappa)) - p.mu) / p.sigma


def logpdf(x, p: KappaParams):
    x_arr = _x(x)
    z = _z(x_arr, p)
    v = -0.5 * z * z - 0.5 * math.log(2.0 * math.pi) - math.log(p.sigma) + np.asarray(log_jacobian(x_arr, p.kappa))
    return _ret(v, x)


def pdf(x, p: KappaParams):
    """(1/(2√(2π)σ)) exp(-(ln_κx - μ)²/2σ²) (x^(κ-1) + x^(-κ-1))."""
    return _ret(np.exp(np.asarray(logpdf(x, p))), x)


def cdf(x, p: KappaParams):
    return _ret(_sp.ndtr(_z(_x(x), p)), x)


def survival(x, p: KappaParams):
    # ndtr(-z) = erfc(z/√2)/2, accurate deep in the right tail
    return _ret(_sp.ndtr(-_z(_x(x), p)), x)


def log_survival(x, p: KappaParams):
    return _ret(_sp.log_ndtr(-_z(_x(x), p)), x)


def quantile(prob, p: KappaParams):
    prob_arr = np.asarray(prob, dtype=float)
    if np.any(~((prob_arr > 0) & (prob_arr < 1))):
        raise ValueError("probability must lie in (0, 1)")
    y = p.mu + p.sigma * math.sqrt(2.0) * np.asarray(erf_inv(2.0 * prob_arr - 1.0))
    return _ret(exp_kappa(y, p.kappa), prob)


def median(p: KappaParams) -> float:
    return exp_kappa(p.mu, p.kappa)


def hazard(x, p: KappaParams):
    """pdf/survival without forming either factor.

    With z = (ln_κx - μ)/σ the ratio is φ(z)/Φ(-z) · ln_κ'(x)/σ. For z > 0 the
    Mills ratio is written with erfcx, which stays accurate after both pdf and
    survival underflow; for z <= 0 the plain ratio has no cancellation.
    """
    x_arr = _x(x)
    z = _z(x_arr, p)
    jac = np.asarray(ln_kappa_dx(x_arr, p.kappa)) / p.sigma
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        tail = math.sqrt(2.0 / math.pi) / _sp.erfcx(z / math.sqrt(2.0))
        body = np.exp(-0.5 * z * z - 0.5 * math.log(2.0 * math.pi) - _sp.log_ndtr(-z))
        v = np.where(z > 0, tail, body) * jac
    return _ret(v, x)


def normalized_typical_extreme(p: KappaParams, log2_n: int) -> float:
    """Q(1 - 2^-L)/Q(0.5): typical maximum of 2^L draws relative to the median."""
    if log2_n < 1:
        raise ValueError("log2_n must be >= 1")
    return quantile(1.0 - 2.0 ** (-log2_n), p) / median(p)


def sample(p: KappaParams, size, rng: np.random.Generator) -> np.ndarray:
    return np.asarray(exp_kappa(rng.normal(p.mu, p.sigma, size=size), p.kappa))


# ---------------------------------------------------------------- mode analysis


def sextic_coefficients(mu, sigma, kappa):
    a = 2.0 * np.asarray(mu) * kappa
    b = 1.0 - 4.0 * kappa * np.asarray(sigma) ** 2 * (kappa - 1.0)
    c = 4.0 * kappa * np.asarray(sigma) ** 2 * (kappa + 1.0) - 1.0
    return a, b, c


def sextic_eval(z, a, b, c):
    """p(z) = z^6 - a z^5 + b z^4 - 2a z^3 + c z^2 - a z - 1 (Horner)."""
    z = np.asarray(z, dtype=float)
    return (((((z - a) * z + b) * z - 2 * a) * z + c) * z - a) * z - 1.0


def sextic_roots(a, b, c) -> np.ndarray:
    """Complex roots of the stationary-point sextic for arrays of (a, b, c).

    Uses eigenvalues of stacked companion matrices; returns shape (..., 6).
    """
    a, b, c = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float), np.asarray(c, float))
    shape = a.shape
    a, b, c = a.ravel(), b.ravel(), c.ravel()
    n = a.size
    comp = np.zeros((n, 6, 6))
    # monic coefficients after the leading 1: [-a, b, -2a, c, -a, -1]
    coeffs = np.stack([-a, b, -2 * a, c, -a, -np.ones(n)], axis=1)
    comp[:, 0, :] = -coeffs
    comp[:, np.arange(1, 6), np.arange(0, 5)] = 1.0
    roots = np.linalg.eigvals(comp)
    return roots.reshape(shape + (6,))


def positive_root_mask(roots: np.ndarray) -> np.ndarray:
    re, im = roots.real, roots.imag
    return (np.abs(im) <= ROOT_IMAG_TOL * (1.0 + np.abs(re))) & (re > ROOT_REAL_MIN)


def count_positive_roots(a, b, c) -> np.ndarray:
    return positive_root_mask(sextic_roots(a, b, c)).sum(axis=-1)


def _classify(zs: np.ndarray, a: float, b: float, c: float) -> list[bool]:
    # pdf' has the sign of -p(z); a maximum is where p turns from - to +
    out = []
    edges = np.concatenate([[0.0], zs, [2.0 * zs[-1] + 1.0]])
    for i, z in enumerate(zs):
        left = math.sqrt(edges[i] * z) if edges[i] > 0 else 0.5 * z
        right = math.sqrt(z * edges[i + 2])
        out.append(sextic_eval(left, a, b, c) < 0 and sextic_eval(right, a, b, c) > 0)
    return out


def mode_report(p: KappaParams) -> ModeReport:
    """Stationary points and modes of the density.

    For κ > 0 the stationary points are x = z^(1/κ) over the positive roots z
    of the sextic. Maxima are identified from the sign of the sextic at the
    geometric midpoints between consecutive roots.
    """
    mu, sigma, kappa = p.as_tuple()
    if kappa <= EPS_KAPPA:
        m = math.exp(mu - sigma**2)
        return ModeReport((m,), (m,), 1, (0.0, 1.0, -1.0))
    a, b, c = (float(v) for v in sextic_coefficients(mu, sigma, kappa))
    roots = sextic_roots(a, b, c)
    mask = positive_root_mask(roots)
    if not np.all(np.isfinite(roots)):
        raise ArithmeticError("eigen-solver failed on the sextic")
    zs = np.sort(roots.real[mask])
    if zs.size == 0:
        raise ArithmeticError("sextic has no positive root")
    is_max = _classify(zs, a, b, c)
    with np.errstate(over="ignore"):
        xs = zs ** (1.0 / kappa)
    modes = tuple(float(x) for x, m in zip(xs, is_max) if m)
    minima = tuple(float(x) for x, m in zip(xs, is_max) if not m)
    return ModeReport(tuple(float(x) for x in xs), modes, int(zs.size), (a, b, c), minima)


def global_mode(p: KappaParams) -> float:
    """Highest mode; ties within 1e-12 relative go to the smaller x."""
    rep = mode_report(p)
    cands = np.array(rep.modes if rep.modes else rep.stationary_points)
    lp = np.asarray(logpdf(cands, p))
    best = lp.max()
    return float(cands[np.argmax(lp >= best + math.log1p(-1e-12))])
