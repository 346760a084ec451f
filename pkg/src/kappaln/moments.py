"""Integer-order moments of the κ-lognormal distribution.

Four routes to m_ℓ = E[X^ℓ]:

* ``quadrature``: Gauss-Legendre over the latent Gaussian variable,
* ``lower_bound`` / ``upper_bound``: closed forms in Γ and ₁F₁,
* ``power_series``: expansion around μ with the g_n recurrence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.polynomial import Polynomial
from scipy import optimize

from .distribution import KappaParams
from .kappa import EPS_KAPPA, exp_kappa, log_exp_kappa
from .special import erf, gamma, hyp1f1

Method = Literal["quadrature", "lower_bound", "upper_bound", "power_series"]

_HALF_WIDTH = 12.0
_LOG_MAX = math.log(np.finfo(float).max)
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


class MomentOverflow(OverflowError):
    """The requested moment exceeds double range."""


@dataclass(frozen=True)
class MomentRequest:
    params: KappaParams
    order: int
    method: Method = "quadrature"
    truncation: int = 2

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise ValueError("order must be a positive integer")
        if self.method == "power_series" and self.truncation < 1:
            raise ValueError("power_series needs truncation >= 1")


def moment(req: MomentRequest) -> float:
    p, ell = req.params, int(req.order)
    if req.method == "quadrature":
        return _moment_quadrature(p, ell)
    if req.method == "lower_bound":
        return moment_lower_bound(p, ell)
    if req.method == "upper_bound":
        return moment_upper_bound(p, ell)
    if req.method == "power_series":
        return moment_power_series(p, ell, req.truncation)
    raise ValueError(f"unknown method {req.method!r}")


def _log_integrand(y, p: KappaParams, ell: int):
    z = (y - p.mu) / p.sigma
    return ell * np.asarray(log_exp_kappa(y, p.kappa)) - 0.5 * z * z


def _gl_panels(f, lo: float, hi: float, panels: int) -> float:
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    y = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    return float(np.sum(half[:, None] * _GL_WEIGHTS[None, :] * f(y)))


def _moment_quadrature(p: KappaParams, ell: int, rtol: float = 1e-12) -> float:
    mu, sigma = p.mu, p.sigma
    if p.kappa <= EPS_KAPPA:
        return _checked_exp(ell * mu + 0.5 * (ell * sigma) ** 2)
    # the integrand peak moves right of μ for large ℓσ²; widen the window to hold it
    res = optimize.minimize_scalar(
        lambda y: -float(_log_integrand(y, p, ell)),
        bracket=(mu, mu + sigma),
    )
    peak = float(res.x)
    log_peak = float(_log_integrand(peak, p, ell))
    lo = min(mu - _HALF_WIDTH * sigma, peak - _HALF_WIDTH * sigma)
    hi = max(mu + _HALF_WIDTH * sigma, peak + _HALF_WIDTH * sigma)

    def f(y):
        return np.exp(_log_integrand(y, p, ell) - log_peak)

    panels = 8
    prev = _gl_panels(f, lo, hi, panels)
    while True:
        panels *= 2
        cur = _gl_panels(f, lo, hi, panels)
        if abs(cur - prev) <= rtol * abs(cur) or panels >= 4096:
            break
        prev = cur
    return _checked_exp(log_peak + math.log(cur / (math.sqrt(2.0 * math.pi) * sigma)))


def _checked_exp(v: float) -> float:
    if v > _LOG_MAX:
        raise MomentOverflow(f"moment exceeds double range (log = {v:.1f})")
    return math.exp(v)


def moment_scaled(p: KappaParams, order: int) -> float:
    """m_ℓ(κ; μ, σ) evaluated as m_1(κ/ℓ; ℓμ, ℓσ)."""
    ell = int(order)
    if ell < 1:
        raise ValueError("order must be >= 1")
    q = KappaParams(ell * p.mu, ell * p.sigma, p.kappa / ell)
    return _moment_quadrature(q, 1)


def _require_kappa(p: KappaParams):
    if p.kappa <= EPS_KAPPA:
        raise ValueError("moment bounds are undefined at kappa = 0")


def moment_lower_bound(p: KappaParams, order: int) -> float:
    _require_kappa(p)
    mu, sigma, kappa = p.as_tuple()
    ell = float(order)
    zeta = mu * mu / (2.0 * sigma * sigma)
    a1 = (ell + kappa) / (2.0 * kappa)
    a2 = (ell + 2.0 * kappa) / (2.0 * kappa)
    log_pref = (
        (ell / kappa) * math.log(2.0 * kappa)
        + ((ell - kappa) / (2.0 * kappa)) * math.log(2.0)
        + (ell / kappa) * math.log(sigma)
        - 0.5 * math.log(2.0 * math.pi)
        - zeta
    )
    bracket = gamma(a1) * hyp1f1(a1, 0.5, zeta) + gamma(a2) * (mu * math.sqrt(2.0) / sigma) * hyp1f1(a2, 1.5, zeta)
    head = math.exp(log_pref) * bracket
    tail = 0.5 * math.exp(ell * mu + 0.5 * (ell * sigma) ** 2) * (1.0 - erf((mu + ell * sigma**2) / (math.sqrt(2.0) * sigma)))
    return head + tail


def moment_upper_bound(p: KappaParams, order: int) -> float:
    _require_kappa(p)
    mu, sigma, kappa = p.as_tuple()
    ell = float(order)
    zeta = mu * mu / (2.0 * sigma * sigma)
    n_star = math.ceil(ell / (2.0 * kappa) - 1e-12)
    total = 0.0
    for m in range(n_star + 1):
        term = gamma(m + 0.5) * hyp1f1(m + 0.5, 0.5, zeta) + gamma(m + 1.0) * (mu * math.sqrt(2.0) / sigma) * hyp1f1(m + 1.0, 1.5, zeta)
        total += math.comb(n_star, m) * (2.0 * kappa**2 * sigma**2) ** m * term
    head = 0.5 * (1.0 - erf(mu / (math.sqrt(2.0) * sigma)))
    return head + 2.0 ** (ell / kappa - 1.0) * math.exp(-zeta) / math.sqrt(math.pi) * total


def g_polynomials(kappa: float, ell: float, n_max: int) -> list[tuple[Polynomial, Polynomial]]:
    """g_1..g_{n_max} as pairs (P_n, Q_n) with g_n(μ) = P_n(μ) + Q_n(μ)·s(μ).

    s = √(1+κ²μ²). Since s' = κ²μ/s and s² = 1+κ²μ², the recurrence
    g_{n+1} = (1+κ²μ²) g_n' - [(2n-1)κ²μ - ℓ s] g_n stays inside this form:
        P_{n+1} = w P' - (2n-1)κ²μ P + ℓ w Q
        Q_{n+1} = w Q' - (2n-2)κ²μ Q + ℓ P
    with w = 1+κ²μ².
    """
    k2 = kappa * kappa
    w = Polynomial([1.0, 0.0, k2])
    mu = Polynomial([0.0, 1.0])
    P, Q = Polynomial([1.0]), Polynomial([0.0])
    out = [(P, Q)]
    for n in range(1, n_max):
        P_next = w * P.deriv() - (2 * n - 1) * k2 * mu * P + ell * w * Q
        Q_next = w * Q.deriv() - (2 * n - 2) * k2 * mu * Q + ell * P
        P, Q = P_next, Q_next
        out.append((P, Q))
    return out


def g_value(mu: float, kappa: float, ell: float, n: int) -> float:
    P, Q = g_polynomials(kappa, ell, n)[n - 1]
    return float(P(mu) + Q(mu) * math.sqrt(1.0 + (kappa * mu) ** 2))


def moment_power_series(p: KappaParams, order: int, truncation: int) -> float:
    if truncation < 1:
        raise ValueError("truncation must be >= 1")
    mu, sigma, kappa = p.as_tuple()
    ell = float(order)
    gs = g_polynomials(kappa, ell, 2 * truncation)
    w = 1.0 + (kappa * mu) ** 2
    s = math.sqrt(w)
    acc = 0.0
    for q in range(1, truncation + 1):
        P, Q = gs[2 * q - 1]
        g = P(mu) + Q(mu) * s
        acc += sigma ** (2 * q) / (math.factorial(q) * 2.0**q) * g / w ** (2 * q - 0.5)
    return exp_kappa(ell * mu, kappa / ell) * (1.0 + ell * acc)


def moment_table(mu: float, sigma: float, kappa: float, orders, truncation: int = 2) -> list[dict]:
    """Rows of (ℓ, MOM, LB, UB, power series, ℓ/2κ) as ℓ-th roots."""
    p = KappaParams(mu, sigma, kappa)
    rows = []
    for ell in orders:
        row = {"order": int(ell), "mom": moment(MomentRequest(p, ell)) ** (1.0 / ell)}
        if kappa > EPS_KAPPA:
            row["lb"] = moment_lower_bound(p, ell) ** (1.0 / ell)
            row["ub"] = moment_upper_bound(p, ell) ** (1.0 / ell)
            row["ell_over_2kappa"] = ell / (2.0 * kappa)
        else:
            row["lb"] = row["ub"] = row["ell_over_2kappa"] = None
        row["series"] = moment_power_series(p, ell, truncation) ** (1.0 / ell)
        rows.append(row)
    return rows
