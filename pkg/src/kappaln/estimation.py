"""Marginal parameter estimation for κLN(μ, σ, κ).

The per-site negative log-likelihood is

    nll = ln(2√(2π)σ) + Σ(ln_κ x - μ)²/(2Nσ²) - (1/N) Σ ln(x^(κ-1) + x^(-κ-1))

and is minimized with L-BFGS-B under the box σ ≥ 1e-6, 0 ≤ κ ≤ kappa_max,
followed by a short Newton polish with the analytic Hessian.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .distribution import KappaParams, quantile
from .kappa import EPS_KAPPA, ln_kappa, ln_kappa_dkappa, ln_kappa_dkappa2
from .special import erf_inv

log = logging.getLogger(__name__)

_LOG_2SQRT2PI = math.log(2.0 * math.sqrt(2.0 * math.pi))
SIGMA_MIN = 1e-6
QF_LEVELS = np.array([0.01 * m for m in range(1, 100) if m != 50])


@dataclass(frozen=True)
class FitConfig:
    kappa_init: float = 1.5
    kappa_max: float = 10.0
    multistart_count: int = 8
    tolerance: float = 1e-8
    fix_kappa: float | None = None
    max_iter: int = 500

    def __post_init__(self):
        if self.kappa_max <= 0:
            raise ValueError("kappa_max must be > 0")
        if self.multistart_count < 1:
            raise ValueError("multistart_count must be >= 1")
        if self.kappa_init < 0:
            raise ValueError("kappa_init must be >= 0")
        if self.fix_kappa is not None and self.fix_kappa < 0:
            raise ValueError("fix_kappa must be >= 0")


@dataclass
class MarginalFitResult:
    params: KappaParams
    nll_per_site: float
    aic: float
    bic: float
    gradient_norm: float
    hessian: np.ndarray
    converged: bool
    n: int = 0
    method: str = "mle"
    starts: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "mu": self.params.mu,
            "sigma": self.params.sigma,
            "kappa": self.params.kappa,
            "nll_per_site": self.nll_per_site,
            "aic": self.aic,
            "bic": self.bic,
            "gradient_norm": self.gradient_norm,
            "converged": self.converged,
            "n": self.n,
            "method": self.method,
        }


def _samples(samples, n_min: int = 1) -> np.ndarray:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < n_min:
        raise ValueError(f"need at least {n_min} samples, got {x.size}")
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise ValueError("samples must be finite and strictly positive")
    return x


def _check_distinct(x: np.ndarray):
    if np.unique(x).size <= 2:
        raise ValueError("degenerate sample: at most two distinct values")


def _log_cosh(u: np.ndarray) -> np.ndarray:
    a = np.abs(u)
    return a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)


def _parts(x: np.ndarray, kappa: float):
    L = np.log(x)
    y = L if kappa <= EPS_KAPPA else np.sinh(kappa * L) / kappa
    return L, y


def nll(samples, p: KappaParams) -> float:
    x = _samples(samples)
    L, y = _parts(x, p.kappa)
    d = y - p.mu
    # ln(x^(κ-1) + x^(-κ-1)) = ln 2 + ln cosh(κL) - L
    jac = math.log(2.0) + _log_cosh(p.kappa * L) - L
    return float(_LOG_2SQRT2PI + math.log(p.sigma) + np.mean(d * d) / (2.0 * p.sigma**2) - np.mean(jac))


def nll_gradient(samples, p: KappaParams) -> np.ndarray:
    x = _samples(samples)
    mu, sigma, kappa = p.as_tuple()
    L, y = _parts(x, kappa)
    d = y - mu
    dy = ln_kappa_dkappa(x, kappa)
    g_mu = -np.mean(d) / sigma**2
    g_sigma = 1.0 / sigma - np.mean(d * d) / sigma**3
    g_kappa = np.mean(d * dy) / sigma**2 - np.mean(L * np.tanh(kappa * L))
    return np.array([g_mu, g_sigma, g_kappa])


def nll_hessian(samples, p: KappaParams) -> np.ndarray:
    """Analytic Hessian of the per-site NLL in (μ, σ, κ).

    H[μ,μ] = 1/σ² (every term is per site).
    """
    x = _samples(samples)
    mu, sigma, kappa = p.as_tuple()
    L, y = _parts(x, kappa)
    d = y - mu
    dy = np.asarray(ln_kappa_dkappa(x, kappa))
    d2y = np.asarray(ln_kappa_dkappa2(x, kappa))
    s2, s3, s4 = sigma**2, sigma**3, sigma**4
    h_mm = 1.0 / s2
    h_ms = 2.0 * np.mean(d) / s3
    h_mk = -np.mean(dy) / s2
    h_ss = -1.0 / s2 + 3.0 * np.mean(d * d) / s4
    h_sk = -2.0 * np.mean(d * dy) / s3
    sech2 = 1.0 / np.cosh(np.clip(kappa * L, -700, 700)) ** 2
    h_kk = np.mean(dy * dy + d * d2y) / s2 - np.mean(L * L * sech2)
    return np.array([[h_mm, h_ms, h_mk], [h_ms, h_ss, h_sk], [h_mk, h_sk, h_kk]])


def _information(nll_site: float, n: int, k: int) -> tuple[float, float]:
    total = 2.0 * n * nll_site
    return 2.0 * k + total, k * math.log(n) + total


def _gaussian_fit(x: np.ndarray, kappa: float) -> tuple[float, float]:
    y = np.asarray(ln_kappa(x, kappa))
    return float(np.mean(y)), float(max(np.std(y), SIGMA_MIN))


def empirical_quantiles(x: np.ndarray, probs) -> np.ndarray:
    # plotting position (i - 0.5)/N with linear interpolation
    return np.quantile(x, probs, method="hazen")


def _sigma_from_levels(q: np.ndarray, mu0: float, kappa: float) -> float:
    z = math.sqrt(2.0) * np.asarray(erf_inv(2.0 * QF_LEVELS - 1.0))
    return float(np.mean((np.asarray(ln_kappa(q, kappa)) - mu0) / z))


def heuristic_start(x: np.ndarray, kappa0: float) -> tuple[float, float, float]:
    """μ₀ = ln_κ(median), σ₀ = average over percentile levels, κ₀ given.

    The p = 0.5 level is skipped since its ratio is 0/0.
    """
    mu0 = float(ln_kappa(np.median(x), kappa0))
    q = empirical_quantiles(x, QF_LEVELS)
    s0 = _sigma_from_levels(q, mu0, kappa0)
    return mu0, max(s0, 1e-3), kappa0


def _projected_grad(g: np.ndarray, theta: np.ndarray, kappa_max: float, fixed_kappa: bool) -> np.ndarray:
    g = g.copy()
    if fixed_kappa:
        g[2] = 0.0
    else:
        if theta[2] <= 0.0 and g[2] > 0:
            g[2] = 0.0
        if theta[2] >= kappa_max and g[2] < 0:
            g[2] = 0.0
    if theta[1] <= SIGMA_MIN and g[1] > 0:
        g[1] = 0.0
    return g


def _newton_polish(x, theta, kappa_max, steps=6):
    theta = theta.copy()
    for _ in range(steps):
        if theta[2] <= 0.0 or theta[2] >= kappa_max:
            return theta
        p = KappaParams(*theta)
        g = nll_gradient(x, p)
        H = nll_hessian(x, p)
        try:
            c = np.linalg.cholesky(H)
        except np.linalg.LinAlgError:
            return theta
        step = np.linalg.solve(c.T, np.linalg.solve(c, g))
        cand = theta - step
        if cand[1] <= SIGMA_MIN or cand[2] < 0.0 or cand[2] > kappa_max:
            return theta
        if nll(x, KappaParams(*cand)) > nll(x, p) + 1e-13:
            return theta
        theta = cand
        if np.linalg.norm(step) < 1e-14:
            break
    return theta


def _result(x, theta, kappa_max, fixed_kappa, tol, method, k=3, starts=None) -> MarginalFitResult:
    p = KappaParams(float(theta[0]), float(theta[1]), float(theta[2]))
    f = nll(x, p)
    g = _projected_grad(nll_gradient(x, p), np.array(p.as_tuple()), kappa_max, fixed_kappa)
    H = nll_hessian(x, p)
    aic, bic = _information(f, x.size, k)
    gn = float(np.linalg.norm(g))
    return MarginalFitResult(p, f, aic, bic, gn, H, gn <= tol, x.size, method, starts or [])


def _fit_fixed_kappa(x: np.ndarray, kappa: float, cfg: FitConfig) -> MarginalFitResult:
    # at fixed κ the MLE of (μ, σ) is the Gaussian fit of ln_κ x
    mu, sigma = _gaussian_fit(x, kappa)
    k = 2 if kappa <= EPS_KAPPA else 3
    return _result(x, (mu, sigma, kappa), cfg.kappa_max, True, max(cfg.tolerance, 1e-8), "mle-fixed-kappa", k=k)


def _start_points(x: np.ndarray, cfg: FitConfig) -> list[tuple[float, float, float]]:
    starts = [heuristic_start(x, min(cfg.kappa_init, cfg.kappa_max))]
    starts.append((*_gaussian_fit(x, 0.0), 0.0))
    extra = cfg.multistart_count - 2
    if extra > 0:
        grid = np.geomspace(0.1, cfg.kappa_max * 0.8, extra) if extra > 1 else np.array([1.0])
        for kap in grid:
            starts.append((*_gaussian_fit(x, float(kap)), float(kap)))
    return starts[: cfg.multistart_count]


def fit_marginal(samples, cfg: FitConfig | None = None) -> MarginalFitResult:
    """Multistart maximum-likelihood fit of (μ, σ, κ)."""
    cfg = cfg or FitConfig()
    x = _samples(samples, n_min=10)
    _check_distinct(x)
    if cfg.fix_kappa is not None:
        return _fit_fixed_kappa(x, float(cfg.fix_kappa), cfg)

    def fun(theta):
        p = KappaParams(theta[0], max(theta[1], SIGMA_MIN), max(theta[2], 0.0))
        return nll(x, p), nll_gradient(x, p)

    bounds = [(None, None), (SIGMA_MIN, None), (0.0, cfg.kappa_max)]
    best = None
    tried = []
    for s in _start_points(x, cfg):
        try:
            res = optimize.minimize(
                fun, np.array(s), jac=True, method="L-BFGS-B", bounds=bounds,
                options={"maxiter": cfg.max_iter, "ftol": 1e-15, "gtol": cfg.tolerance},
            )
        except (ValueError, FloatingPointError) as exc:
            log.debug("start %s failed: %s", s, exc)
            continue
        theta = _newton_polish(x, res.x, cfg.kappa_max)
        theta[1] = max(theta[1], SIGMA_MIN)
        theta[2] = min(max(theta[2], 0.0), cfg.kappa_max)
        f = nll(x, KappaParams(*theta))
        tried.append((tuple(s), tuple(theta), f))
        if best is None or f < best[1]:
            best = (theta, f)
    if best is None:
        raise ArithmeticError("every multistart run failed")
    return _result(x, best[0], cfg.kappa_max, False, cfg.tolerance, "mle", starts=tried)


# --------------------------------------------------------------- quantile fit


@dataclass(frozen=True)
class _QuantileData:
    median: float
    q95: float
    levels: np.ndarray
    values: np.ndarray


def _qf_mu_sigma(qd: _QuantileData, kappa: float) -> tuple[float, float]:
    mu = float(ln_kappa(qd.median, kappa))
    sigma = (float(ln_kappa(qd.q95, kappa)) - mu) / (math.sqrt(2.0) * erf_inv(0.9))
    return mu, sigma


def _qf_cost(qd: _QuantileData, kappa: float) -> float:
    mu, sigma = _qf_mu_sigma(qd, kappa)
    if not sigma > 0:
        return math.inf
    model = np.asarray(quantile(qd.levels, KappaParams(mu, sigma, kappa)))
    return float(np.sqrt(np.sum((qd.values - model) ** 2)))


def fit_quantile_levels(quantile_fn, kappa_max: float = 10.0, grid_size: int = 101) -> tuple[float, float, float]:
    """Quantile-matching estimate from a quantile function p -> Q(p).

    κ minimizes the distance between model and supplied quantiles at the
    percentile levels; μ comes from the median and the final σ from the
    average over levels.
    """
    levels = np.round(np.arange(1, 100) * 0.01, 10)
    qd = _QuantileData(float(quantile_fn(0.5)), float(quantile_fn(0.95)), levels, np.asarray(quantile_fn(levels), float))
    grid = np.linspace(0.0, kappa_max, grid_size)
    costs = np.array([_qf_cost(qd, k) for k in grid])
    i = int(np.nanargmin(costs))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid_size - 1)]
    res = optimize.minimize_scalar(lambda k: _qf_cost(qd, k), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    kappa = float(res.x) if res.fun <= costs[i] else float(grid[i])
    mu = float(ln_kappa(qd.median, kappa))
    qvals = np.asarray(quantile_fn(QF_LEVELS), float)
    sigma = _sigma_from_levels(qvals, mu, kappa)
    return mu, sigma, kappa


def fit_quantile(samples, kappa_max: float = 10.0) -> MarginalFitResult:
    x = _samples(samples, n_min=100)
    _check_distinct(x)
    mu, sigma, kappa = fit_quantile_levels(lambda p: empirical_quantiles(x, p), kappa_max)
    if not sigma > 0:
        raise ValueError("quantile fit produced a non-positive sigma")
    return _result(x, (mu, sigma, kappa), kappa_max, False, math.inf, "quantile")


# --------------------------------------------------------- profile and selection


@dataclass(frozen=True)
class ProfilePoint:
    kappa: float
    mu: float
    sigma: float
    nll: float


def profile_nll(samples, kappa_grid) -> tuple[list[ProfilePoint], ProfilePoint]:
    x = _samples(samples, n_min=2)
    curve = []
    for k in kappa_grid:
        k = float(k)
        if k < 0:
            raise ValueError("kappa grid values must be >= 0")
        mu, sigma = _gaussian_fit(x, k)
        curve.append(ProfilePoint(k, mu, sigma, nll(x, KappaParams(mu, sigma, k))))
    best = min(curve, key=lambda r: r.nll)
    return curve, best


@dataclass
class ModelComparison:
    kappa_lognormal: MarginalFitResult
    lognormal: MarginalFitResult

    @property
    def delta_aic(self) -> float:
        """AIC(lognormal) - AIC(κ-lognormal); positive favors κ-lognormal."""
        return self.lognormal.aic - self.kappa_lognormal.aic

    @property
    def delta_bic(self) -> float:
        return self.lognormal.bic - self.kappa_lognormal.bic

    def to_dict(self) -> dict:
        return {
            "kappa_lognormal": self.kappa_lognormal.to_dict(),
            "lognormal": self.lognormal.to_dict(),
            "delta_aic": self.delta_aic,
            "delta_bic": self.delta_bic,
        }


def model_select(samples, cfg: FitConfig | None = None) -> ModelComparison:
    cfg = cfg or FitConfig()
    free = fit_marginal(samples, FitConfig(**{**cfg.__dict__, "fix_kappa": None}))
    ln = fit_marginal(samples, FitConfig(**{**cfg.__dict__, "fix_kappa": 0.0}))
    return ModelComparison(free, ln)
