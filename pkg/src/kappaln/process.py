"""κ-lognormal random fields and time series.

X(s) = exp_κ(Y(s)) with Y a stationary Gaussian process with mean μ and
covariance C(r) = σ² ρ(r; θ). Covariance kernels, exact simulation through
the principal square root, the joint negative log-likelihood, and the staged
fit (marginal first, then kernel parameters at fixed κ) live here.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Literal, Union

import numpy as np
from scipy import linalg, optimize
from scipy import special as _sp

from .distribution import KappaParams, log_jacobian
from .estimation import FitConfig, MarginalFitResult, fit_marginal
from .kappa import exp_kappa, ln_kappa

log = logging.getLogger(__name__)

RNG_ALGORITHM = "numpy.Philox(4x64-10)"


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator; the stream is pinned by the seed alone."""
    return np.random.Generator(np.random.Philox(int(seed)))


# ------------------------------------------------------------------- kernels


def _as_lags(lag, dim: int) -> np.ndarray:
    r = np.asarray(lag, dtype=float)
    if dim == 1:
        if r.ndim >= 1 and r.shape[-1] == 1:
            r = r[..., 0]
        return r
    if r.shape[-1] != dim:
        raise ValueError(f"expected lag vectors of length {dim}")
    return r


@dataclass(frozen=True)
class LDHO:
    """Linear damped harmonic oscillator kernel for 1-D lags."""

    sigma2: float
    tau_c: float
    omega_d: float
    dim = 1

    def __post_init__(self):
        if not (self.sigma2 > 0 and self.tau_c > 0 and self.omega_d >= 0):
            raise ValueError("LDHO needs sigma2 > 0, tau_c > 0, omega_d >= 0")

    def correlation(self, lag):
        t = np.abs(_as_lags(lag, 1))
        w = self.omega_d
        # sin(ωt)/ω written through sinc so ω -> 0 gives t
        sin_over_w = t * np.sinc(w * t / math.pi)
        return np.exp(-t / (2.0 * self.tau_c)) * (np.cos(w * t) + sin_over_w / (2.0 * self.tau_c))


def _aniso_distance(r: np.ndarray, rho: float, phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    u = c * r[..., 0] + s * r[..., 1]
    v = -s * r[..., 0] + c * r[..., 1]
    return np.sqrt(u * u + (v / rho) ** 2)


@dataclass(frozen=True)
class ExpAniso:
    """exp(-h/ξ) with h² = rᵀM⁻¹r; ρ ≥ 1 stretches the axis orthogonal to φ."""

    sigma2: float
    xi: float
    rho: float = 1.0
    phi: float = 0.0
    dim = 2

    def __post_init__(self):
        if not (self.sigma2 > 0 and self.xi > 0 and self.rho >= 1.0):
            raise ValueError("ExpAniso needs sigma2 > 0, xi > 0, rho >= 1")

    def correlation(self, lag):
        h = _aniso_distance(_as_lags(lag, 2), self.rho, self.phi)
        return np.exp(-h / self.xi)


@dataclass(frozen=True)
class MaternAniso:
    sigma2: float
    xi: float
    nu: float
    rho: float = 1.0
    phi: float = 0.0
    dim = 2

    def __post_init__(self):
        if not (self.sigma2 > 0 and self.xi > 0 and self.nu > 0 and self.rho >= 1.0):
            raise ValueError("MaternAniso needs sigma2, xi, nu > 0 and rho >= 1")

    def correlation(self, lag):
        h = _aniso_distance(_as_lags(lag, 2), self.rho, self.phi)
        arg = math.sqrt(2.0 * self.nu) * h / self.xi
        out = np.ones_like(arg)
        pos = arg > 0
        a = arg[pos]
        with np.errstate(under="ignore"):
            out[pos] = 2.0 ** (1.0 - self.nu) / _sp.gamma(self.nu) * a**self.nu * _sp.kv(self.nu, a)
        return out


@dataclass(frozen=True)
class WhiteNoise:
    sigma2: float
    dim: int = 1

    def correlation(self, lag):
        r = _as_lags(lag, self.dim)
        d = np.abs(r) if self.dim == 1 else np.linalg.norm(r, axis=-1)
        return (d == 0).astype(float)


KernelSpec = Union[LDHO, ExpAniso, MaternAniso, WhiteNoise]


def kernel_eval(k: KernelSpec, lag):
    v = k.sigma2 * k.correlation(lag)
    return float(v) if np.ndim(v) == 0 else v


# -------------------------------------------------------------- data records


@dataclass(frozen=True)
class SampleSet:
    coords: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.ndim == 1:
            c = c[:, None]
        v = np.asarray(self.values, dtype=float).ravel()
        if c.shape[0] != v.size:
            raise ValueError("coords and values differ in length")
        if np.any(~(v > 0)):
            raise ValueError("values must be strictly positive")
        object.__setattr__(self, "coords", c)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def subset(self, idx) -> "SampleSet":
        return SampleSet(self.coords[idx], self.values[idx])


@dataclass(frozen=True)
class LatentGaussianModel:
    marginal: KappaParams
    kernel: KernelSpec
    noise_var: float = 0.0

    def __post_init__(self):
        if self.noise_var < 0:
            raise ValueError("noise_var must be >= 0")
        s2 = self.marginal.sigma**2
        if abs(self.kernel.sigma2 - s2) > 1e-9 * s2:
            raise ValueError("kernel sigma2 must equal marginal sigma^2")

    @classmethod
    def build(cls, marginal: KappaParams, kernel: KernelSpec, noise_var: float = 0.0) -> "LatentGaussianModel":
        """Construct with the kernel variance tied to the marginal σ²."""
        return cls(marginal, replace(kernel, sigma2=marginal.sigma**2), noise_var)


def _coords(coords) -> np.ndarray:
    c = np.asarray(coords, dtype=float)
    return c[:, None] if c.ndim == 1 else c


def pairwise_lags(a, b) -> np.ndarray:
    a, b = _coords(a), _coords(b)
    return a[:, None, :] - b[None, :, :]


def cross_cov(k: KernelSpec, a, b) -> np.ndarray:
    return k.sigma2 * k.correlation(pairwise_lags(a, b))


def cov_matrix(k: KernelSpec, coords, noise_var: float = 0.0) -> np.ndarray:
    c = _coords(coords)
    C = cross_cov(k, c, c)
    C = 0.5 * (C + C.T)
    C[np.diag_indices_from(C)] = k.sigma2 + noise_var
    return C


class FactorizationError(np.linalg.LinAlgError):
    pass


def jittered_cholesky(C: np.ndarray, scale: float) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor; jitter starts at 1e-10·scale and grows ×10 to 1e-6·scale."""
    jitter = 0.0
    for jitter in (0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6):
        try:
            A = C if jitter == 0.0 else C + jitter * scale * np.eye(C.shape[0])
            return linalg.cholesky(A, lower=True, check_finite=False), jitter * scale
        except linalg.LinAlgError:
            continue
    raise FactorizationError("covariance matrix is not positive definite within jitter 1e-6")


def principal_sqrt(C: np.ndarray) -> np.ndarray:
    w, V = linalg.eigh(C, check_finite=False)
    if w.min() < -1e-8 * max(w.max(), 1e-300):
        raise FactorizationError(f"covariance is indefinite (min eigenvalue {w.min():.3e})")
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


def simulate(model: LatentGaussianModel, coords, seed: int, n_realizations: int = 1, *, latent: bool = False) -> np.ndarray:
    """Draw realizations of X on ``coords``; returns shape (n_realizations, N).

    The latent field is μ + A z with A the principal square root of the
    covariance (noise included on the diagonal); deterministic in ``seed``.
    """
    C = cov_matrix(model.kernel, coords, model.noise_var)
    A = principal_sqrt(C)
    z = make_rng(seed).standard_normal((int(n_realizations), C.shape[0]))
    y = model.marginal.mu + z @ A
    return y if latent else np.asarray(exp_kappa(y, model.marginal.kappa))


def joint_nll(model: LatentGaussianModel, data: SampleSet) -> float:
    """-ln of the joint density of the observations (total, not per site).

    ½ln|C| + ½(y-μ1)ᵀC⁻¹(y-μ1) + (N/2)ln2π - Σ ln[(x^(κ-1) + x^(-κ-1))/2],
    with y = ln_κ x and C = σ²ρ(θ) + σ²_ε I.
    """
    mu, sigma, kappa = model.marginal.as_tuple()
    C = cov_matrix(model.kernel, data.coords, model.noise_var)
    L, _ = jittered_cholesky(C, sigma**2)
    r = np.asarray(ln_kappa(data.values, kappa)) - mu
    w = linalg.solve_triangular(L, r, lower=True, check_finite=False)
    n = r.size
    return float(
        np.sum(np.log(np.diag(L))) + 0.5 * w @ w + 0.5 * n * math.log(2.0 * math.pi)
        - np.sum(log_jacobian(data.values, kappa))
    )


# ------------------------------------------------------------------- fitting

Family = Literal["ldho", "exp", "matern"]


@dataclass(frozen=True)
class ProcessFitConfig:
    marginal: FitConfig = field(default_factory=FitConfig)
    estimate_noise: bool = False
    anisotropic: bool = True
    n_starts: int = 2
    max_iter: int = 200
    starts: tuple = ()
    nu_bounds: tuple[float, float] = (0.25, 3.5)


@dataclass
class ProcessFitResult:
    model: LatentGaussianModel
    nll: float
    converged: bool
    marginal_fit: MarginalFitResult
    n_evaluations: int = 0

    def to_dict(self) -> dict:
        k = self.model.kernel
        kern = {f: getattr(k, f) for f in k.__dataclass_fields__}
        kern["family"] = type(k).__name__
        return {
            "mu": self.model.marginal.mu,
            "sigma": self.model.marginal.sigma,
            "kappa": self.model.marginal.kappa,
            "noise_var": self.model.noise_var,
            "kernel": kern,
            "nll": self.nll,
            "converged": self.converged,
        }


class _Concentrated:
    """Concentrated GP likelihood at fixed κ.

    For correlation matrix R = ρ(θ) + ηI the mean and variance have closed
    forms, μ̂ = 1ᵀR⁻¹y / 1ᵀR⁻¹1 and σ̂² = rᵀR⁻¹r / N, so only θ and η are
    searched numerically. The optimum equals that of the full likelihood.
    """

    def __init__(self, coords: np.ndarray, y: np.ndarray, family: Family, cfg: ProcessFitConfig):
        self.y = y
        self.n = y.size
        self.family = family
        self.cfg = cfg
        self.evals = 0
        # uniformly spaced 1-D coordinates give a Toeplitz correlation matrix
        self.first_col = None
        if coords.shape[1] == 1 and coords.shape[0] > 2:
            d = np.diff(coords[:, 0])
            if np.all(d > 0) and np.ptp(d) <= 1e-9 * d.mean():
                self.first_col = coords[:, 0] - coords[0, 0]
        self.lags = self.inverse = None
        if self.first_col is None:
            lags = pairwise_lags(coords, coords).reshape(-1, coords.shape[1])
            # gridded data repeat lag vectors; evaluate each distinct one once
            uniq, inv = np.unique(np.round(lags, 9), axis=0, return_inverse=True)
            if uniq.shape[0] < 0.25 * lags.shape[0]:
                self.lags, self.inverse = uniq, inv.ravel()
            else:
                self.lags = lags

    def unpack(self, v: np.ndarray) -> tuple[KernelSpec, float]:
        v = list(v)
        eta = math.exp(v.pop()) if self.cfg.estimate_noise else 0.0
        if self.family == "ldho":
            return LDHO(1.0, math.exp(v[0]), math.exp(v[1])), eta
        xi = math.exp(v[0])
        if self.cfg.anisotropic:
            rho, phi = 1.0 + math.exp(v[1]), v[2]
            rest = v[3:]
        else:
            rho, phi, rest = 1.0, 0.0, v[1:]
        if self.family == "exp":
            return ExpAniso(1.0, xi, rho, phi), eta
        return MaternAniso(1.0, xi, rest[0], rho, phi), eta

    def solve(self, v):
        k, eta = self.unpack(v)
        if self.first_col is not None:
            R = linalg.toeplitz(k.correlation(self.first_col))
        else:
            R = k.correlation(self.lags)
            if self.inverse is not None:
                R = R[self.inverse]
            R = R.reshape(self.n, self.n)
            R = 0.5 * (R + R.T)
        R[np.diag_indices_from(R)] = 1.0 + eta
        L, _ = jittered_cholesky(R, 1.0)
        ones = np.ones(self.n)
        a = linalg.solve_triangular(L, ones, lower=True, check_finite=False)
        b = linalg.solve_triangular(L, self.y, lower=True, check_finite=False)
        mu = float(a @ b / (a @ a))
        w = b - mu * a
        s2 = float(w @ w / self.n)
        return k, eta, mu, s2, float(np.sum(np.log(np.diag(L))))

    def __call__(self, v) -> float:
        self.evals += 1
        try:
            _, _, _, s2, logdet = self.solve(v)
        except (FactorizationError, ValueError, OverflowError):
            return 1e30
        if not s2 > 0:
            return 1e30
        return 0.5 * self.n * math.log(s2) + logdet

    def bounds(self):
        if self.family == "ldho":
            b = [(math.log(1e-2), math.log(1e5)), (math.log(1e-6), math.log(math.pi))]
        else:
            b = [(math.log(1e-3), math.log(1e4))]
            if self.cfg.anisotropic:
                b += [(math.log(1e-4), math.log(200.0)), (-2 * math.pi, 2 * math.pi)]
            if self.family == "matern":
                b += [self.cfg.nu_bounds]
        if self.cfg.estimate_noise:
            b += [(math.log(1e-8), math.log(10.0))]
        return b


def _ldho_candidates(t: np.ndarray, y: np.ndarray) -> list[list[float]]:
    span = float(t.max() - t.min())
    cands = [[span / 2.0, 2.0 * math.pi / (span / 10.0)]]
    # dominant periodogram frequency for uniformly spaced series
    dt = np.median(np.diff(np.sort(t)))
    spec = np.abs(np.fft.rfft(y - y.mean())) ** 2
    freqs = 2.0 * math.pi * np.fft.rfftfreq(y.size, d=dt)
    if spec.size > 2:
        w_peak = float(freqs[1 + np.argmax(spec[1:])])
        for tau in (span / 2.0, span / 10.0, span / 30.0, span / 100.0):
            cands.append([tau, w_peak])
    for tau in (span / 10.0, span / 30.0):
        cands.append([tau, 2.0 * math.pi / (span / 10.0)])
    return [[math.log(a), math.log(max(b, 1e-6))] for a, b in cands]


def _spatial_candidates(coords: np.ndarray, family: Family, cfg: ProcessFitConfig) -> list[list[float]]:
    extent = float(np.max(np.ptp(coords, axis=0)))
    out = []
    for xi in (extent / 20.0, extent / 8.0, extent / 3.0):
        if cfg.anisotropic:
            for rho in (2.0, 6.0):
                for phi in (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4):
                    out.append([math.log(xi / math.sqrt(rho)), math.log(rho - 1.0), phi])
        else:
            out.append([math.log(xi)])
    if family == "matern":
        out = [v + [nu] for v in out for nu in (0.5, 1.5)]
    return out


def fit_process(data: SampleSet, kernel_family: Family, cfg: ProcessFitConfig | None = None) -> ProcessFitResult:
    """Staged estimation: marginal MLE for κ, then kernel parameters at fixed κ."""
    cfg = cfg or ProcessFitConfig()
    if len(data) < 20:
        raise ValueError("fit_process needs at least 20 observations")
    if kernel_family not in ("ldho", "exp", "matern"):
        raise ValueError(f"unknown kernel family {kernel_family!r}")
    mfit = fit_marginal(data.values, cfg.marginal)
    kappa = mfit.params.kappa
    y = np.asarray(ln_kappa(data.values, kappa))
    obj = _Concentrated(data.coords, y, kernel_family, cfg)

    if cfg.starts:
        cands = [list(s) for s in cfg.starts]
    elif kernel_family == "ldho":
        cands = _ldho_candidates(data.coords[:, 0], y)
    else:
        cands = _spatial_candidates(data.coords, kernel_family, cfg)
    if cfg.estimate_noise:
        cands = [c + [math.log(eta)] for c in cands for eta in (1e-3, 0.1)]
    bounds = obj.bounds()
    cands = [np.clip(c, [b[0] for b in bounds], [b[1] for b in bounds]) for c in cands]
    scores = [obj(c) for c in cands]
    order = np.argsort(scores)[: max(cfg.n_starts, 1)]

    best = None
    for i in order:
        res = optimize.minimize(obj, cands[i], method="L-BFGS-B", bounds=bounds, options={"maxiter": cfg.max_iter})
        log.debug("start %s -> %s (%s)", cands[i], res.fun, res.message)
        if best is None or res.fun < best.fun:
            best = res
    k, eta, mu, s2, _ = obj.solve(best.x)
    if isinstance(k, (ExpAniso, MaternAniso)):
        k = replace(k, phi=float(np.mod(k.phi, math.pi)))
    marginal = KappaParams(mu, math.sqrt(s2), kappa)
    model = LatentGaussianModel.build(marginal, k, eta * s2)
    return ProcessFitResult(model, joint_nll(model, data), bool(best.success), mfit, obj.evals)
