"""Warped GP prediction for κ-lognormal processes.

Conditioning happens on the latent y = ln_κ(x). Predictions are mapped back
through quantile invariance: the median is exp_κ(μ*), intervals are
exp_κ(μ* ± zσ*), and the mode comes from the predictive κLN(μ*, σ*, κ).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import linalg

from .distribution import KappaParams, logpdf, sextic_coefficients, sextic_roots, positive_root_mask, sextic_eval
from .kappa import EPS_KAPPA, exp_kappa, ln_kappa
from .process import LatentGaussianModel, SampleSet, cross_cov, cov_matrix, jittered_cholesky, _coords
from .special import erf_inv


@dataclass(frozen=True)
class PredictiveMarginal:
    """Latent posterior mean and variance per target, vectorized.

    Indexing returns the marginal of a single target.
    """

    mu_star: np.ndarray
    sigma_star2: np.ndarray
    kappa: float

    def __post_init__(self):
        object.__setattr__(self, "mu_star", np.atleast_1d(np.asarray(self.mu_star, float)))
        object.__setattr__(self, "sigma_star2", np.atleast_1d(np.asarray(self.sigma_star2, float)))
        if np.any(self.sigma_star2 < 0):
            raise ValueError("sigma_star2 must be non-negative")

    def __len__(self):
        return self.mu_star.size

    def __getitem__(self, i) -> "PredictiveMarginal":
        return PredictiveMarginal(self.mu_star[i], self.sigma_star2[i], self.kappa)

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def sigma_star(self) -> np.ndarray:
        return np.sqrt(self.sigma_star2)


@dataclass(frozen=True)
class CvReport:
    me: float
    mae: float
    mare: float
    rmse: float
    rrmse: float
    pearson_r: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)

    def as_tuple(self) -> tuple:
        return (self.me, self.mae, self.mare, self.rmse, self.rrmse, self.pearson_r)


class _Conditioner:
    """Shared factorization of C(S,S) + σ²_ε I for repeated posterior solves."""

    def __init__(self, model: LatentGaussianModel, train: SampleSet):
        if len(train) < 1:
            raise ValueError("training set is empty")
        self.model = model
        self.coords = train.coords
        s2 = model.marginal.sigma ** 2
        C = cov_matrix(model.kernel, train.coords, model.noise_var)
        self.L, _ = jittered_cholesky(C, s2)
        r = np.asarray(ln_kappa(train.values, model.marginal.kappa)) - model.marginal.mu
        self.alpha = linalg.cho_solve((self.L, True), r, check_finite=False)

    def predict(self, targets) -> PredictiveMarginal:
        m = self.model
        t = _coords(targets)
        Ks = cross_cov(m.kernel, t, self.coords)
        mu = m.marginal.mu + Ks @ self.alpha
        V = linalg.solve_triangular(self.L, Ks.T, lower=True, check_finite=False)
        s2 = m.marginal.sigma ** 2 - np.sum(V * V, axis=0)
        return PredictiveMarginal(mu, np.clip(s2, 0.0, None), m.marginal.kappa)


def posterior(model: LatentGaussianModel, train: SampleSet, targets) -> PredictiveMarginal:
    return _Conditioner(model, train).predict(targets)


def predict_median(pm: PredictiveMarginal) -> np.ndarray:
    return np.asarray(exp_kappa(pm.mu_star, pm.kappa))


def _mode_one(mu: float, s2: float, kappa: float) -> float:
    if s2 <= 0.0:
        return float(exp_kappa(mu, kappa))
    if kappa <= EPS_KAPPA:
        return math.exp(mu - s2)
    p = KappaParams(mu, math.sqrt(s2), kappa)
    a, b, c = (float(v) for v in sextic_coefficients(mu, p.sigma, kappa))
    roots = sextic_roots(a, b, c)
    zs = np.sort(roots.real[positive_root_mask(roots)])
    xs = zs ** (1.0 / kappa)
    lp = np.asarray(logpdf(xs, p))
    return float(xs[np.argmax(lp >= lp.max() + math.log1p(-1e-12))])


def predict_mode(pm: PredictiveMarginal) -> np.ndarray:
    """Global maximum of each predictive density.

    Roots of all sextics are found in one batched eigenvalue call; ties
    within 1e-12 relative go to the smaller x.
    """
    mu, s2, kappa = pm.mu_star, pm.sigma_star2, pm.kappa
    out = np.empty(mu.size)
    if kappa <= EPS_KAPPA:
        return np.exp(mu - s2)
    degenerate = s2 <= 0.0
    out[degenerate] = np.asarray(exp_kappa(mu[degenerate], kappa))
    idx = np.flatnonzero(~degenerate)
    if idx.size == 0:
        return out
    sig = np.sqrt(s2[idx])
    a, b, c = sextic_coefficients(mu[idx], sig, kappa)
    roots = sextic_roots(a, b, c)
    mask = positive_root_mask(roots)
    for j, i in enumerate(idx):
        zs = np.sort(roots[j].real[mask[j]])
        if zs.size == 0:
            out[i] = _mode_one(mu[i], s2[i], kappa)
            continue
        with np.errstate(over="ignore"):
            xs = zs ** (1.0 / kappa)
        lp = np.asarray(logpdf(xs, KappaParams(float(mu[i]), float(sig[j]), kappa)))
        out[i] = xs[np.argmax(lp >= lp.max() + math.log1p(-1e-12))]
    return out


def prediction_interval(pm: PredictiveMarginal, alpha: float = 0.05) -> tuple[np.ndarray, np.ndarray]:
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    z = math.sqrt(2.0) * erf_inv(1.0 - alpha)
    s = pm.sigma_star
    lo = np.asarray(exp_kappa(pm.mu_star - z * s, pm.kappa))
    hi = np.asarray(exp_kappa(pm.mu_star + z * s, pm.kappa))
    return lo, hi


@dataclass
class Prediction:
    """Per-target median, mode and interval bounds."""

    coords: np.ndarray
    median: np.ndarray
    mode: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    marginal: PredictiveMarginal

    def rows(self):
        for i in range(self.median.size):
            yield (*np.atleast_1d(self.coords[i]), self.median[i], self.mode[i], self.lo[i], self.hi[i])


def _predict(pm: PredictiveMarginal, coords, alpha: float) -> Prediction:
    lo, hi = prediction_interval(pm, alpha)
    return Prediction(_coords(coords), predict_median(pm), predict_mode(pm), lo, hi, pm)


def forecast(
    model: LatentGaussianModel,
    train: SampleSet,
    targets,
    strategy: Literal["multi_step", "one_step_recursive"] = "multi_step",
    truths=None,
    alpha: float = 0.05,
) -> Prediction:
    """Forecast at ``targets`` (future times).

    ``multi_step`` conditions once on ``train``. ``one_step_recursive`` adds
    each revealed truth to the conditioning set before the next step, so
    ``truths`` is required; model parameters stay frozen.
    """
    t = _coords(targets)
    if t.shape[0] < 1:
        raise ValueError("horizon must be >= 1")
    if strategy == "multi_step":
        return _predict(posterior(model, train, t), t, alpha)
    if strategy != "one_step_recursive":
        raise ValueError(f"unknown strategy {strategy!r}")
    if truths is None:
        raise ValueError("one_step_recursive needs the revealed truths")
    truths = np.asarray(truths, float)
    mus, s2s = [], []
    coords, values = train.coords, train.values
    for i in range(t.shape[0]):
        pm = posterior(model, SampleSet(coords, values), t[i : i + 1])
        mus.append(pm.mu_star[0])
        s2s.append(pm.sigma_star2[0])
        coords = np.vstack([coords, t[i : i + 1]])
        values = np.append(values, truths[i])
    pm = PredictiveMarginal(np.array(mus), np.array(s2s), model.marginal.kappa)
    return _predict(pm, t, alpha)


def interpolate_grid(model: LatentGaussianModel, train: SampleSet, grid, alpha: float = 0.05) -> Prediction:
    return _predict(posterior(model, train, grid), grid, alpha)


def cross_validate(predictions, truths) -> CvReport:
    pred = np.asarray(predictions, float).ravel()
    true = np.asarray(truths, float).ravel()
    if pred.size != true.size or pred.size < 2:
        raise ValueError("predictions and truths need equal length >= 2")
    if np.any(true == 0) or true.mean() == 0:
        raise ZeroDivisionError("truth values must be non-zero with non-zero mean")
    err = pred - true
    rmse = float(np.sqrt(np.mean(err**2)))
    if np.std(pred) == 0 or np.std(true) == 0:
        r = float("nan")
    else:
        r = float(np.corrcoef(pred, true)[0, 1])
    return CvReport(
        me=float(err.mean()),
        mae=float(np.abs(err).mean()),
        mare=float(np.mean(np.abs(err) / np.abs(true))),
        rmse=rmse,
        rrmse=rmse / float(true.mean()),
        pearson_r=r,
    )
