"""Simulation studies shared by the experiment scripts and the acceptance suite."""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distribution import KappaParams, count_positive_roots, sample, sextic_coefficients
from .estimation import FitConfig, fit_marginal, fit_quantile
from .fixtures import FIELD_MODEL, LDHO_MODEL, grid_coords
from .process import LatentGaussianModel, ProcessFitConfig, SampleSet, fit_process, make_rng, simulate
from .regression import CvReport, cross_validate, forecast, interpolate_grid, posterior, prediction_interval


@dataclass
class EnsembleSummary:
    mean: np.ndarray
    std: np.ndarray
    estimates: np.ndarray = field(repr=False)


def mle_ensemble(truth: tuple[float, float, float], n_samples: int = 1000, n_real: int = 100, seed: int = 0,
                 quantile_fit: bool = True) -> dict[str, EnsembleSummary]:
    """Fit independent samples of size n_samples; summarize MLE and quantile fits."""
    rng = make_rng(seed)
    p = KappaParams(*truth)
    mle, qf = [], []
    for _ in range(n_real):
        x = sample(p, n_samples, rng)
        mle.append(fit_marginal(x, FitConfig()).params.as_tuple())
        if quantile_fit:
            qf.append(fit_quantile(x).params.as_tuple())
    out = {}
    for name, arr in (("mle", mle), ("quantile", qf)):
        if arr:
            a = np.array(arr)
            out[name] = EnsembleSummary(a.mean(axis=0), a.std(axis=0, ddof=1), a)
    return out


def mode_census(n: int = 100) -> dict[int, float]:
    """Fraction of the (μ, σ, κ) grid with 1, 3 or 5 positive sextic roots."""
    mu = np.linspace(-5.0, 5.0, n)
    sig = np.linspace(0.0, 3.0, n)
    kap = np.linspace(0.0, 5.0, n)
    counts = np.zeros(7, dtype=np.int64)
    S, K = np.meshgrid(sig, kap, indexing="ij")
    for m in mu:
        a, b, c = sextic_coefficients(m, S, K)
        r = count_positive_roots(a, b, c)
        counts += np.bincount(r.ravel(), minlength=7)
    total = counts.sum()
    return {r: counts[r] / total for r in range(7)}


def _better(name: str, a: float, b: float) -> bool:
    if name == "me":
        return abs(a) < abs(b)
    if name == "pearson_r":
        return a > b
    return a < b


MEASURES = ("me", "mae", "mare", "rmse", "rrmse", "pearson_r")


@dataclass
class ForecastStudy:
    median: dict
    mode: dict
    wins_median: int
    n_real: int
    params: np.ndarray = field(repr=False)
    seconds: float = 0.0


def _forecast_one(args):
    t, x, n_tr = args
    train = SampleSet(t[:n_tr], x[:n_tr])
    fit = fit_process(train, "ldho")
    pred = forecast(fit.model, train, t[n_tr:])
    k, m = fit.model.kernel, fit.model.marginal
    return (cross_validate(pred.median, x[n_tr:]).as_tuple(), cross_validate(pred.mode, x[n_tr:]).as_tuple(),
            (m.mu, m.sigma, m.kappa, k.tau_c, k.omega_d))


def ldho_forecast_study(n_real: int = 500, n: int = 1024, train_frac: float = 0.95, seed: int = 7,
                        model: LatentGaussianModel = LDHO_MODEL, progress=None, workers: int | None = None) -> ForecastStudy:
    """Simulate, fit, forecast multi-step; average the CV measures over realizations.

    Realizations are independent, so ``workers`` > 1 spreads them over processes
    (default: one per CPU).
    """
    t0 = time.time()
    t = np.arange(n, dtype=float)
    X = simulate(model, t, seed, n_real)
    n_tr = int(math.floor(train_frac * n))
    jobs = ((t, X[r], n_tr) for r in range(n_real))
    workers = workers or os.cpu_count() or 1
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = []
            for r, res in enumerate(pool.map(_forecast_one, jobs, chunksize=4)):
                results.append(res)
                if progress:
                    progress(r)
    else:
        results = []
        for r, job in enumerate(jobs):
            results.append(_forecast_one(job))
            if progress:
                progress(r)
    med, mod, params = (np.array(v) for v in zip(*results))
    med_avg = dict(zip(MEASURES, map(float, np.nanmean(med, axis=0))))
    mod_avg = dict(zip(MEASURES, map(float, np.nanmean(mod, axis=0))))
    wins = int(sum(_better(k, med_avg[k], mod_avg[k]) for k in MEASURES))
    return ForecastStudy(med_avg, mod_avg, wins, n_real, params, time.time() - t0)


def coverage_trials(n_trials: int = 10_000, n_train: int = 60, alpha: float = 0.05, seed: int = 11,
                    model: LatentGaussianModel = LDHO_MODEL) -> float:
    """Fraction of revealed values inside the (1-α) interval under the true model.

    Each trial is a fresh realization on n_train + 1 times; the last value
    is predicted from the others and then revealed.
    """
    t = np.arange(n_train + 1, dtype=float)
    X = simulate(model, t, seed, n_trials)
    hits = 0
    for r in range(n_trials):
        pm = posterior(model, SampleSet(t[:n_train], X[r, :n_train]), t[n_train:])
        lo, hi = prediction_interval(pm, alpha)
        hits += bool(lo[0] <= X[r, n_train] <= hi[0])
    return hits / n_trials


@dataclass
class SpatialStudy:
    exp_cv: CvReport
    exp_fit: dict
    matern_cv: CvReport | None
    matern_fit: dict | None
    seconds: float


def spatial_study(n_train: int = 1100, seed: int = 5, matern: bool = True,
                  model: LatentGaussianModel = FIELD_MODEL, side: int = 40) -> SpatialStudy:
    t0 = time.time()
    coords = grid_coords(side)
    x = simulate(model, coords, seed)[0]
    perm = make_rng(seed + 1).permutation(x.size)
    tr, te = np.sort(perm[:n_train]), np.sort(perm[n_train:])
    train = SampleSet(coords[tr], x[tr])
    cfg = ProcessFitConfig(estimate_noise=True)
    fe = fit_process(train, "exp", cfg)
    pe = interpolate_grid(fe.model, train, coords[te])
    out = [cross_validate(pe.median, x[te]), fe.to_dict()]
    if matern:
        fm = fit_process(train, "matern", cfg)
        pmat = interpolate_grid(fm.model, train, coords[te])
        out += [cross_validate(pmat.median, x[te]), fm.to_dict()]
    else:
        out += [None, None]
    return SpatialStudy(*out, seconds=time.time() - t0)
