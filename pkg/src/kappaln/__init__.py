"""κ-lognormal distributions, moments, estimation and warped GP regression."""

__version__ = "0.1.0"

from .distribution import KappaParams, ModeReport, cdf, hazard, mode_report, pdf, quantile, sample, survival
from .estimation import FitConfig, MarginalFitResult, fit_marginal, fit_quantile, model_select, nll, profile_nll
from .kappa import exp_kappa, ln_kappa
from .moments import MomentRequest, moment
from .process import LDHO, ExpAniso, LatentGaussianModel, MaternAniso, SampleSet, fit_process, joint_nll, make_rng, simulate
from .regression import CvReport, PredictiveMarginal, cross_validate, forecast, interpolate_grid, posterior

__all__ = [
    "KappaParams", "ModeReport", "pdf", "cdf", "survival", "quantile", "hazard", "mode_report", "sample",
    "FitConfig", "MarginalFitResult", "fit_marginal", "fit_quantile", "model_select", "nll", "profile_nll",
    "exp_kappa", "ln_kappa", "MomentRequest", "moment",
    "LDHO", "ExpAniso", "MaternAniso", "LatentGaussianModel", "SampleSet", "fit_process", "joint_nll", "simulate", "make_rng",
    "CvReport", "PredictiveMarginal", "posterior", "forecast", "interpolate_grid", "cross_validate",
]
