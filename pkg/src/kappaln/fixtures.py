"""Bundled synthetic data sets and the seeds that regenerate them."""

from __future__ import annotations

import math
from importlib import resources

import numpy as np

from .distribution import KappaParams
from .process import LDHO, ExpAniso, LatentGaussianModel, simulate

LDHO_SEED = 1001
FIELD_SEED = 2002
MODEL_A_SEED = 3003

LDHO_MODEL = LatentGaussianModel.build(KappaParams(1.0, 1.0, 3.0), LDHO(1.0, 30.0, 2 * math.pi / 50))
# latent parameters on the scale of the Berea permeability fit
FIELD_MODEL = LatentGaussianModel.build(
    KappaParams(21.24, math.sqrt(34.64), 0.88), ExpAniso(1.0, 3.39, 10.3, 0.95), noise_var=1.84
)


def grid_coords(side: int = 40) -> np.ndarray:
    g = np.arange(side, dtype=float)
    X, Y = np.meshgrid(g, g, indexing="ij")
    return np.column_stack([X.ravel(), Y.ravel()])


def make_ldho_series(n: int = 1024, seed: int = LDHO_SEED) -> tuple[np.ndarray, np.ndarray]:
    t = np.arange(n, dtype=float)
    return t, simulate(LDHO_MODEL, t, seed)[0]


def make_field(side: int = 40, seed: int = FIELD_SEED) -> tuple[np.ndarray, np.ndarray]:
    c = grid_coords(side)
    return c, simulate(FIELD_MODEL, c, seed)[0]


def make_model_a_sample(n: int = 1000, seed: int = MODEL_A_SEED) -> np.ndarray:
    from .process import make_rng
    from .distribution import sample

    return sample(KappaParams(1.0, 1.0, 3.0), n, make_rng(seed))


def data_path(name: str):
    return resources.files("kappaln") / "data" / name
