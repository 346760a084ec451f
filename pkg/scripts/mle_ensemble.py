"""MLE vs quantile-fitting ensembles for models A (1,1,3) and B (1,0.5,0.5)."""

import sys

import numpy as np

from kappaln.studies import mle_ensemble

n_real = int(sys.argv[1]) if len(sys.argv) > 1 else 100
np.set_printoptions(precision=4, suppress=True)
for name, truth in (("A", (1.0, 1.0, 3.0)), ("B", (1.0, 0.5, 0.5))):
    out = mle_ensemble(truth, n_real=n_real, seed=hash(name) % 1000)
    for method, s in out.items():
        print(f"model {name} {method:8s} mean {s.mean} std {s.std}")
