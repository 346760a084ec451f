"""Forecasting study: LDHO κ-lognormal series, fit on the first 95%, forecast the rest.

Usage: python scripts/ldho_forecast_study.py [n_realizations] [seed]
"""

import json
import sys

from kappaln.studies import ldho_forecast_study

n_real = int(sys.argv[1]) if len(sys.argv) > 1 else 500
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 7


def tick(r):
    if (r + 1) % 25 == 0:
        print(f"  {r + 1}/{n_real}", file=sys.stderr, flush=True)


res = ldho_forecast_study(n_real=n_real, seed=seed, progress=tick)
print(json.dumps({"median": res.median, "mode": res.mode, "median_wins": res.wins_median,
                  "n_real": res.n_real, "seconds": round(res.seconds, 1)}, indent=2))
med = res.params.mean(axis=0)
print("mean fitted (mu, sigma, kappa, tau_c, omega_d):", [round(float(v), 4) for v in med])
