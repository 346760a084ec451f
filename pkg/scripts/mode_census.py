"""Share of (μ, σ, κ) grid nodes whose density has 1, 3 or 5 stationary points."""

from kappaln.studies import mode_census

frac = mode_census(100)
for r in (1, 3, 5):
    print(f"{r} positive roots: {100 * frac[r]:.2f}%")
