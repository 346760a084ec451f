"""Print ℓ-th roots of moments and bounds at μ=5, σ=2 for the four κ rows."""

from kappaln.moments import moment_table

for kappa in (0.4, 0.5, 0.75, 0.95):
    rows = moment_table(5.0, 2.0, kappa, range(1, 11))
    for key in ("lb", "mom", "ub"):
        print(f"k={kappa:<5} {key.upper():>3} " + " ".join(f"{r[key]:7.2f}" for r in rows))
    print()
