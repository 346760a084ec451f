"""Monte Carlo coverage of 95% prediction intervals under the true LDHO model."""

from kappaln.studies import coverage_trials

print(f"coverage: {coverage_trials():.4f}")
