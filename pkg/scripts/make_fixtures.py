"""Regenerate the CSV fixtures shipped in src/kappaln/data."""

from pathlib import Path

from kappaln.cli import write_csv
from kappaln.fixtures import make_field, make_ldho_series, make_model_a_sample

out = Path(__file__).resolve().parents[1] / "src" / "kappaln" / "data"
out.mkdir(parents=True, exist_ok=True)

t, x = make_ldho_series()
write_csv(str(out / "ldho_series.csv"), ["t", "value"], zip(t, x))

c, v = make_field()
write_csv(str(out / "field_40x40.csv"), ["x", "y", "value"], ((a, b, z) for (a, b), z in zip(c, v)))

s = make_model_a_sample()
write_csv(str(out / "model_a_sample.csv"), ["value"], ((z,) for z in s))
print("fixtures written to", out)
