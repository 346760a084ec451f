"""kappaln command line.

Exit codes: 0 success, 2 malformed input, 3 domain error, 4 numerical failure.
Data goes out as CSV, reports as JSON; every JSON report carries a
``meta`` block with the schema version, seed and RNG algorithm.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .distribution import (
    KappaParams,
    cdf,
    hazard,
    mode_report,
    normalized_typical_extreme,
    pdf,
    quantile,
)
from .estimation import FitConfig, fit_marginal, fit_quantile, model_select
from .moments import MomentOverflow, moment_table
from .process import (
    LDHO,
    RNG_ALGORITHM,
    ExpAniso,
    FactorizationError,
    LatentGaussianModel,
    MaternAniso,
    ProcessFitConfig,
    SampleSet,
    fit_process,
    make_rng,
    simulate,
)
from .regression import cross_validate, forecast, interpolate_grid
from .special import ConvergenceError

log = logging.getLogger("kappaln")

SCHEMA_VERSION = "1"
DEFAULT_SEED = 20240607

EXIT_OK, EXIT_FORMAT, EXIT_DOMAIN, EXIT_NUMERIC = 0, 2, 3, 4


class InputFormatError(Exception):
    pass


class DomainError(Exception):
    pass


class NumericalFailure(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    seed: int
    output: str | None
    format: str
    options: dict


# -------------------------------------------------------------------- I/O


def read_csv_columns(path: str, n_cols: int | None = None) -> tuple[list[str], np.ndarray]:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputFormatError(f"cannot read {path}: {exc}") from exc
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise InputFormatError("CSV needs a header row and at least one data row")
    header = [h.strip() for h in rows[0]]
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise InputFormatError(f"non-numeric CSV field: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != len(header):
        raise InputFormatError("ragged CSV rows")
    if n_cols is not None and data.shape[1] != n_cols:
        raise InputFormatError(f"expected {n_cols} columns, found {data.shape[1]}")
    if not np.all(np.isfinite(data)):
        raise InputFormatError("CSV contains non-finite values")
    return header, data


def _pick_column(header: list[str], data: np.ndarray, column: str | None) -> np.ndarray:
    if column is None:
        return data[:, -1]
    if column in header:
        return data[:, header.index(column)]
    try:
        return data[:, int(column)]
    except (ValueError, IndexError) as exc:
        raise InputFormatError(f"no column {column!r}") from exc


def _fmt(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path: str | None, header: list[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    _emit(path, buf.getvalue())


def _emit(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def write_json(path: str | None, payload: dict, cfg: RunConfig) -> None:
    payload = {"meta": _meta(cfg), **payload}
    _emit(path, json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o).__name__)


def _meta(cfg: RunConfig) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kappaln_version": __version__,
        "command": cfg.command,
        "seed": cfg.seed,
        "rng": RNG_ALGORITHM,
    }


def _sidecar(path: str | None, suffix: str) -> str | None:
    if path is None or path == "-":
        return None
    p = Path(path)
    return str(p.with_name(p.stem + suffix))


# --------------------------------------------------------------- commands


def _marginal_params(opts) -> KappaParams:
    try:
        return KappaParams(opts["mu"], opts["sigma"], opts["kappa"])
    except ValueError as exc:
        raise DomainError(str(exc)) from exc


def _positive_data(x: np.ndarray) -> np.ndarray:
    if np.any(x <= 0):
        raise DomainError("data must be strictly positive")
    return x


def cmd_fit(cfg: RunConfig) -> int:
    o = cfg.options
    header, data = read_csv_columns(o["input"])
    x = _positive_data(_pick_column(header, data, o.get("column")))
    if x.size < 10:
        raise DomainError("need at least 10 observations")
    fcfg = FitConfig(
        kappa_init=o["kappa_init"], kappa_max=o["kappa_max"],
        multistart_count=o["multistart"], fix_kappa=o.get("fix_kappa"),
    )
    try:
        res = fit_quantile(x, fcfg.kappa_max) if o["method"] == "quantile" else fit_marginal(x, fcfg)
    except ValueError as exc:
        raise DomainError(str(exc)) from exc
    if o["method"] == "mle" and not res.converged:
        raise NumericalFailure(f"fit did not converge (gradient norm {res.gradient_norm:.3e})")
    rep = mode_report(res.params)
    payload = {
        "fit": res.to_dict(),
        "mode_report": {
            "root_count": rep.root_count,
            "stationary_points": list(rep.stationary_points),
            "modes": list(rep.modes),
            "coefficients": list(rep.coefficients),
        },
    }
    if o.get("compare_lognormal"):
        payload["comparison"] = model_select(x, fcfg).to_dict()
    write_json(cfg.output, payload, cfg)
    return EXIT_OK


def cmd_moments(cfg: RunConfig) -> int:
    o = cfg.options
    p = _marginal_params(o)
    orders = _parse_orders(o["orders"])
    try:
        rows = moment_table(p.mu, p.sigma, p.kappa, orders, truncation=o["truncation"])
    except (MomentOverflow, ConvergenceError, OverflowError) as exc:
        raise NumericalFailure(str(exc)) from exc
    names = {"mom": "mom", "lb": "lb", "ub": "ub", "series": f"series_q{o['truncation']}"}
    wanted = list(names) if o["methods"] == "all" else [m.strip() for m in o["methods"].split(",")]
    if any(m not in names for m in wanted):
        raise InputFormatError(f"--methods must be 'all' or a subset of {','.join(names)}")
    header = ["order"] + [names[m] for m in wanted] + ["ell_over_2kappa"]
    write_csv(cfg.output, header, ([r["order"], *(r[m] for m in wanted), r["ell_over_2kappa"]] for r in rows))
    return EXIT_OK


def _parse_orders(spec: str) -> list[int]:
    try:
        if ".." in spec:
            a, b = spec.split("..")
            out = list(range(int(a), int(b) + 1))
        else:
            out = [int(v) for v in spec.split(",")]
    except ValueError as exc:
        raise InputFormatError(f"bad --orders {spec!r}") from exc
    if not out or min(out) < 1:
        raise DomainError("orders must be positive integers")
    return out


def _kernel_from_opts(o, sigma2: float):
    kind = o["kernel"]
    try:
        if kind == "ldho":
            return LDHO(sigma2, o["tau_c"], o["omega_d"])
        if kind == "exp":
            return ExpAniso(sigma2, o["xi"], o["rho"], o["phi"])
        if kind == "matern":
            return MaternAniso(sigma2, o["xi"], o["nu"], o["rho"], o["phi"])
    except ValueError as exc:
        raise DomainError(str(exc)) from exc
    raise InputFormatError(f"unknown kernel {kind!r}")


def _default_coords(kind: str, n: int) -> np.ndarray:
    if kind == "ldho":
        return np.arange(n, dtype=float)[:, None]
    side = int(round(math.sqrt(n)))
    if side * side != n:
        raise DomainError("2-D kernels need --n to be a perfect square (side x side grid)")
    g = np.arange(side, dtype=float)
    X, Y = np.meshgrid(g, g, indexing="ij")
    return np.column_stack([X.ravel(), Y.ravel()])


def cmd_simulate(cfg: RunConfig) -> int:
    o = cfg.options
    p = _marginal_params(o)
    if o["n"] < 1 or o["realizations"] < 1:
        raise DomainError("--n and --realizations must be >= 1")
    model = LatentGaussianModel(p, _kernel_from_opts(o, p.sigma**2), o["noise_var"])
    coords = _default_coords(o["kernel"], o["n"])
    try:
        X = simulate(model, coords, cfg.seed, o["realizations"])
    except FactorizationError as exc:
        raise NumericalFailure(str(exc)) from exc
    idx_cols = ["t"] if coords.shape[1] == 1 else ["x", "y"]
    header = idx_cols + [f"r{i}" for i in range(X.shape[0])]
    write_csv(cfg.output, header, ([*coords[j], *X[:, j]] for j in range(coords.shape[0])))
    return EXIT_OK


def _fit_cfg(o) -> FitConfig:
    return FitConfig(kappa_init=o["kappa_init"], kappa_max=o["kappa_max"], multistart_count=o["multistart"])


def cmd_forecast(cfg: RunConfig) -> int:
    o = cfg.options
    header, data = read_csv_columns(o["input"], n_cols=2)
    t, x = data[:, 0], _positive_data(data[:, 1])
    frac = o["train_frac"]
    if not 0.0 < frac < 1.0:
        raise DomainError("--train-frac must lie in (0, 1)")
    n_tr = int(math.floor(frac * x.size))
    if n_tr < 20 or n_tr >= x.size:
        raise DomainError("train/test split leaves too few points")
    train = SampleSet(t[:n_tr], x[:n_tr])
    try:
        fit = fit_process(train, "ldho", ProcessFitConfig(marginal=_fit_cfg(o), estimate_noise=o["noise"]))
    except FactorizationError as exc:
        raise NumericalFailure(str(exc)) from exc
    strategy = "multi_step" if o["strategy"] == "multi" else "one_step_recursive"
    pred = forecast(fit.model, train, t[n_tr:], strategy, truths=x[n_tr:], alpha=o["alpha"])
    write_csv(cfg.output, ["t", "truth", "median", "mode", "lo", "hi"],
              ([t[n_tr + i], x[n_tr + i], pred.median[i], pred.mode[i], pred.lo[i], pred.hi[i]] for i in range(pred.median.size)))
    report = {
        "model": fit.to_dict(),
        "strategy": strategy,
        "n_train": n_tr,
        "cv_median": cross_validate(pred.median, x[n_tr:]).as_dict(),
        "cv_mode": cross_validate(pred.mode, x[n_tr:]).as_dict(),
    }
    write_json(o.get("report") or _sidecar(cfg.output, "_report.json") or "-", report, cfg)
    return EXIT_OK


def cmd_interpolate(cfg: RunConfig) -> int:
    o = cfg.options
    header, data = read_csv_columns(o["input"], n_cols=3)
    coords, x = data[:, :2], _positive_data(data[:, 2])
    n_tr = o["train_n"]
    if not 20 <= n_tr < x.size:
        raise DomainError("--train-n must be at least 20 and below the number of rows")
    perm = make_rng(cfg.seed).permutation(x.size)
    tr, te = np.sort(perm[:n_tr]), np.sort(perm[n_tr:])
    train = SampleSet(coords[tr], x[tr])
    pcfg = ProcessFitConfig(marginal=_fit_cfg(o), estimate_noise=o["noise"], anisotropic=o["aniso"])
    try:
        fit = fit_process(train, o["kernel"], pcfg)
        pred = interpolate_grid(fit.model, train, coords, alpha=o["alpha"])
    except FactorizationError as exc:
        raise NumericalFailure(str(exc)) from exc
    is_train = np.zeros(x.size, dtype=int)
    is_train[tr] = 1
    write_csv(cfg.output, ["x", "y", "truth", "train", "median", "mode", "lo", "hi"],
              ([*coords[i], x[i], is_train[i], pred.median[i], pred.mode[i], pred.lo[i], pred.hi[i]] for i in range(x.size)))
    report = {
        "model": fit.to_dict(),
        "n_train": n_tr,
        "cv_median": cross_validate(pred.median[te], x[te]).as_dict(),
        "cv_mode": cross_validate(pred.mode[te], x[te]).as_dict(),
    }
    write_json(o.get("report") or _sidecar(cfg.output, "_report.json") or "-", report, cfg)
    return EXIT_OK


def cmd_tabulate(cfg: RunConfig) -> int:
    o = cfg.options
    p = _marginal_params(o)
    what = o["what"]
    n = o["points"]
    if n < 2:
        raise DomainError("--points must be >= 2")
    if what == "quantile":
        grid = np.linspace(o["pmin"], o["pmax"], n)
        if grid[0] <= 0 or grid[-1] >= 1:
            raise DomainError("probabilities must lie in (0, 1)")
        write_csv(cfg.output, ["p", "quantile"], zip(grid, np.asarray(quantile(grid, p))))
        return EXIT_OK
    if what == "extreme-ratio":
        if o["lmax"] < 1:
            raise DomainError("--lmax must be >= 1")
        rows = ((L, normalized_typical_extreme(p, L)) for L in range(1, o["lmax"] + 1))
        write_csv(cfg.output, ["log2_n", "ratio"], rows)
        return EXIT_OK
    xmin = o["xmin"] if o["xmin"] is not None else float(quantile(1e-6, p))
    xmax = o["xmax"] if o["xmax"] is not None else float(quantile(1 - 1e-6, p))
    if not 0 < xmin < xmax:
        raise DomainError("need 0 < xmin < xmax")
    grid = np.linspace(xmin, xmax, n)
    fn = {"pdf": pdf, "cdf": cdf, "hazard": hazard}[what]
    write_csv(cfg.output, ["x", what], zip(grid, np.asarray(fn(grid, p))))
    return EXIT_OK


COMMANDS = {
    "fit": cmd_fit,
    "moments": cmd_moments,
    "simulate": cmd_simulate,
    "forecast": cmd_forecast,
    "interpolate": cmd_interpolate,
    "tabulate": cmd_tabulate,
}


# ---------------------------------------------------------------- parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_FORMAT)


def _add_common(p):
    p.add_argument("--config", help="JSON file with default flag values")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=["csv", "json"], default=None)
    p.add_argument("--threads", type=int, default=None, help="worker count for ensemble work")


def _add_marginal(p):
    # required, but may come from --config; checked after merging
    p.add_argument("--mu", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--kappa", type=float)


def _add_fit_flags(p):
    p.add_argument("--kappa-init", type=float, default=1.5)
    p.add_argument("--kappa-max", type=float, default=10.0)
    p.add_argument("--multistart", type=int, default=8)


def _add_kernel(p, default="ldho"):
    p.add_argument("--kernel", choices=["ldho", "exp", "matern"], default=default)
    p.add_argument("--tau-c", type=float, default=30.0)
    p.add_argument("--omega-d", type=float, default=2 * math.pi / 50)
    p.add_argument("--xi", type=float, default=3.39)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--nu", type=float, default=0.5)
    p.add_argument("--noise-var", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="kappaln", description="κ-lognormal distributions and processes")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit a κ-lognormal marginal to a CSV column")
    _add_common(p)
    p.add_argument("--input")
    p.add_argument("--column", default=None)
    p.add_argument("--method", choices=["mle", "quantile"], default="mle")
    p.add_argument("--fix-kappa", type=float, default=None)
    p.add_argument("--compare-lognormal", action="store_true")
    _add_fit_flags(p)

    p = sub.add_parser("moments", help="moments, bounds and series approximation")
    _add_common(p)
    _add_marginal(p)
    p.add_argument("--orders", default="1..10")
    p.add_argument("--truncation", type=int, default=2)
    p.add_argument("--methods", default="all")

    p = sub.add_parser("simulate", help="simulate process realizations")
    _add_common(p)
    _add_marginal(p)
    _add_kernel(p)
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--realizations", type=int, default=1)

    p = sub.add_parser("forecast", help="fit an LDHO process and forecast the held-out tail")
    _add_common(p)
    p.add_argument("--input")
    p.add_argument("--train-frac", type=float, default=0.95)
    p.add_argument("--strategy", choices=["multi", "onestep"], default="multi")
    p.add_argument("--kernel", choices=["ldho"], default="ldho")
    p.add_argument("--noise", action="store_true", help="estimate a nugget variance")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--report", default=None)
    _add_fit_flags(p)

    p = sub.add_parser("interpolate", help="fit a spatial model and predict over all nodes")
    _add_common(p)
    p.add_argument("--input")
    p.add_argument("--train-n", type=int)
    p.add_argument("--kernel", choices=["exp", "matern"], default="exp")
    p.add_argument("--aniso", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--noise", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--report", default=None)
    _add_fit_flags(p)

    p = sub.add_parser("tabulate", help="dense curves for plotting")
    _add_common(p)
    _add_marginal(p)
    p.add_argument("--what", choices=["pdf", "cdf", "hazard", "quantile", "extreme-ratio"])
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--xmin", type=float, default=None)
    p.add_argument("--xmax", type=float, default=None)
    p.add_argument("--pmin", type=float, default=0.001)
    p.add_argument("--pmax", type=float, default=0.999)
    p.add_argument("--lmax", type=int, default=20)
    return ap


_MARGINAL = ["mu", "sigma", "kappa"]
_REQUIRED = {
    "fit": ["input"],
    "moments": _MARGINAL,
    "simulate": _MARGINAL,
    "forecast": ["input"],
    "interpolate": ["input", "train_n"],
    "tabulate": _MARGINAL + ["what"],
}


def parse_config(argv: list[str] | None) -> RunConfig:
    """Flags override values from ``--config``, which override parser defaults."""
    parser = build_parser()
    args = parser.parse_args(argv)
    opts = vars(args).copy()
    if args.config:
        try:
            file_opts = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputFormatError(f"bad config file: {exc}") from exc
        if not isinstance(file_opts, dict):
            raise InputFormatError("config file must hold a JSON object")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        explicit = _explicit_dests(sub, argv or sys.argv[1:])
        for k, v in file_opts.items():
            key = k.replace("-", "_")
            if key not in opts:
                raise InputFormatError(f"unknown config key {k!r}")
            if key not in explicit:
                opts[key] = v
    missing = [k for k in _REQUIRED[args.command] if opts.get(k) is None]
    if missing:
        raise InputFormatError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))
    seed = opts.pop("seed")
    seed = DEFAULT_SEED if seed is None else seed
    if not 0 <= seed < 2**64:
        raise DomainError("seed must be an unsigned 64-bit integer")
    return RunConfig(opts.pop("command"), int(seed), opts.pop("output"), opts.pop("format") or "csv", opts)


def _explicit_dests(sub: argparse.ArgumentParser, argv: list[str]) -> set[str]:
    out = set()
    for action in sub._actions:
        for s in action.option_strings:
            if any(a == s or a.startswith(s + "=") for a in argv):
                out.add(action.dest)
    return out


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
        logging.basicConfig(level=logging.DEBUG if cfg.options.get("verbose") else logging.WARNING)
        return COMMANDS[cfg.command](cfg)
    except SystemExit as exc:
        return int(exc.code or 0)
    except InputFormatError as exc:
        sys.stderr.write(f"kappaln: input error: {exc}\n")
        return EXIT_FORMAT
    except DomainError as exc:
        sys.stderr.write(f"kappaln: domain error: {exc}\n")
        return EXIT_DOMAIN
    except (NumericalFailure, ArithmeticError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"kappaln: numerical failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
