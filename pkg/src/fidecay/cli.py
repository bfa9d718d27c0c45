"""Command-line front door: validated experiment configs in, CSV/JSON artifacts out.

Subcommands::

    fidecay run --config cfg.json [--set key=value ...] --out DIR
    fidecay compare RUN_A RUN_B --tol X

Every run writes a manifest.json (config echo, version, wall time) next to
its data files.  Data files carry no timestamps, so identical configs
produce byte-identical CSV bodies.  FIDECAY_THREADS sets the worker count
for independent sweep points; output order never depends on it.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .dicke import (
    DickeParams,
    RadiationState,
    sigma_fock,
    sigma_superposition,
    survival_curve,
    gaussian_fidelity,
)
from .errors import (
    CapacityError,
    ConvergenceError,
    FidecayError,
    ValidationError,
)
from .fidelity import (
    ProductStateRule,
    analytic_ground_curve,
    default_time_grid,
    fidelity_curve,
    hmh_condition_check,
)
from .operators import (
    SpinChainSpec,
    build_effective_radiation_hamiltonian,
    build_spin_hamiltonian,
    variance,
)
from .propagate import survival_series
from .sampling import (
    SineSamplingSpec,
    chi_square_uniformity,
    periodogram,
    sample_sine,
    sample_sine_float,
    undersampled_uniform,
)
from .scaling import fit_gaussian, loglog_slope

EXIT_OK = 0
EXIT_COMPARE_FAILED = 1
EXIT_VALIDATION = 2
EXIT_CAPACITY = 3
EXIT_NUMERICAL = 4

AXIS_COLUMNS = {"t", "freq_hz", "index", "n"}

_REQUIRED = object()

# parameter name -> (type tag, default); _REQUIRED means the key must be present
_SPIN_CHAIN_KEYS = {
    "n_sites": ("int", _REQUIRED),
    "coupling_zz": ("float", 0.0),
    "coupling_xx": ("float", 0.0),
    "coupling_yy": ("float", 0.0),
    "field_x": ("float", 0.0),
    "field_z": ("float", 0.0),
    "boundary": ("str", "open"),
}

SCHEMAS: dict[str, dict] = {
    "spin-fidelity": {
        **_SPIN_CHAIN_KEYS,
        "theta": ("float", 0.0),
        "phi": ("float", 0.0),
        "t_max": ("float", None),
        "n_times": ("int", 200),
        "tol": ("float", 1e-10),
    },
    "hmh-check": {
        **{k: v for k, v in _SPIN_CHAIN_KEYS.items() if k != "n_sites"},
        "n_values": ("int_list", _REQUIRED),
        "theta": ("float", 0.0),
        "phi": ("float", 0.0),
    },
    "dicke-analytic": {
        "n_atoms": ("int", _REQUIRED),
        "coupling": ("float", _REQUIRED),
        "mode_freq": ("float", 1.0),
        "n_max": ("int", None),
        "state_kind": ("str", "fock"),
        "state_n": ("int", 0),
        "t_max": ("float", None),
        "n_times": ("int", 400),
        "include_gaussian": ("bool", False),
        "include_oracle": ("bool", False),
        "tol": ("float", 1e-10),
    },
    "dicke-oracle": {
        "n_atoms": ("int", _REQUIRED),
        "coupling": ("float", _REQUIRED),
        "mode_freq": ("float", 1.0),
        "n_max": ("int", None),
        "state_kind": ("str", "fock"),
        "state_n": ("int", 0),
        "t_max": ("float", None),
        "n_times": ("int", 400),
        "tol": ("float", 1e-10),
    },
    "scaling": {
        "family": ("str", "dicke-ground"),
        "n_values": ("int_list", _REQUIRED),
        "coupling": ("float", 0.1),
        "mode_freq": ("float", 1.0),
        "window": ("float", 0.3),
        "coupling_zz": ("float", 1.0),
        "field_x": ("float", 1.0),
        "tau_cover": ("float", 0.6),
        "n_times": ("int", 200),
        "tol": ("float", 1e-10),
    },
    "periodogram": {
        "freq_num": ("int", _REQUIRED),
        "freq_den": ("int", 1),
        "sample_rate": ("int", 1_000_000),
        "count": ("int", 4096),
        "window": ("str", "none"),
        "phase0_num": ("int", 0),
        "phase0_den": ("int", 1),
        "pipeline": ("str", "exact"),
    },
    "rng-demo": {
        "freq_num": ("int", _REQUIRED),
        "freq_den": ("int", 1),
        "sample_rate": ("int", 1_000_000),
        "count": ("int", 100_000),
        "bins": ("int", 64),
    },
}

COLUMN_DOCS = """\
artifact columns per experiment:
  spin-fidelity   curve.csv: t, F
  hmh-check       sigma_sq.csv: n, sigma_sq       report.json
  dicke-analytic  curve.csv: t, F [, F_gaussian] [, F_oracle]
  dicke-oracle    curve.csv: t, F
  scaling         sigma.csv: n, sigma_fit         report.json
  periodogram     samples.csv: index, sample      spectrum.csv: freq_hz, power
  rng-demo        uniform.csv: index, u           uniformity.json
"""


def _coerce(name: str, kind: str, value):
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"parameter {name!r} must be an integer, got {value!r}")
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"parameter {name!r} must be a number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise ValidationError(f"parameter {name!r} must be finite")
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise ValidationError(f"parameter {name!r} must be a boolean, got {value!r}")
        return value
    if kind == "str":
        if not isinstance(value, str):
            raise ValidationError(f"parameter {name!r} must be a string, got {value!r}")
        return value
    if kind == "int_list":
        if (
            not isinstance(value, list)
            or not value
            or any(isinstance(v, bool) or not isinstance(v, int) for v in value)
        ):
            raise ValidationError(f"parameter {name!r} must be a non-empty list of integers")
        return list(value)
    raise AssertionError(f"unknown schema kind {kind}")


def validate_config(config: dict) -> dict:
    """Strict-schema validation; unknown keys are rejected."""
    if not isinstance(config, dict):
        raise ValidationError("config must be a JSON object")
    allowed = {"experiment", "parameters", "output_dir", "seed"}
    unknown = set(config) - allowed
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    experiment = config.get("experiment")
    if experiment not in SCHEMAS:
        raise ValidationError(
            f"experiment must be one of {sorted(SCHEMAS)}, got {experiment!r}"
        )
    raw = config.get("parameters", {})
    if not isinstance(raw, dict):
        raise ValidationError("parameters must be a JSON object")
    schema = SCHEMAS[experiment]
    unknown = set(raw) - set(schema)
    if unknown:
        raise ValidationError(f"unknown parameters for {experiment}: {sorted(unknown)}")
    params = {}
    for name, (kind, default) in schema.items():
        if name in raw:
            if raw[name] is None and default is None:
                params[name] = None
            else:
                params[name] = _coerce(name, kind, raw[name])
        elif default is _REQUIRED:
            raise ValidationError(f"missing required parameter {name!r} for {experiment}")
        else:
            params[name] = default
    seed = config.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ValidationError("seed must be an integer")
    return {
        "experiment": experiment,
        "parameters": params,
        "output_dir": config.get("output_dir"),
        "seed": seed,
    }


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_csv(path: Path, columns: list[str], rows) -> None:
    with open(path, "w", newline="\n") as f:
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def write_json(path: Path, obj) -> None:
    with open(path, "w", newline="\n") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def _time_grid(t_max: float, n_times: int) -> np.ndarray:
    if n_times < 2:
        raise ValidationError("n_times must be >= 2")
    if not t_max > 0:
        raise ValidationError("t_max must be positive")
    return np.linspace(0.0, t_max, n_times)


def _worker_count() -> int:
    raw = os.environ.get("FIDECAY_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValidationError(f"FIDECAY_THREADS must be an integer, got {raw!r}") from exc
    return max(1, n)


def _sweep(func, items):
    """Map func over items, possibly in parallel; order follows `items`."""
    workers = _worker_count()
    if workers == 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def _spin_spec(p, n_sites: int) -> SpinChainSpec:
    return SpinChainSpec(
        n_sites=n_sites,
        coupling_zz=p["coupling_zz"],
        coupling_xx=p["coupling_xx"],
        coupling_yy=p["coupling_yy"],
        field_x=p["field_x"],
        field_z=p["field_z"],
        boundary=p["boundary"],
    )


def _radiation_state(p) -> RadiationState:
    kind, n = p["state_kind"], p["state_n"]
    if kind == "fock":
        if n < 0:
            raise ValidationError("state_n must be >= 0 for a Fock state")
        return RadiationState.fock(n)
    if kind == "pair":
        return RadiationState.pair_superposition(n)
    raise ValidationError("state_kind must be 'fock' or 'pair'")


def _dicke_params(p) -> DickeParams:
    return DickeParams(
        n_atoms=p["n_atoms"],
        coupling=p["coupling"],
        mode_freq=p["mode_freq"],
        n_max=p["n_max"],
    )


def _run_spin_fidelity(p, out: Path) -> list[str]:
    op = build_spin_hamiltonian(_spin_spec(p, p["n_sites"]))
    state = ProductStateRule(theta=p["theta"], phi=p["phi"]).state(p["n_sites"])
    if p["t_max"] is None:
        sigma_sq = variance(op, state)
        if sigma_sq <= 0:
            raise ValidationError("state is stationary; specify t_max explicitly")
        times = default_time_grid(math.sqrt(sigma_sq), p["n_times"])
    else:
        times = _time_grid(p["t_max"], p["n_times"])
    curve = fidelity_curve(op, state, times, p["tol"])
    write_csv(out / "curve.csv", ["t", "F"], zip(curve.times, curve.values))
    return ["curve.csv"]


def _run_hmh_check(p, out: Path) -> list[str]:
    rule = ProductStateRule(theta=p["theta"], phi=p["phi"])
    report = hmh_condition_check(lambda n: _spin_spec(p, n), rule, p["n_values"])
    write_json(
        out / "report.json",
        {
            "n_values": report.n_values,
            "sigma_sq": report.sigma_sq,
            "c_lower": report.c_lower,
            "local_bound": report.local_bound,
            "passed": report.passed,
        },
    )
    write_csv(out / "sigma_sq.csv", ["n", "sigma_sq"], zip(report.n_values, report.sigma_sq))
    return ["report.json", "sigma_sq.csv"]


def _dicke_grid(p, params: DickeParams) -> np.ndarray:
    t_max = p["t_max"]
    if t_max is None:
        t_max = 4.0 * math.pi / params.mode_freq
    return _time_grid(t_max, p["n_times"])


def _oracle_fidelity(chi: RadiationState, params: DickeParams, times, tol) -> np.ndarray:
    op = build_effective_radiation_hamiltonian(params, n_state=chi.top_level)
    psi = chi.to_quantum_state(op.dim - 1)
    return np.abs(survival_series(op, psi, times, tol)) ** 2


def _run_dicke_analytic(p, out: Path) -> list[str]:
    params = _dicke_params(p)
    chi = _radiation_state(p)
    times = _dicke_grid(p, params)
    values, _ = survival_curve(chi, times, params)
    columns = ["t", "F"]
    data = [times, np.abs(values) ** 2]
    if p["include_gaussian"]:
        if p["state_kind"] == "fock":
            sigma = sigma_fock(p["state_n"], params)
        else:
            sigma = sigma_superposition(p["state_n"], params)
        columns.append("F_gaussian")
        data.append(gaussian_fidelity(sigma, times))
    if p["include_oracle"]:
        columns.append("F_oracle")
        data.append(_oracle_fidelity(chi, params, times, p["tol"]))
    write_csv(out / "curve.csv", columns, zip(*data))
    return ["curve.csv"]


def _run_dicke_oracle(p, out: Path) -> list[str]:
    params = _dicke_params(p)
    chi = _radiation_state(p)
    times = _dicke_grid(p, params)
    fvals = _oracle_fidelity(chi, params, times, p["tol"])
    write_csv(out / "curve.csv", ["t", "F"], zip(times, fvals))
    return ["curve.csv"]


def _run_scaling(p, out: Path) -> list[str]:
    family = p["family"]
    n_values = p["n_values"]
    if family == "dicke-ground":

        def one(n: int) -> float:
            params = DickeParams(n_atoms=n, coupling=p["coupling"], mode_freq=p["mode_freq"])
            rate = abs(n * p["coupling"])
            if rate <= 0:
                raise ValidationError("coupling must be nonzero for scaling fits")
            times = _time_grid(p["window"] / rate, p["n_times"])
            return fit_gaussian(analytic_ground_curve(params, times))[0]

    elif family == "spin-tfi":

        def one(n: int) -> float:
            spec = SpinChainSpec(n_sites=n, coupling_zz=p["coupling_zz"], field_x=p["field_x"])
            op = build_spin_hamiltonian(spec)
            state = ProductStateRule().state(n)
            sigma_est = math.sqrt(variance(op, state))
            times = default_time_grid(sigma_est, p["n_times"], tau_cover=p["tau_cover"])
            return fit_gaussian(fidelity_curve(op, state, times, p["tol"]))[0]

    else:
        raise ValidationError("family must be 'dicke-ground' or 'spin-tfi'")

    sigma_fit = _sweep(one, n_values)
    exponent, stderr, r_squared = loglog_slope(n_values, sigma_fit)
    write_json(
        out / "report.json",
        {
            "n_values": n_values,
            "sigma_fit": sigma_fit,
            "exponent": exponent,
            "exponent_stderr": stderr,
            "r_squared": r_squared,
        },
    )
    write_csv(out / "sigma.csv", ["n", "sigma_fit"], zip(n_values, sigma_fit))
    return ["report.json", "sigma.csv"]


def _sine_spec(p, count_key: str = "count") -> SineSamplingSpec:
    return SineSamplingSpec(
        freq_num=p["freq_num"],
        freq_den=p["freq_den"],
        sample_rate=p["sample_rate"],
        count=p[count_key],
        phase0=Fraction(p.get("phase0_num", 0), p.get("phase0_den", 1)),
    )


def _run_periodogram(p, out: Path) -> list[str]:
    spec = _sine_spec(p)
    if p["pipeline"] == "exact":
        samples = sample_sine(spec)
    elif p["pipeline"] == "float":
        samples = sample_sine_float(spec)
    else:
        raise ValidationError("pipeline must be 'exact' or 'float'")
    spectrum = periodogram(samples, spec.sample_rate, p["window"])
    write_csv(out / "samples.csv", ["index", "sample"], enumerate(samples))
    write_csv(out / "spectrum.csv", ["freq_hz", "power"], zip(spectrum.freqs, spectrum.power))
    return ["samples.csv", "spectrum.csv"]


def _run_rng_demo(p, out: Path) -> list[str]:
    spec = _sine_spec(p)
    uniform = undersampled_uniform(spec)
    report = chi_square_uniformity(np.clip(uniform, 0.0, 1.0), bins=p["bins"])
    write_csv(out / "uniform.csv", ["index", "u"], enumerate(uniform))
    write_json(
        out / "uniformity.json",
        {
            "chi2": report.chi2,
            "dof": report.dof,
            "p_value": report.p_value,
            "bins": report.bins,
            "counts": report.counts,
        },
    )
    return ["uniform.csv", "uniformity.json"]


_RUNNERS = {
    "spin-fidelity": _run_spin_fidelity,
    "hmh-check": _run_hmh_check,
    "dicke-analytic": _run_dicke_analytic,
    "dicke-oracle": _run_dicke_oracle,
    "scaling": _run_scaling,
    "periodogram": _run_periodogram,
    "rng-demo": _run_rng_demo,
}


def run(config: dict, out_dir: str | Path) -> Path:
    """Execute a validated experiment config; returns the manifest path."""
    config = validate_config(config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.monotonic()
    artifacts = _RUNNERS[config["experiment"]](config["parameters"], out)
    manifest = {
        "experiment": config["experiment"],
        "config": {k: v for k, v in config.items() if k != "output_dir"},
        "package_version": __version__,
        "wall_time_s": time.monotonic() - started,
        "created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "artifacts": sorted(artifacts),
    }
    manifest_path = out / "manifest.json"
    write_json(manifest_path, manifest)
    return manifest_path


def _read_csv(path: Path) -> dict[str, np.ndarray]:
    with open(path) as f:
        header = f.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[0] and data.shape[1] != len(header):
        raise ValidationError(f"{path}: row width does not match header")
    return {name: data[:, i] for i, name in enumerate(header)}


def _resolve_manifest(path: str | Path) -> Path:
    p = Path(path)
    if p.is_dir():
        p = p / "manifest.json"
    if not p.is_file():
        raise ValidationError(f"no manifest at {p}")
    return p


def compare(run_a: str | Path, run_b: str | Path, tolerance: float) -> dict:
    """Per-column max absolute difference between two runs' CSV artifacts.

    Axis columns (t, freq_hz, index, n) must match exactly; no
    interpolation is ever attempted.
    """
    if tolerance < 0:
        raise ValidationError("tolerance must be non-negative")
    ma, mb = _resolve_manifest(run_a), _resolve_manifest(run_b)
    with open(ma) as f:
        arts_a = set(json.load(f)["artifacts"])
    with open(mb) as f:
        arts_b = set(json.load(f)["artifacts"])
    shared = sorted(a for a in arts_a & arts_b if a.endswith(".csv"))
    if not shared:
        raise ValidationError("runs share no CSV artifacts to compare")
    report: dict = {"tolerance": tolerance, "artifacts": {}}
    worst = 0.0
    for name in shared:
        ca = _read_csv(ma.parent / name)
        cb = _read_csv(mb.parent / name)
        cols = [c for c in ca if c in cb]
        diffs = {}
        for col in cols:
            a, b = ca[col], cb[col]
            if a.shape != b.shape:
                raise ValidationError(f"{name}:{col}: mismatched grids ({a.size} vs {b.size} rows)")
            diff = float(np.max(np.abs(a - b))) if a.size else 0.0
            if col in AXIS_COLUMNS and diff != 0.0:
                raise ValidationError(f"{name}:{col}: mismatched grids; refusing to interpolate")
            diffs[col] = diff
            worst = max(worst, diff)
        report["artifacts"][name] = diffs
    report["max_diff"] = worst
    report["passed"] = worst <= tolerance
    return report


def validate_run_dir(path: str | Path) -> None:
    """Schema pass over an emitted run: manifest keys, files, parsable bodies."""
    manifest_path = _resolve_manifest(path)
    with open(manifest_path) as f:
        manifest = json.load(f)
    required = {"experiment", "config", "package_version", "wall_time_s", "artifacts"}
    missing = required - set(manifest)
    if missing:
        raise ValidationError(f"manifest is missing keys: {sorted(missing)}")
    validate_config(manifest["config"])
    for name in manifest["artifacts"]:
        target = manifest_path.parent / name
        if not target.is_file():
            raise ValidationError(f"artifact {name} listed but missing")
        if name.endswith(".csv"):
            _read_csv(target)
        elif name.endswith(".json"):
            with open(target) as f:
                json.load(f)
        else:
            raise ValidationError(f"artifact {name} has an undeclared format")


def _apply_overrides(config: dict, pairs: list[str]) -> dict:
    for pair in pairs:
        if "=" not in pair:
            raise ValidationError(f"--set expects key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = config
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ValidationError(f"--set path {key!r} crosses a non-object value")
        node[parts[-1]] = value
    return config


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fidecay",
        description="Fidelity-decay experiments with CSV/JSON artifacts.",
        epilog=COLUMN_DOCS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one experiment config", epilog=COLUMN_DOCS,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
    p_run.add_argument("--config", required=True, help="path to the JSON config document")
    p_run.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config field, e.g. --set parameters.n_atoms=12",
    )
    p_run.add_argument("--out", help="output directory (overrides config output_dir)")

    p_cmp = sub.add_parser("compare", help="diff the CSV artifacts of two runs")
    p_cmp.add_argument("run_a", help="run directory or manifest path")
    p_cmp.add_argument("run_b", help="run directory or manifest path")
    p_cmp.add_argument("--tol", type=float, required=True, help="max allowed |difference|")
    return parser


def _error_json(exc: Exception) -> str:
    return json.dumps({"error": type(exc).__name__, "message": str(exc)})


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            with open(args.config) as f:
                config = json.load(f)
            if not isinstance(config, dict):
                raise ValidationError("config must be a JSON object")
            config = _apply_overrides(config, args.set)
            out_dir = args.out or config.get("output_dir")
            if not out_dir:
                raise ValidationError("no output directory: pass --out or set output_dir")
            manifest = run(config, out_dir)
            print(str(manifest))
            return EXIT_OK
        report = compare(args.run_a, args.run_b, args.tol)
        print(json.dumps(report, indent=2, sort_keys=True))
        return EXIT_OK if report["passed"] else EXIT_COMPARE_FAILED
    except (json.JSONDecodeError, FileNotFoundError) as exc:
        print(_error_json(exc), file=sys.stderr)
        return EXIT_VALIDATION
    except CapacityError as exc:
        print(_error_json(exc), file=sys.stderr)
        return EXIT_CAPACITY
    except ConvergenceError as exc:
        print(_error_json(exc), file=sys.stderr)
        return EXIT_NUMERICAL
    except ValidationError as exc:
        print(_error_json(exc), file=sys.stderr)
        return EXIT_VALIDATION
    except FidecayError as exc:
        print(_error_json(exc), file=sys.stderr)
        return EXIT_NUMERICAL


def entry() -> None:
    sys.exit(main())
