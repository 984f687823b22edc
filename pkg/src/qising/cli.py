"""Command-line entry point: ``qising <subcommand> [flags]``.

Parameters come from three layers, later ones winning: built-in defaults, an
optional ``--config`` file of ``key=value`` lines, and explicit flags.  The
effective parameters are echoed into every output under ``"params"``.

Exit codes: 0 success, 1 computation or validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from typing import Any, Callable, Dict, Optional

import numpy as np

from . import classical, fractal, leeyang, quantum, tracemap, validation
from .sequences import CouplingMap, fibonacci
from .sets import BandSet, hausdorff_distance

PARALLELISM_ENV = "QISING_PARALLELISM"
EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ------------------------------------------------------------------ output


def _format_float(x: float) -> Any:
    if math.isfinite(x):
        text = format(x, ".17g")
        return text if any(ch in text for ch in ".en") else text + ".0"
    return json.dumps(str(x))  # "inf", "-inf", "nan" travel as strings


def to_json(obj: Any, indent: int = 0) -> str:
    """JSON text with sorted keys and every float written to 17 significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {to_json(obj[k], indent + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(to_json(v) for v in seq) + "]"
        return "[\n" + ",\n".join(inner + to_json(v, indent + 1) for v in seq) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    return json.dumps(str(obj))


def write_atomic(path: Optional[str], text: str) -> None:
    """Write to a temporary file next to ``path`` and rename it into place; ``None`` means stdout."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".qising-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ------------------------------------------------------------------ parameters

COMMON = {"out": None, "format": "json", "parallelism": None, "seed": validation.DEFAULT_SEED}

DEFAULTS: Dict[str, Dict[str, Any]] = {
    "spectrum": {"pa": 1.0, "pb": 1.2, "gen": 8, "grid": 4000, "orbit_cap": None, "method": "sigma"},
    "free-energy": {
        "pa": 1.0, "pb": 1.5, "qa": 0.0, "qb": 0.0,
        "tau_min": 0.3, "tau_max": 5.0, "tau_steps": 50, "tol": 1e-10, "offset": 0.0,
        "format": "csv",
    },
    "lee-yang": {"pa": 1.0, "pb": 1.5, "tau": 1.0, "gen": 8, "grid": 100_000, "oracle": False},
    "dims": {"in": None, "eps_min": None, "eps_max": None, "levels": 12, "windows": 8},
    "orbit": {"x": 2.0, "y": 2.0, "z": 1.0, "n_max": 2000, "bound": 1e6},
    "validate": {"checks": None},
    "validate-classical": {},
}

_TYPES: Dict[str, Callable] = {
    "pa": float, "pb": float, "qa": float, "qb": float, "tau": float,
    "tau_min": float, "tau_max": float, "tau_steps": int, "tol": float, "offset": float,
    "gen": int, "grid": int, "orbit_cap": int, "method": str,
    "in": str, "eps_min": float, "eps_max": float, "levels": int, "windows": int,
    "x": float, "y": float, "z": float, "n_max": int, "bound": float,
    "checks": str, "out": str, "format": str, "parallelism": int, "seed": int,
}


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def read_config(path: str) -> Dict[str, str]:
    """Flat ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc.strerror}") from None
    for number, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"--config: line {number} is not key=value: {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _convert(key: str, value: Any) -> Any:
    if value is None or not isinstance(value, str):
        return value
    if key == "oracle":
        return _parse_bool(value)
    if value.lower() in ("none", "null", ""):
        return None
    return _TYPES[key](value)


def resolve(command: str, cli: Dict[str, Any], config: Dict[str, str]) -> Dict[str, Any]:
    """Merge defaults, config-file values and explicit flags, in that order of precedence."""
    params = dict(COMMON)
    params.update(DEFAULTS[command])
    for key, value in config.items():
        if key not in params:
            raise UsageError(f"--config: unknown key {key!r} for {command}")
        try:
            params[key] = _convert(key, value)
        except ValueError:
            raise UsageError(f"--config: bad value for {key}: {value!r}") from None
    params.update({k: v for k, v in cli.items() if v is not None and k in params})
    if params["parallelism"] is None:
        env = os.environ.get(PARALLELISM_ENV)
        try:
            params["parallelism"] = int(env) if env else 1
        except ValueError:
            raise UsageError(f"{PARALLELISM_ENV} must be an integer, got {env!r}") from None
    _check(command, params)
    return params


def _require(ok: bool, flag: str, message: str) -> None:
    if not ok:
        raise UsageError(f"--{flag.replace('_', '-')}: {message}")


def _check(command: str, p: Dict[str, Any]) -> None:
    _require(p["parallelism"] >= 1, "parallelism", "must be >= 1")
    _require(p["format"] in ("json", "csv"), "format", "must be json or csv")
    for key in ("pa", "pb"):
        if key in p:
            _require(p[key] > 0, key, "couplings must be positive")
    for key in ("qa", "qb"):
        if key in p:
            _require(p[key] >= 0, key, "fields must be non-negative")
    if command == "spectrum":
        _require(p["gen"] >= 2, "gen", "must be >= 2")
        _require(p["grid"] >= 1000, "grid", "must be >= 1000")
        _require(p["orbit_cap"] is None or p["orbit_cap"] >= 1, "orbit_cap", "must be >= 1")
        _require(p["method"] in ("sigma", "b-infty"), "method", "must be sigma or b-infty")
    elif command == "free-energy":
        _require(0 < p["tau_min"] <= p["tau_max"], "tau_min", "need 0 < tau-min <= tau-max")
        _require(p["tau_steps"] >= 1, "tau_steps", "must be >= 1")
        _require(p["tol"] > 0, "tol", "must be positive")
        _require(0 <= p["offset"] < 1, "offset", "must lie in [0, 1)")
    elif command == "lee-yang":
        _require(p["tau"] > 0, "tau", "must be positive")
        _require(p["gen"] >= 3, "gen", "must be >= 3")
        _require(p["grid"] >= 10_000, "grid", "must be >= 10000")
        _require(not p["oracle"] or fibonacci(p["gen"]) <= leeyang.ORACLE_MAX_SITES, "oracle",
                 f"the oracle needs F_gen <= {leeyang.ORACLE_MAX_SITES}")
    elif command == "dims":
        _require(p["in"] is not None, "in", "a BandSet JSON file is required")
        _require(p["levels"] >= 5, "levels", "must be >= 5")
        _require(p["windows"] >= 3, "windows", "must be >= 3")
    elif command == "orbit":
        _require(p["n_max"] >= 1, "n_max", "must be >= 1")
        _require(p["bound"] > 0, "bound", "must be positive")


# ------------------------------------------------------------------ pool


@contextmanager
def work_pool(n: int):
    """A ``map`` that runs on ``n`` processes; results always come back in input order."""
    if n <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=n) as ex:
        yield ex.map


# ------------------------------------------------------------------ commands


def cmd_spectrum(p: dict) -> dict:
    c = CouplingMap(p["pa"], p["pb"])
    sp = quantum.SpectrumParams(c, p["gen"], p["grid"], p["orbit_cap"])
    if p["method"] == "sigma":
        xb = quantum.sigma_k_x(sp)
        bands = quantum.x_to_lambda(xb)
        return {
            "bands": bands.to_list(),
            "band_count": len(xb),
            "lambda_band_count": len(bands),
            "x_bands": xb.tolist(),
            "grid_step": quantum.spectral_bound(c) / p["grid"],
        }
    bands = quantum.b_infty_approx(sp)
    _, h = quantum.b_infty_grid(sp)
    return {"bands": bands.to_list(), "band_count": len(bands), "grid_step": h}


def _free_energy_row(args) -> dict:
    c, tau, tol, offset = args
    try:
        r = classical.free_energy_limit(c, tau, tol, offset)
        return {"tau": tau, "F": r.value, "n_used": r.n_used, "cauchy_gap": r.cauchy_gap}
    except classical.ConvergenceError as exc:
        return {"tau": tau, "error": str(exc), "cauchy_gap": exc.gap}


def cmd_free_energy(p: dict, mapper=map) -> dict:
    c = CouplingMap(p["pa"], p["pb"], p["qa"], p["qb"])
    taus = np.linspace(p["tau_min"], p["tau_max"], p["tau_steps"]).tolist()
    rows = list(mapper(_free_energy_row, [(c, t, p["tol"], p["offset"]) for t in taus]))
    failed = [r for r in rows if "error" in r]
    if failed:
        raise RuntimeError(f"{len(failed)} temperature(s) did not converge; first: tau={failed[0]['tau']}: {failed[0]['error']}")
    return {"rows": rows}


def cmd_lee_yang(p: dict) -> dict:
    f = leeyang.FugacityParams.from_thermo(classical.ThermoParams(CouplingMap(p["pa"], p["pb"]), p["tau"]))
    zs = leeyang.zero_set(p["gen"], f, p["grid"])
    out = {
        "zeros_eta_tilde": zs.points.tolist(),
        "angles": leeyang.to_circle(zs).tolist(),
        "flagged_tangencies": zs.tangencies.tolist(),
        "oracle_hdist": None,
    }
    if p["oracle"]:
        out["oracle_hdist"] = hausdorff_distance(zs, leeyang.zero_set_oracle(p["gen"], f))
    return out


def load_bandset(path: str) -> tuple:
    """A BandSet from ``{"bands": [[lo, hi], ...]}`` (as written by ``spectrum``) or a bare list."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"--in: cannot read a BandSet from {path}: {exc}") from None
    bands = data.get("bands") if isinstance(data, dict) else data
    step = data.get("grid_step") if isinstance(data, dict) else None
    try:
        s = BandSet(bands)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"--in: malformed band list: {exc}") from None
    if len(s) == 0:
        raise UsageError("--in: the band set is empty")
    return s, step


def cmd_dims(p: dict) -> dict:
    s, step = load_bandset(p["in"])
    lo, hi = s.hull
    eps_max = p["eps_max"] if p["eps_max"] is not None else (hi - lo) / 8
    eps_min = p["eps_min"] if p["eps_min"] is not None else (step if step else (hi - lo) / 4000)
    if not 0 < eps_min < eps_max:
        raise UsageError("--eps-min: need 0 < eps-min < eps-max")
    dim = fractal.box_counting(s, eps_min, eps_max, p["levels"])
    th = fractal.thickness(s)
    bound = fractal.dimension_lower_bound(th) if th.tau > 0 else None
    profile = [{"center": c, **est.to_dict()} for c, est in fractal.local_dimension_profile(s, p["windows"], eps_min)]
    return {"dimension": dim.to_dict(), "thickness": th.to_dict(), "lower_bound": bound, "profile": profile}


def cmd_orbit(p: dict) -> dict:
    r = tracemap.iterate_orbit((p["x"], p["y"], p["z"]), p["n_max"], p["bound"])
    return {
        "status": r.status,
        "escape_index": r.escape_index,
        "rate": r.rate_estimate,
        "steps_used": r.steps_used,
        "magnitude_only": r.magnitude_only,
    }


def _parse_checks(text: Optional[str]) -> list:
    if text is None:
        return list(range(1, len(validation.CHECKS) + 1))
    try:
        numbers = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"--checks: expected comma-separated integers, got {text!r}") from None
    bad = [n for n in numbers if not 1 <= n <= len(validation.CHECKS)]
    _require(not bad and bool(numbers), "checks", f"check numbers run from 1 to {len(validation.CHECKS)}")
    return numbers


def cmd_validate(p: dict, mapper=map, numbers=None) -> dict:
    numbers = _parse_checks(p.get("checks")) if numbers is None else numbers
    results = validation.run_suite(p["seed"], numbers, mapper)
    for r in results:
        print(r.line(), file=sys.stderr if p["out"] is None else sys.stdout)
    return {"checks": [r.to_dict() for r in results], "all_passed": all(r.passed for r in results)}


# ------------------------------------------------------------------ parser


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="flat key=value file; flags override it")
    sp.add_argument("--out", help="output file (default: stdout)")
    sp.add_argument("--format", choices=("json", "csv"))
    sp.add_argument("--parallelism", type=int, help=f"worker processes (default: ${PARALLELISM_ENV} or 1)")
    sp.add_argument("--seed", type=int, help="seed for randomised instances")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qising", description="Fibonacci Ising chains: spectra, free energy, Lee-Yang zeros.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    sp = sub.add_parser("spectrum", help="single-fermion spectrum of a periodic approximant or B_inf")
    sp.add_argument("--pa", type=float)
    sp.add_argument("--pb", type=float)
    sp.add_argument("--gen", type=int, help="generation k; the period is F_k")
    sp.add_argument("--grid", type=int, help="scan resolution")
    sp.add_argument("--orbit-cap", type=int, help="iterations for the bounded-orbit test (b-infty)")
    sp.add_argument("--method", choices=("sigma", "b-infty"))

    fe = sub.add_parser("free-energy", help="thermodynamic-limit free energy over a temperature grid")
    for flag in ("--pa", "--pb", "--qa", "--qb", "--tau-min", "--tau-max", "--tol", "--offset"):
        fe.add_argument(flag, type=float)
    fe.add_argument("--tau-steps", type=int)

    ly = sub.add_parser("lee-yang", help="Lee-Yang zeros on the unit circle")
    for flag in ("--pa", "--pb", "--tau"):
        ly.add_argument(flag, type=float)
    ly.add_argument("--gen", type=int)
    ly.add_argument("--grid", type=int)
    ly.add_argument("--oracle", action="store_const", const=True, help="compare with the exhaustive oracle")

    dm = sub.add_parser("dims", help="box dimension, thickness and local profile of a band set")
    dm.add_argument("--in", dest="in_", metavar="FILE")
    dm.add_argument("--eps-min", type=float)
    dm.add_argument("--eps-max", type=float)
    dm.add_argument("--levels", type=int)
    dm.add_argument("--windows", type=int)

    ob = sub.add_parser("orbit", help="bounded/escaping status of a trace-map orbit")
    for flag in ("--x", "--y", "--z", "--bound"):
        ob.add_argument(flag, type=float)
    ob.add_argument("--n-max", type=int)

    va = sub.add_parser("validate", help="run the acceptance suite")
    va.add_argument("--checks", help="comma-separated check numbers (default: all)")
    sub.add_parser("validate-classical", help="run the classical oracle and trace-identity checks")

    for name in ("spectrum", "free-energy", "lee-yang", "dims", "orbit", "validate", "validate-classical"):
        _add_common(sub.choices[name])
    return parser


def _render(command: str, params: dict, result: dict) -> str:
    if params["format"] == "csv":
        if command != "free-energy":
            raise UsageError(f"--format: csv output is only available for free-energy, not {command}")
        buf = io.StringIO()
        buf.write("# params: " + json.dumps({k: params[k] for k in sorted(params)}) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["tau", "F", "n_used", "cauchy_gap"])
        for r in result["rows"]:
            writer.writerow([format(r["tau"], ".17g"), format(r["F"], ".17g"), r["n_used"], format(r["cauchy_gap"], ".17g")])
        return buf.getvalue()
    return to_json({"params": params, **result}) + "\n"


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        cli = {k.rstrip("_"): v for k, v in vars(args).items() if k not in ("command", "config")}
        config = read_config(args.config) if args.config else {}
        params = resolve(args.command, cli, config)
        with work_pool(params["parallelism"]) as mapper:
            if args.command == "spectrum":
                result = cmd_spectrum(params)
            elif args.command == "free-energy":
                result = cmd_free_energy(params, mapper)
            elif args.command == "lee-yang":
                result = cmd_lee_yang(params)
            elif args.command == "dims":
                result = cmd_dims(params)
            elif args.command == "orbit":
                result = cmd_orbit(params)
            elif args.command == "validate":
                result = cmd_validate(params, mapper)
            else:
                result = cmd_validate(params, mapper, numbers=list(validation.CLASSICAL_CHECKS))
        write_atomic(params["out"], _render(args.command, params, result))
    except UsageError as exc:
        print(f"qising: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"qising: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    if args.command.startswith("validate") and not result["all_passed"]:
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
