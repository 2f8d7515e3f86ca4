"""Command line interface: config ingestion, subcommand dispatch, and
machine-readable output.

Subcommands:
    density   tabulate x, density, cdf on a grid
    sample    draw i.i.d. stationary samples
    simulate  run the Euler or crossing-construction simulator
    verify    run the diagnostics battery
    approx    step-profile approximation of a general-coefficient law
    info      print weights, betas, log etas, stability verdict

Exit codes: 0 success, 2 configuration/usage error, 3 verification failure
under --strict.  Identical (config, seed) invocations produce byte-identical
output: outputs carry no timestamps, floats serialize deterministically
(CSV with 17 significant digits, JSON with Python's exact shortest repr),
and all randomness flows through counter-based streams.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ImportError:  # python < 3.11
    import tomli as tomllib

import numpy as np

from .analytic import (
    cdf_at,
    conjectured_density_general,
    density_at,
    sample_stationary,
    segment_weights,
    stability_integral,
    stationary_law,
    stationary_mean,
    step_profile,
)
from .diagnostics import model_digest, run_battery
from .model import LevelSpec, MultiLevelModel, Stability, build_model, stability_check
from .sde import (
    ensemble_from_paths,
    simulate_crossing_construction,
    simulate_ensemble,
    simulate_path,
)

__all__ = ["ParseError", "RunConfig", "parse_config", "run", "main", "DEFAULT_SEED"]

DEFAULT_SEED = 1234


class ParseError(ValueError):
    """Config file is syntactically or structurally invalid."""


@dataclass
class RunConfig:
    """Echoable record of one invocation: the config path plus every
    command parameter that affects the output."""

    config_path: str
    command: str
    seed: int = DEFAULT_SEED
    out: str | None = None
    format: str = "csv"
    params: dict = field(default_factory=dict)

    def meta(self) -> dict:
        return {
            "config": self.config_path,
            "command": self.command,
            "seed": self.seed,
            **self.params,
        }


_MODEL_KEYS = ("boundaries", "sigmas", "drifts")


def _load_table(path: str | Path) -> dict:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"config file not found: {p}")
    text = p.read_text()
    if p.suffix.lower() == ".toml":
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as e:
            raise ParseError(f"{p}: invalid TOML: {e}") from e
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e_json:
            try:
                data = tomllib.loads(text)
            except tomllib.TOMLDecodeError:
                raise ParseError(f"{p}: invalid JSON: {e_json}") from e_json
    if not isinstance(data, dict):
        raise ParseError(f"{p}: top level must be a table/object")
    return data


def _number_list(table: dict, key: str, path) -> tuple:
    if key not in table:
        raise ParseError(f"{path}: missing key {key!r}")
    val = table[key]
    if not isinstance(val, (list, tuple)) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in val
    ):
        raise ParseError(f"{path}: key {key!r} must be an array of numbers")
    return tuple(float(v) for v in val)


def parse_config(path: str | Path, command: str = "") -> tuple[MultiLevelModel, RunConfig]:
    """Read a model config (JSON or TOML with keys boundaries, sigmas,
    drifts), validate it through build_model, and return the model with a
    RunConfig stub.  Unknown keys are errors, not warnings."""
    data = _load_table(path)
    unknown = sorted(set(data) - set(_MODEL_KEYS))
    if unknown:
        raise ParseError(
            f"{path}: unknown key {unknown[0]!r} (expected {', '.join(_MODEL_KEYS)})"
        )
    spec = LevelSpec(
        boundaries=_number_list(data, "boundaries", path),
        sigmas=_number_list(data, "sigmas", path),
        drifts=_number_list(data, "drifts", path),
    )
    model = build_model(spec)
    return model, RunConfig(config_path=str(path), command=command)


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def _write(out: str | None, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")


def _csv_table(header, columns) -> str:
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _json_dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _default_grid_max(model: MultiLevelModel) -> float:
    top = model.boundaries[-1] if model.k > 1 else 0.0
    return top + 10.0 / -model.betas[-1]


def _cmd_info(args) -> int:
    model, _ = parse_config(args.config, "info")
    verdict = stability_check(model)
    lines = [
        f"model {model_digest(model)}: k = {model.k} levels",
        f"boundaries: {list(model.boundaries)}",
        f"sigmas: {list(model.sigmas)}",
        f"drifts: {list(model.drifts)}",
        f"beta: {[f'{b:.6g}' for b in model.betas]}",
        f"log_eta: {[f'{v:.6g}' for v in model.log_etas]}",
        f"verdict: {verdict.value}",
    ]
    if verdict is Stability.STABLE:
        law = stationary_law(model)
        ws = ", ".join(
            f"d_{j + 1} = {w:.6g}" for j, w in enumerate(law.weights)
        )
        lines.append(f"weights: {ws}")
        lines.append(f"mean: {stationary_mean(law):.6g}")
        lines.append(f"E[Y(1)]: {0.5 / stability_integral(law):.6g}")
    print("\n".join(lines))
    return 0


def _cmd_density(args) -> int:
    model, cfg = parse_config(args.config, "density")
    law = stationary_law(model)
    grid_max = args.grid_max if args.grid_max is not None else _default_grid_max(model)
    if not grid_max > 0 or args.grid_points < 2:
        raise ParseError("need grid-max > 0 and grid-points >= 2")
    xs = np.linspace(0.0, grid_max, args.grid_points)
    dens = density_at(law, xs)
    cdf = cdf_at(law, xs)
    cfg.params = {"grid_max": grid_max, "grid_points": args.grid_points}
    if args.format == "csv":
        _write(args.output, _csv_table(["x", "density", "cdf"], [xs, dens, cdf]))
    else:
        _write(args.output, _json_dump({
            "x": list(xs), "density": list(dens), "cdf": list(cdf),
            "meta": cfg.meta(),
        }))
    return 0


def _cmd_sample(args) -> int:
    model, cfg = parse_config(args.config, "sample")
    law = stationary_law(model)
    if args.n < 1:
        raise ParseError(f"need n >= 1, got {args.n}")
    cfg.seed = args.seed
    cfg.params = {"n": args.n}
    samples = sample_stationary(law, args.seed, args.n)
    if args.format == "csv":
        _write(args.output, _csv_table(["z"], [samples]))
    else:
        _write(args.output, _json_dump({
            "samples": list(samples), "meta": cfg.meta(),
        }))
    return 0


def _parse_bandwidths(text: str) -> tuple:
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as e:
        raise ParseError(f"invalid bandwidth list {text!r}") from e
    if not vals:
        raise ParseError("bandwidth list is empty")
    return vals


def _cmd_simulate(args) -> int:
    model, cfg = parse_config(args.config, "simulate")
    bandwidths = _parse_bandwidths(args.bandwidths)
    cfg.seed = args.seed
    cfg.params = {
        "method": args.method, "n_paths": args.n_paths, "x0": args.x0,
        "T": args.T, "dt": args.dt, "burn_in": args.burn_in,
        "bandwidths": list(bandwidths), "store_every": args.store_every,
        "threads": args.threads,
    }
    if args.n_paths == 1:
        common = dict(
            local_time_bandwidths=bandwidths,
            burn_in=args.burn_in,
            store_every=args.store_every,
        )
        if args.method == "euler":
            path = simulate_path(model, args.x0, args.T, args.dt, args.seed, **common)
        else:
            path = simulate_crossing_construction(
                model, args.x0, args.T, args.seed, args.c, args.d,
                dt=args.dt, reset_to_switch_levels=args.reset_switch_levels,
                **common,
            )
        if args.format == "csv":
            _write(args.output, _csv_table(["t", "z", "y"], [path.times, path.z, path.y]))
        else:
            ens = ensemble_from_paths([path], method=args.method, seed=args.seed)
            _write(args.output, _json_dump({**ens.to_dict(), "meta_run": cfg.meta()}))
        return 0
    if args.format == "csv":
        raise ParseError("ensemble output is JSON only; csv applies to single paths")
    ens = simulate_ensemble(
        model, args.n_paths, args.x0, args.T, args.dt, args.seed,
        local_time_bandwidths=bandwidths,
        burn_in=args.burn_in,
        store_every=args.store_every,
        method=args.method,
        c=args.c,
        d=args.d,
        threads=args.threads,
    )
    _write(args.output, _json_dump({**ens.to_dict(), "meta_run": cfg.meta()}))
    return 0


def _cmd_verify(args) -> int:
    model, cfg = parse_config(args.config, "verify")
    report = run_battery(
        model,
        seed=args.seed,
        T=args.T,
        dt=args.dt,
        n_paths=args.n_paths,
        include_tanaka=not args.no_tanaka,
        threads=args.threads,
    )
    for c in report.checks:
        tag = "PASS" if c.passed else "FAIL"
        err = "" if c.stderr is None else f" stderr {c.stderr:.3g}"
        print(f"{tag}  {c.name}: value {c.value:.6g} vs tolerance {c.tolerance:.6g}{err}")
    n_fail = sum(not c.passed for c in report.checks)
    print(f"{len(report.checks) - n_fail}/{len(report.checks)} checks passed")
    if args.output:
        _write(args.output, report.to_json())
    if args.strict and n_fail:
        return 3
    return 0


_PROFILE_KEYS = ("x_max", "sigmas", "drifts", "breakpoints")


def _cmd_approx(args) -> int:
    path = args.profile
    data = _load_table(path)
    unknown = sorted(set(data) - set(_PROFILE_KEYS))
    if unknown:
        raise ParseError(
            f"{path}: unknown key {unknown[0]!r} (expected {', '.join(_PROFILE_KEYS)})"
        )
    if "x_max" not in data or not isinstance(data["x_max"], (int, float)):
        raise ParseError(f"{path}: missing numeric key 'x_max'")
    x_max = float(data["x_max"])
    sigmas = _number_list(data, "sigmas", path)
    drifts = _number_list(data, "drifts", path)
    if len(sigmas) != len(drifts):
        raise ParseError(
            f"{path}: sigmas ({len(sigmas)}) and drifts ({len(drifts)}) differ in length"
        )
    if "breakpoints" in data:
        breakpoints = _number_list(data, "breakpoints", path)
    else:
        breakpoints = tuple(
            x_max * i / len(sigmas) for i in range(1, len(sigmas))
        )
    sigma_fn = step_profile(breakpoints, sigmas)
    b_fn = step_profile(breakpoints, drifts)
    law = conjectured_density_general(sigma_fn, b_fn, x_max, args.resolution)
    xs = np.linspace(0.0, x_max, args.grid_points)
    dens = density_at(law, xs)
    cdf = cdf_at(law, xs)
    meta = {
        "profile": str(path),
        "resolution": args.resolution,
        "x_max": x_max,
        "stability_integral": stability_integral(law),
        "weights": list(law.weights),
        "experimental": "step-profile approximation of a conjectured law",
    }
    if args.format == "csv":
        _write(args.output, _csv_table(["x", "density", "cdf"], [xs, dens, cdf]))
    else:
        _write(args.output, _json_dump({
            "x": list(xs), "density": list(dens), "cdf": list(cdf), "meta": meta,
        }))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlsrbm",
        description="Stationary analysis and simulation of multi-level "
        "reflecting Brownian motions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, fmt_default="csv"):
        p.add_argument("-o", "--output", default=None, help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=fmt_default)

    p = sub.add_parser("info", help="print model summary and stationary weights")
    p.add_argument("config")
    p.set_defaults(fn=_cmd_info)

    p = sub.add_parser("density", help="tabulate density and cdf on a grid")
    p.add_argument("config")
    p.add_argument("--grid-max", type=float, default=None)
    p.add_argument("--grid-points", type=int, default=201)
    add_common(p)
    p.set_defaults(fn=_cmd_density)

    p = sub.add_parser("sample", help="draw stationary samples")
    p.add_argument("config")
    p.add_argument("-n", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    add_common(p)
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("simulate", help="simulate paths or ensembles")
    p.add_argument("config")
    p.add_argument("--method", choices=("euler", "crossing"), default="euler")
    p.add_argument("--n-paths", type=int, default=1)
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--T", type=float, default=100.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--burn-in", type=float, default=None)
    p.add_argument("--bandwidths", default="0.01", help="comma-separated")
    p.add_argument("--store-every", type=int, default=None, help="thinning factor")
    p.add_argument("--threads", type=int, default=1, help="0 = machine default")
    p.add_argument("--c", type=float, default=None, help="lower switch level")
    p.add_argument("--d", type=float, default=None, help="upper switch level")
    p.add_argument("--reset-switch-levels", action="store_true",
                   help="restart crossing segments exactly at c/d")
    add_common(p)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("verify", help="run the diagnostics battery")
    p.add_argument("config")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--T", type=float, default=2000.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--n-paths", type=int, default=16)
    p.add_argument("--no-tanaka", action="store_true",
                   help="skip the slow pathwise decomposition check")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--strict", action="store_true",
                   help="exit 3 if any check fails")
    p.add_argument("-o", "--output", default=None, help="write JSON report")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("approx", help="step-profile approximation (experimental)")
    p.add_argument("profile", help="profile file: x_max, sigmas, drifts[, breakpoints]")
    p.add_argument("--resolution", type=int, default=50)
    p.add_argument("--grid-points", type=int, default=201)
    add_common(p, fmt_default="json")
    p.set_defaults(fn=_cmd_approx)
    return parser


def run(argv) -> int:
    """Dispatch one invocation; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as e:
        code = e.code
        return int(code) if code else 0
    try:
        return args.fn(args)
    except (ParseError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
