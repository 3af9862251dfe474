"""Experiment runner: config ingestion, sweeps, and flat-file artifact output.

Configs are strict INI-style documents with sections [model], [numerics],
[initial], [sweep] and [output]. All floating-point output is emitted with
17 significant digits; wall-clock metadata is segregated into meta.txt so
summary and series files are byte-stable for a fixed config and seed.
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import sys
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .diagnostics import Verdict
from .model import ModelConfig, RadialGrid, validate_initial_data
from .profiles import FAMILIES, FAMILY_PARAMS, build_initial_profile
from .solver import NumericsConfig, RunResult, run


class ConfigError(ValueError):
    """Config document rejected; message carries line information when known."""


def _fmt(value) -> str:
    """Render a value for output files; floats get 17 significant digits."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


@dataclass(frozen=True)
class ProfileConfig:
    family: str
    params: dict

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(
                f"initial.family must be one of {FAMILIES}, got '{self.family}'"
            )
        unknown = set(self.params) - FAMILY_PARAMS[self.family]
        if unknown:
            raise ValueError(
                f"initial.{sorted(unknown)[0]} does not apply to family "
                f"'{self.family}'"
            )


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelConfig
    numerics: NumericsConfig
    n_cells: int
    snapshot_times: tuple
    initial: ProfileConfig
    seed: int
    sweep: Optional[dict]
    # invocation context, not part of the experiment's identity
    output_dir: str = field(compare=False, default="runs")

    def __post_init__(self):
        if self.n_cells < 8:
            raise ValueError("numerics.n_cells must be at least 8")
        if self.sweep is not None:
            for key, values in self.sweep.items():
                if len(values) == 0:
                    raise ValueError(f"sweep.{key} must be a non-empty list")


_SCHEMA = {
    "model": {
        "dim": int,
        "delta": int,
        "pressure_const": float,
        "gamma": float,
        "support_radius": float,
    },
    "numerics": {
        "n_cells": int,
        "cfl": float,
        "t_end": float,
        "dt_floor": float,
        "steepening_threshold": float,
        "output_stride": int,
        "support_margin_cells": int,
        "snapshot_times": "float_list",
    },
    "initial": {
        "family": str,
        "seed": int,
        "velocity_amplitude": float,
        "density_amplitude": float,
        "width": float,
        "modes": int,
    },
    "sweep": {
        "delta": "int_list",
        "pressure_const": "float_list",
        "gamma": "float_list",
        "n_cells": "int_list",
    },
    "output": {"dir": str},
}

_SWEEPABLE = ("delta", "pressure_const", "gamma", "n_cells")


def _convert(raw: str, kind, where: str):
    label = kind if isinstance(kind, str) else kind.__name__
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind is str:
            return raw
        items = [s.strip() for s in raw.split(",") if s.strip()]
        if kind == "int_list":
            return tuple(int(s) for s in items)
        if kind == "float_list":
            return tuple(float(s) for s in items)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse '{raw}' as {label}") from None
    raise AssertionError(f"unknown schema kind {kind}")


def _scan(text: str, strict: bool) -> dict:
    """Tokenize the document into {section: {key: (raw, line)}} with strictness."""
    sections: dict = {}
    seen: dict = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith(("#", ";")):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip()
            if section not in _SCHEMA:
                if strict:
                    raise ConfigError(f"line {lineno}: unknown section [{section}]")
                print(
                    f"warning: ignoring unknown section [{section}] (line {lineno})",
                    file=sys.stderr,
                )
                section = "__ignored__"
            sections.setdefault(section, {})
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got '{stripped}'")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside of any [section]")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if section == "__ignored__":
            continue
        if key not in _SCHEMA[section]:
            if strict:
                raise ConfigError(
                    f"line {lineno}: unknown key '{key}' in section [{section}]"
                )
            print(
                f"warning: ignoring unknown key '{key}' in [{section}] (line {lineno})",
                file=sys.stderr,
            )
            continue
        if (section, key) in seen:
            first = seen[(section, key)]
            raise ConfigError(
                f"duplicate key '{key}' in section [{section}] "
                f"(lines {first} and {lineno})"
            )
        seen[(section, key)] = lineno
        sections.setdefault(section, {})[key] = (raw, lineno)
    sections.pop("__ignored__", None)
    return sections


def parse_config(text: str, strict: bool = True) -> ExperimentConfig:
    """Parse and fully validate a config document.

    Unknown sections or keys are rejected in strict mode; duplicate keys are
    always rejected, reporting both their line numbers. Semantic violations
    name the offending field.
    """
    sections = _scan(text, strict)

    def values(section: str) -> dict:
        out = {}
        for key, (raw, lineno) in sections.get(section, {}).items():
            out[key] = _convert(raw, _SCHEMA[section][key], f"line {lineno}: {section}.{key}")
        return out

    model_kw = values("model")
    try:
        model = ModelConfig(**model_kw)
    except ValueError as exc:
        raise ConfigError(f"model.{exc}") from None

    num_kw = values("numerics")
    n_cells = num_kw.pop("n_cells", 256)
    snapshot_times = num_kw.pop("snapshot_times", ())
    try:
        numerics = NumericsConfig(**num_kw)
    except ValueError as exc:
        raise ConfigError(f"numerics.{exc}") from None

    init_kw = values("initial")
    family = init_kw.pop("family", "polynomial_bump")
    seed = init_kw.pop("seed", 0)
    if "velocity_amplitude" not in init_kw:
        init_kw["velocity_amplitude"] = 1.0
    if "density_amplitude" not in init_kw:
        init_kw["density_amplitude"] = 1.0
    try:
        initial = ProfileConfig(family=family, params=init_kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    sweep = values("sweep") or None
    output_dir = values("output").get("dir", "runs")

    try:
        return ExperimentConfig(
            model=model,
            numerics=numerics,
            n_cells=n_cells,
            snapshot_times=tuple(snapshot_times),
            initial=initial,
            seed=seed,
            sweep=sweep,
            output_dir=output_dir,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_config_file(path, strict: bool = True) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"), strict=strict)


def resolved_config_text(config: ExperimentConfig) -> str:
    """Render a sweep-free config that re-parses to the same ExperimentConfig."""
    if config.sweep is not None:
        raise ValueError("resolved configs must be sweep-free")
    m, n = config.model, config.numerics
    lines = [
        "[model]",
        f"dim = {m.dim}",
        f"delta = {m.delta}",
        f"pressure_const = {_fmt(m.pressure_const)}",
        f"gamma = {_fmt(m.gamma)}",
        f"support_radius = {_fmt(m.support_radius)}",
        "",
        "[numerics]",
        f"n_cells = {config.n_cells}",
        f"cfl = {_fmt(n.cfl)}",
        f"t_end = {_fmt(n.t_end)}",
        f"dt_floor = {_fmt(n.dt_floor)}",
        f"steepening_threshold = {_fmt(n.steepening_threshold)}",
        f"output_stride = {n.output_stride}",
        f"support_margin_cells = {n.support_margin_cells}",
    ]
    if config.snapshot_times:
        joined = ", ".join(_fmt(t) for t in config.snapshot_times)
        lines.append(f"snapshot_times = {joined}")
    lines += [
        "",
        "[initial]",
        f"family = {config.initial.family}",
        f"seed = {config.seed}",
    ]
    for key in sorted(config.initial.params):
        lines.append(f"{key} = {_fmt(config.initial.params[key])}")
    lines.append("")
    return "\n".join(lines)


def config_hash(config: ExperimentConfig) -> str:
    return hashlib.sha256(
        resolved_config_text(config).encode("utf-8")
    ).hexdigest()[:12]


def expand_sweep(config: ExperimentConfig) -> list[tuple[str, ExperimentConfig]]:
    """Materialize the cartesian product of sweep lists as (run_id, config) pairs."""
    if config.sweep is None:
        return [("run-0000", replace(config, sweep=None))]
    keys = [k for k in _SWEEPABLE if k in config.sweep]
    combos = list(itertools.product(*(config.sweep[k] for k in keys)))
    runs = []
    for index, combo in enumerate(combos):
        model_kw = {}
        n_cells = config.n_cells
        for key, value in zip(keys, combo):
            if key == "n_cells":
                n_cells = value
            else:
                model_kw[key] = value
        model = replace(config.model, **model_kw)
        runs.append(
            (
                f"run-{index:04d}",
                replace(config, model=model, n_cells=n_cells, sweep=None),
            )
        )
    return runs


def build_run_fields(config: ExperimentConfig):
    """Grid plus initial fields for one resolved run."""
    grid = RadialGrid(n_cells=config.n_cells, support_radius=config.model.support_radius)
    profile = build_initial_profile(
        config.initial.family,
        config.initial.params,
        config.seed,
        grid,
        config.numerics.support_margin_cells,
    )
    return grid, profile


def _write_series(path: Path, result: RunResult) -> None:
    s = result.series
    cols = (
        s.times,
        s.h_values,
        s.mass_values,
        s.energy_values,
        s.riccati_residuals,
        s.envelope_values,
        s.cauchy_gaps,
        s.max_gradients,
    )
    lines = ["t\tH\tmass\tenergy_lhs\triccati_residual\tenvelope\tcauchy_gap\tmax_abs_dVdr"]
    for row in zip(*cols):
        lines.append("\t".join(f"{v:.17g}" for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_summary(path: Path, run_id: str, config: ExperimentConfig, result: RunResult) -> None:
    r = result.report
    m, n = config.model, config.numerics
    pairs = [
        ("run_id", run_id),
        ("config_hash", config_hash(config)),
        ("verdict", r.verdict.value),
        ("bound_applicable", r.bound_applicable),
        ("t_bound", r.t_bound if r.t_bound is not None else "n/a"),
        ("t_detect", r.t_detect if r.t_detect is not None else "n/a"),
        ("h0", r.h0),
        ("t_final", r.t_final),
        ("termination", r.termination),
        ("envelope_ok", r.envelope_ok if r.envelope_ok is not None else "n/a"),
        ("envelope_tolerance_rel", r.envelope_tolerance),
        ("mass_drift_rel", r.mass_drift_rel),
        ("scope_flags", ",".join(r.scope_flags) if r.scope_flags else "none"),
        ("blowup_definition", r.blowup_definition),
        ("n_cells", config.n_cells),
        ("dim", m.dim),
        ("delta", m.delta),
        ("pressure_const", m.pressure_const),
        ("gamma", m.gamma),
        ("support_radius", m.support_radius),
        ("family", config.initial.family),
        ("seed", config.seed),
        ("cfl", n.cfl),
        ("t_end", n.t_end),
        ("dt_floor", n.dt_floor),
        ("steepening_threshold", n.steepening_threshold),
        ("output_stride", n.output_stride),
        ("support_margin_cells", n.support_margin_cells),
    ]
    path.write_text(
        "\n".join(f"{k}: {_fmt(v)}" for k, v in pairs) + "\n", encoding="utf-8"
    )


def _write_snapshots(run_dir: Path, config: ExperimentConfig, result: RunResult, grid) -> None:
    if not config.snapshot_times:
        return
    stored = result.trajectory.snapshots
    stored_times = np.asarray([s.time for s in stored])
    r = grid.cell_centers
    for wanted in config.snapshot_times:
        state = stored[int(np.argmin(np.abs(stored_times - wanted)))]
        name = f"snapshot-{wanted:.6g}.tsv"
        lines = ["r\trho\tV", f"# time = {state.time:.17g}"]
        for i in range(grid.n_cells):
            lines.append(f"{r[i]:.17g}\t{state.rho[i]:.17g}\t{state.vel[i]:.17g}")
        (run_dir / name).write_text("\n".join(lines) + "\n", encoding="utf-8")


def run_single(run_id: str, config: ExperimentConfig, out_root: str) -> dict:
    """Execute one resolved run and write its artifact files."""
    t_start = time.time()
    run_dir = Path(out_root) / run_id
    run_dir.mkdir(parents=True, exist_ok=True)
    grid, profile = build_run_fields(config)
    check = validate_initial_data(
        profile.rho0, profile.v0, grid, config.model,
        margin_cells=config.numerics.support_margin_cells,
    )
    if not check.h0_positive:
        print(
            f"warning: {run_id}: h0 = {check.h0:.6g} is not positive; "
            "bound verdict will be not_applicable",
            file=sys.stderr,
        )
    result = run(profile.rho0, profile.v0, config.model, config.numerics)
    _write_series(run_dir / "series.tsv", result)
    _write_summary(run_dir / "summary.txt", run_id, config, result)
    (run_dir / "resolved-config.txt").write_text(
        resolved_config_text(config), encoding="utf-8"
    )
    _write_snapshots(run_dir, config, result, grid)
    elapsed = time.time() - t_start
    (run_dir / "meta.txt").write_text(
        f"started_unix: {t_start:.3f}\nelapsed_seconds: {elapsed:.3f}\n",
        encoding="utf-8",
    )
    rep = result.report
    return {
        "run_id": run_id,
        "verdict": rep.verdict.value,
        "termination": rep.termination,
        "t_detect": rep.t_detect,
        "t_bound": rep.t_bound,
        "h0": rep.h0,
        "config_hash": config_hash(config),
    }


def _run_entry(args: tuple) -> dict:
    return run_single(*args)


def exit_status(outcomes: list[dict]) -> int:
    """Exit-code contract: 2 if any verdict is violated, 1 on any runtime
    failure, 0 otherwise."""
    if any(o.get("verdict") == Verdict.VIOLATED.value for o in outcomes):
        return 2
    if any(o.get("failed") for o in outcomes):
        return 1
    return 0


def execute(
    config: ExperimentConfig, output_dir: Optional[str] = None, jobs: int = 1
) -> int:
    """Run every sweep entry, write the summary index, and return the exit code."""
    out_root = output_dir if output_dir is not None else config.output_dir
    try:
        runs = expand_sweep(replace(config, output_dir=out_root))
    except ValueError as exc:
        print(f"error: invalid sweep entry: {exc}", file=sys.stderr)
        return 1
    tasks = [(run_id, cfg, out_root) for run_id, cfg in runs]

    outcomes: list[dict] = []
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_entry, task) for task in tasks]
            for task, future in zip(tasks, futures):
                try:
                    outcomes.append(future.result())
                except Exception:
                    traceback.print_exc()
                    outcomes.append({"run_id": task[0], "failed": True})
    else:
        for task in tasks:
            try:
                outcomes.append(_run_entry(task))
            except Exception:
                traceback.print_exc()
                outcomes.append({"run_id": task[0], "failed": True})

    index_lines = ["run_id\tverdict\ttermination\tt_detect\tt_bound\th0\tconfig_hash"]
    for o in sorted(outcomes, key=lambda d: d["run_id"]):
        if o.get("failed"):
            index_lines.append(f"{o['run_id']}\tfailed\t-\t-\t-\t-\t-")
            continue
        t_detect = "n/a" if o["t_detect"] is None else f"{o['t_detect']:.17g}"
        t_bound = "n/a" if o["t_bound"] is None else f"{o['t_bound']:.17g}"
        index_lines.append(
            f"{o['run_id']}\t{o['verdict']}\t{o['termination']}\t"
            f"{t_detect}\t{t_bound}\t{o['h0']:.17g}\t{o['config_hash']}"
        )
    try:
        root = Path(out_root)
        root.mkdir(parents=True, exist_ok=True)
        (root / "index.tsv").write_text("\n".join(index_lines) + "\n", encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot write to output directory: {exc}", file=sys.stderr)
        return 1
    return exit_status(outcomes)


def check(config: ExperimentConfig) -> int:
    """Validate the config and initial data without stepping; print findings."""
    for run_id, resolved in expand_sweep(config):
        grid, profile = build_run_fields(resolved)
        report = validate_initial_data(
            profile.rho0, profile.v0, grid, resolved.model,
            margin_cells=resolved.numerics.support_margin_cells,
        )
        applicable = (
            report.h0_positive and resolved.model.delta >= 0 and report.eos_in_scope
        )
        t_bound = (
            f"{resolved.model.support_radius**3 / (2 * report.h0):.6g}"
            if report.h0_positive
            else "n/a"
        )
        print(
            f"{run_id}: n_cells={resolved.n_cells} delta={resolved.model.delta} "
            f"pressure_const={resolved.model.pressure_const:g} "
            f"gamma={resolved.model.gamma:g} family={resolved.initial.family} "
            f"h0={report.h0:.6g} t_bound={t_bound} bound_applicable={applicable}"
        )
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="radialblowup",
        description=(
            "Radial compressible flow solver with finite-time blowup diagnostics."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "execute a single-run config"),
        ("sweep", "execute every entry of a parameter sweep"),
        ("check", "validate a config without running"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="path to the config document")
        p.add_argument("--output-dir", default=None, help="override [output] dir")
        p.add_argument("--jobs", type=int, default=1, help="parallel worker count")
        p.add_argument(
            "--strict",
            action=argparse.BooleanOptionalAction,
            default=True,
            help="reject unknown config keys (default on)",
        )
    args = parser.parse_args(argv)

    try:
        config = parse_config_file(args.config, strict=args.strict)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if args.command == "check":
        try:
            return check(config)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    if args.command == "run" and config.sweep is not None:
        print(
            "error: config contains a [sweep] section; use the sweep command",
            file=sys.stderr,
        )
        return 1
    return execute(config, output_dir=args.output_dir, jobs=args.jobs)


if __name__ == "__main__":
    raise SystemExit(main())
