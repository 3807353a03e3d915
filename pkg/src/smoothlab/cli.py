"""Command line runner: ``smoothlab run <config>`` and ``smoothlab list-checks``.

A run config (TOML or JSON, chosen by extension) looks like::

    checks = ["JACKSON_TRIG", {id = "DIRECT_TRIG", params = {p = 0.7}},
              {id = "PR1T", name = "PR1T_control", params = {gamma = 0.0}}]
    format = "both"            # json | csv | both

    [global]
    seed = 42
    output_dir = "results"
    quadrature = {rel_tol = 1e-8}
    solver = {starts = 3}

``checks = "all"`` runs every catalog check followed by both sharpness
sweeps.  Each entry writes ``<name>.csv`` and/or ``<name>.json`` and the run
writes ``summary.json``.  Exit status is 0 when every verdict passes, 1 when
some check fails (artifacts are still written) and 2 on a config error.
"""

from __future__ import annotations

import argparse
import dataclasses
import difflib
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .approx import BestApproxConfig
from .catalog import CheckId, CheckReport, Context, SharpnessKind, list_checks, sharpness_sweep
from .catalog.checks import resolve_params, run_check
from .catalog.context import CATALOG_SOLVER, FAMILIES
from .catalog.report import _jsonable
from .catalog.sharpness import resolve_sharpness
from .errors import ConfigError, SmoothLabError
from .quasinorm import QuadratureSpec

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

FORMATS = ("json", "csv", "both")
VALID = [c.value for c in CheckId] + [s.value for s in SharpnessKind]


@dataclass(frozen=True)
class Entry:
    """One requested check: its id, output name and parameter overrides."""

    id: str
    name: str
    params: dict = field(default_factory=dict)


@dataclass
class RunConfig:
    checks: list
    seed: int = 0
    output_dir: str = "smoothlab_out"
    quadrature: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    format: str = "both"


def _check_name(name) -> str:
    if not isinstance(name, str) or name not in VALID:
        hint = difflib.get_close_matches(str(name), VALID, n=1)
        extra = f"; did you mean {hint[0]!r}?" if hint else ""
        raise ConfigError(f"unknown check {name!r}{extra} valid checks: {', '.join(VALID)}")
    return name


def _entry(item) -> Entry:
    if isinstance(item, str):
        return Entry(_check_name(item), item)
    if not isinstance(item, dict) or "id" not in item:
        raise ConfigError(f"check entries are names or tables with an 'id'; got {item!r}")
    unknown = set(item) - {"id", "name", "params"}
    if unknown:
        raise ConfigError(f"unknown check entry keys: {', '.join(sorted(unknown))}")
    cid = _check_name(item["id"])
    params = item.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError(f"params of {cid} must be a table")
    name = str(item.get("name", cid))
    if not name or any(c in name for c in "/\\") or name.startswith("."):
        raise ConfigError(f"bad output name {name!r}")
    return Entry(cid, name, dict(params))


def _validate_params(e: Entry):
    f = e.params.get("f")
    if f is not None and (not isinstance(f, dict) or f.get("family") not in FAMILIES):
        raise ConfigError(f"{e.name}: f must be a table with family in {', '.join(FAMILIES)}")
    if e.id in SharpnessKind.__members__:
        resolve_sharpness(e.id, e.params)
    else:
        resolve_params(e.id, e.params)


def _overrides(cls, values, what):
    if not isinstance(values, dict):
        raise ConfigError(f"{what} overrides must be a table")
    known = {f.name for f in dataclasses.fields(cls)} - {"seed", "quad", "jobs"}
    bad = set(values) - known
    if bad:
        raise ConfigError(f"unknown {what} keys: {', '.join(sorted(bad))}; known: "
                          f"{', '.join(sorted(known))}")
    return dict(values)


def parse_config(data: dict) -> RunConfig:
    """Validate a decoded config; every problem raises :class:`ConfigError`."""
    if not isinstance(data, dict):
        raise ConfigError("the config must be a table")
    unknown = set(data) - {"checks", "global", "format"}
    if unknown:
        raise ConfigError(f"unknown top-level keys: {', '.join(sorted(unknown))}")
    raw = data.get("checks", [])
    if raw == "all":
        raw = VALID
    if not isinstance(raw, list):
        raise ConfigError("checks must be a list or \"all\"")
    entries = [_entry(item) for item in raw]
    names = [e.name for e in entries]
    dup = sorted({n for n in names if names.count(n) > 1})
    if dup:
        raise ConfigError(f"duplicate output names: {', '.join(dup)}; give entries a 'name'")
    for e in entries:
        _validate_params(e)
    g = data.get("global", {})
    if not isinstance(g, dict):
        raise ConfigError("global must be a table")
    bad = set(g) - {"seed", "output_dir", "quadrature", "solver"}
    if bad:
        raise ConfigError(f"unknown global keys: {', '.join(sorted(bad))}")
    fmt = data.get("format", "both")
    if fmt not in FORMATS:
        raise ConfigError(f"format must be one of {', '.join(FORMATS)}")
    seed = g.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("seed must be a non-negative integer")
    cfg = RunConfig(entries, seed, str(g.get("output_dir", "smoothlab_out")),
                    _overrides(QuadratureSpec, g.get("quadrature", {}), "quadrature"),
                    _overrides(BestApproxConfig, g.get("solver", {}), "solver"), fmt)
    make_context(cfg)
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".toml":
            data = tomllib.loads(text)
        elif path.suffix.lower() == ".json":
            data = json.loads(text)
        else:
            raise ConfigError(f"config must end in .toml or .json: {path}")
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return parse_config(data)


def make_context(cfg: RunConfig, jobs: int = 1) -> Context:
    try:
        quad = QuadratureSpec(**cfg.quadrature)
        solver = {**CATALOG_SOLVER, **cfg.solver}
        BestApproxConfig(quad=quad, **solver)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad quadrature or solver override: {exc}") from exc
    return Context(seed=cfg.seed, jobs=jobs, solver=solver, quad=quad)


def run_entry(e: Entry, ctx: Context) -> CheckReport:
    if e.id in SharpnessKind.__members__:
        return sharpness_sweep(e.id, e.params, ctx)
    return run_check(e.id, e.params, ctx)


def write_report(rep: CheckReport, name: str, out: Path, fmt: str):
    if fmt in ("csv", "both"):
        (out / f"{name}.csv").write_text(rep.to_csv())
    if fmt in ("json", "both"):
        (out / f"{name}.json").write_text(rep.to_json() + "\n")


def execute(cfg: RunConfig, jobs: int = 1, log=None) -> tuple[int, dict]:
    """Run ``cfg``, write its artifacts and return ``(exit_status, summary)``."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    ctx = make_context(cfg, jobs)

    def one(e: Entry):
        try:
            return run_entry(e, ctx)
        except SmoothLabError as exc:
            return exc

    results = ctx.pmap(one, cfg.checks)
    summary = {}
    for e, res in zip(cfg.checks, results):
        if isinstance(res, CheckReport):
            write_report(res, e.name, out, cfg.format)
            summary[e.name] = res.summary()
        else:
            err = {"verdict": "error", "error": f"{type(res).__name__}: {res}"}
            (out / f"{e.name}.json").write_text(json.dumps(err, indent=2, sort_keys=True) + "\n")
            summary[e.name] = {**err, "max_ratio": None, "fitted": {}, "runtime": None}
        if log is not None:
            s = summary[e.name]
            log(f"{e.name:20s} {s['verdict']:5s} max_ratio={s['max_ratio']}")
    (out / "summary.json").write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    ok = all(s["verdict"] == "pass" for s in summary.values())
    return (0 if ok else 1), summary


def _jobs(value) -> int:
    if value is None:
        value = os.environ.get("SMOOTHLAB_JOBS", "1")
    try:
        jobs = int(value)
    except ValueError as exc:
        raise ConfigError(f"jobs must be an integer, got {value!r}") from exc
    if jobs < 1:
        raise ConfigError("jobs must be >= 1")
    return jobs


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="smoothlab", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the checks listed in a TOML or JSON config")
    run.add_argument("config")
    run.add_argument("--seed", type=int, help="override global.seed")
    run.add_argument("--out", help="override global.output_dir")
    run.add_argument("--jobs", help="concurrent checks (default: $SMOOTHLAB_JOBS or 1)")
    ls = sub.add_parser("list-checks", help="list catalog checks in declaration order")
    ls.add_argument("--json", action="store_true", help="emit a JSON array")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-checks":
        rows = list_checks()
        if args.json:
            print(json.dumps(rows, indent=2))
        else:
            for r in rows:
                print(f"{r['id']:16s} {r['description']}\n{'':16s} {r['statement']}")
        return 0
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("seed must be non-negative")
            cfg.seed = args.seed
        if args.out is not None:
            cfg.output_dir = args.out
        jobs = _jobs(args.jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    status, _ = execute(cfg, jobs, log=print)
    return status


__all__ = ["RunConfig", "Entry", "parse_config", "load_config", "execute", "main", "VALID"]
