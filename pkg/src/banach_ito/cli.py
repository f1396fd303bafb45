"""``verify``: run verification campaigns from JSON configs.

    verify run <config.json | bundled-name> [--seed N] [--out-dir DIR] [--format csv|json]
    verify sweep <config> --param {shift,coarseness,path_count,t} --values v1,v2,...

Exit status is 0 when every row passes, 1 when a check fails and 2 for a
configuration error.  Reports are deterministic for a given config and seed;
wall-clock timings go to a separate ``timings.json``.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import math
import sys
import time
from importlib import resources
from pathlib import Path

import jsonschema

from .checks import CHECKS, EXACT_TOL, CheckRow, Context, excess, run_check

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
SWEEP_PARAMS = ("shift", "coarseness", "path_count", "t")
FIELDS = ["check_name", "t", "lhs", "rhs", "residual", "tolerance", "pass"]

_positive = {"type": "number", "exclusiveMinimum": 0}
CONFIG_SCHEMA = {
    "type": "object",
    "required": ["seed"],
    "properties": {
        "name": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "space": {
            "type": "object",
            "required": ["kind"],
            "properties": {"kind": {"enum": ["supgrid", "lp", "hilbert", "seqsup", "product"]},
                           "params": {"type": "object"}},
        },
        "martingale": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["random_walk", "random_tree", "brownian", "poisson"]},
                "steps": {"type": "integer", "minimum": 1, "maximum": 4096},
                "scale": _positive, "horizon": _positive, "rate": _positive,
                "path_count": {"type": "integer", "minimum": 1},
                "branching": {"type": "integer", "minimum": 2},
                "seed": {"type": "integer", "minimum": 0},
            },
            "allOf": [
                {"if": {"properties": {"kind": {"enum": ["brownian", "poisson"]}}},
                 "then": {"required": ["path_count", "steps"]}},
                {"if": {"properties": {"kind": {"const": "poisson"}}}, "then": {"required": ["rate"]}},
                {"if": {"properties": {"kind": {"enum": ["random_walk", "random_tree"]}}},
                 "then": {"required": ["steps"], "properties": {"steps": {"maximum": 20}}}},
            ],
        },
        "integrand": {
            "type": "object",
            "properties": {"family": {"enum": ["constant", "ramp", "random_adapted", "random_elementary"]},
                           "coords": {"type": "array", "items": {"type": "number"}}},
        },
        "checks": {
            "type": "array",
            "items": {"type": "object", "required": ["name"],
                      "properties": {"name": {"enum": sorted(CHECKS)}, "params": {"type": "object"}}},
        },
        "tolerances": {"type": "object", "additionalProperties": _positive},
        "output": {"type": "object", "properties": {"dir": {"type": "string"},
                                                     "format": {"enum": ["csv", "json"]}}},
    },
}


class ConfigError(Exception):
    pass


def bundled_configs() -> list[str]:
    root = resources.files("banach_ito") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_config(ref: str) -> dict:
    path = Path(ref)
    if path.is_file():
        text = path.read_text()
    elif ref in bundled_configs():
        text = (resources.files("banach_ito") / "configs" / f"{ref}.json").read_text()
    else:
        raise ConfigError(f"{ref}: no such file or bundled config")
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{ref}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    validate_config(cfg)
    return cfg


def validate_config(cfg) -> None:
    err = jsonschema.exceptions.best_match(jsonschema.Draft202012Validator(CONFIG_SCHEMA).iter_errors(cfg))
    if err is not None:
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"field {where}: {err.message}")


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def _json_safe(v):
    return None if isinstance(v, float) and not math.isfinite(v) else v


def digest(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def run_campaign(cfg: dict, seed: int | None = None) -> tuple[list[CheckRow], dict]:
    """Run every configured check in order; returns rows and per-check wall times."""
    if seed is not None:
        cfg = {**cfg, "seed": int(seed)}
    ctx = Context(cfg)
    tols = cfg.get("tolerances", {})
    rows, timings = [], {}
    for i, spec in enumerate(cfg.get("checks", [])):
        start = time.perf_counter()
        try:
            got = run_check(ctx, i, spec)
        except (ValueError, KeyError, TypeError, IndexError) as exc:
            raise ConfigError(f"field checks/{i}: {type(exc).__name__}: {exc}") from None
        if spec["name"] in tols:
            # a configured tolerance replaces the per-row defaults of that check
            got = [dataclasses.replace(r, tolerance=float(tols[spec["name"]])) for r in got]
        rows.extend(got)
        timings[f"{i}:{spec['name']}"] = time.perf_counter() - start
    return rows, timings


def _sweep_config(cfg, param, value):
    cfg = json.loads(json.dumps(cfg))
    checks = cfg.get("checks", [])
    if param == "path_count":
        cfg.setdefault("martingale", {})["path_count"] = int(value)
        return cfg
    name = {"shift": "shift", "coarseness": "approximation", "t": "continuity"}[param]
    chosen = [c for c in checks if c["name"] == name] or [{"name": name}]
    spec = json.loads(json.dumps(chosen[0]))
    p = spec.setdefault("params", {})
    p["values"] = [int(value) if param == "coarseness" else float(value)]
    if param == "coarseness":
        p["full_resolution"] = False
    cfg["checks"] = [spec]
    return cfg


def sweep(cfg: dict, param: str, values, seed: int | None = None):
    """Rows for each value, ordered by value; monotonicity is checked across values."""
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"unknown sweep parameter {param!r}; choose from {', '.join(SWEEP_PARAMS)}")
    table, timings, prev = [], {}, None
    for v in sorted(values):
        rows, t = run_campaign(_sweep_config(cfg, param, v), seed)
        timings[f"{param}={v:g}"] = sum(t.values())
        if param != "path_count" and rows:
            head = rows[0].lhs
            if prev is not None:
                # finer N should not lose to coarser N; a smaller shift or t should not exceed a larger one
                res = excess(head, prev) if param == "coarseness" else excess(prev, head)
                rows.append(CheckRow(f"{param}.monotone", float(v), head, prev, res, EXACT_TOL))
            prev = head
        table.extend({"param": param, "value": v, **r.as_dict()} for r in rows)
    return table, timings


def _write_reports(out_dir: Path, stem: str, records: list[dict], head: list[str], meta: dict, timings: dict):
    out_dir.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(head)
    for d in records:
        w.writerow([_fmt(d[k]) for k in head])
    (out_dir / f"{stem}.csv").write_text(buf.getvalue())
    safe = [{k: _json_safe(d[k]) for k in head} for d in records]
    (out_dir / f"{stem}.json").write_text(json.dumps({**meta, "rows": safe}, indent=2, sort_keys=True) + "\n")
    (out_dir / "timings.json").write_text(json.dumps(timings, indent=2, sort_keys=True) + "\n")
    return buf.getvalue()


def _parse_values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"--values: cannot parse {text!r} as numbers") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="verify", description="Run Itô integral verification campaigns.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("run", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("config", help="path to a JSON config or the name of a bundled config")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out-dir", default=None)
        p.add_argument("--format", choices=["csv", "json"], default=None)
        if name == "sweep":
            p.add_argument("--param", required=True)
            p.add_argument("--values", required=True)
    sub.add_parser("list", help="list bundled configs")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        print("\n".join(bundled_configs()))
        return EXIT_OK
    try:
        cfg = load_config(args.config)
        out = cfg.get("output", {})
        out_dir = Path(args.out_dir or out.get("dir", "verify-out"))
        fmt = args.format or out.get("format", "csv")
        seed = cfg["seed"] if args.seed is None else args.seed
        meta = {"config": cfg.get("name", args.config), "seed": seed,
                "inputs_digest": digest({**cfg, "seed": seed})}
        if args.command == "run":
            rows, timings = run_campaign(cfg, seed)
            records = [r.as_dict() for r in rows]
            text = _write_reports(out_dir, "report", records, FIELDS, meta, timings)
        else:
            records, timings = sweep(cfg, args.param, _parse_values(args.values), seed)
            meta["param"] = args.param
            text = _write_reports(out_dir, "sweep", records, ["param", "value"] + FIELDS, meta, timings)
    except ConfigError as exc:
        print(f"verify: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if fmt == "json":
        print(json.dumps({**meta, "rows": [{k: _json_safe(v) for k, v in d.items()} for d in records]},
                         indent=2, sort_keys=True))
    else:
        sys.stdout.write(text)
    failing = [d for d in records if not d["pass"]]
    if failing:
        print(f"verify: {len(failing)} of {len(records)} rows failed", file=sys.stderr)
        for d in failing:
            print(f"  FAIL {d['check_name']} residual={d['residual']!r} tolerance={d['tolerance']!r}",
                  file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
