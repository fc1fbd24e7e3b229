"""Command-line front end.

Precedence of settings: built-in defaults, then ``--config`` file, then flags.
Exit codes: 0 success, 1 an audit found a violation, 2 usage error,
3 numeric domain error, 4 I/O error. Failures print a JSON error record on
stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

from . import __version__
from .analytic import correction_terms, expected_degree_count, expected_X, expected_Y
from .exceptions import BuckleyOsthusError
from .experiments.cover import build_stable_cover, check_stability, check_witness
from .experiments.ensemble import EnsembleSpec, concentration_probe, run_ensemble
from .experiments.perturbation import lipschitz_audit
from .io import atomic_write, dumps_json, edge_list_text, import_edge_list, write_manifest
from .model import ModelParams, generate
from .statistics import count_tables

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_DOMAIN, EXIT_IO = 0, 1, 2, 3, 4

COMMANDS = ("generate", "stats", "predict", "experiment", "perturb-audit", "cover-audit")

DEFAULTS = {
    "a": 1.0,
    "m": 1,
    "n": 1000,
    "seed": 0,
    "replicas": 20,
    "k_grid": [4, 8, 16, 32],
    "epsilon": None,
    "format": None,
    "trials": 1000,
    "completions": 100,
    "jobs": 1,
    "input": None,
    "out": None,
}

_INT_KEYS = {"m", "n", "seed", "replicas", "trials", "completions", "jobs"}
_FLOAT_KEYS = {"a", "epsilon"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _k_grid(text):
    if isinstance(text, (list, tuple)):
        return [int(k) for k in text]
    try:
        return [int(k) for k in str(text).replace(" ", "").split(",") if k]
    except ValueError as exc:
        raise UsageError(f"bad k grid {text!r}") from exc


def _coerce(key, value):
    if value is None:
        return None
    if key == "k_grid":
        return _k_grid(value)
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad value for {key}: {value!r}") from exc
    return value


def load_config(path):
    """Read a JSON object or ``key = value`` lines (``#`` comments allowed)."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
        if not isinstance(doc, dict):
            raise UsageError("config JSON must be an object")
    except json.JSONDecodeError:
        doc = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"config line without '=': {raw!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            doc[key] = val
    out = {}
    for key, val in doc.items():
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"unknown config key {key!r}")
        out[key] = _coerce(key, val)
    return out


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--a", type=float)
    common.add_argument("--m", type=int)
    common.add_argument("--n", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--replicas", type=int)
    common.add_argument("--k-grid", dest="k_grid", type=_k_grid, help="comma separated, e.g. 4,8,16")
    common.add_argument("--epsilon", type=float)
    common.add_argument("--out", help="output path; stdout if omitted")
    common.add_argument("--format", choices=("json", "csv", "edges"),
                        help="generate defaults to a text edge list, other commands to json")
    common.add_argument("--config", help="JSON or key=value file")
    common.add_argument("--trials", type=int)
    common.add_argument("--completions", type=int)
    common.add_argument("--jobs", type=int)

    parser = _Parser(prog="buckley-osthus", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("generate", parents=[common], help="sample one graph and write its edge list")
    p = sub.add_parser("stats", parents=[common], help="count tables of a graph")
    p.add_argument("--input", help="edge list file; otherwise a graph is generated")
    sub.add_parser("predict", parents=[common], help="leading-order predictions")
    sub.add_parser("experiment", parents=[common], help="Monte Carlo ensemble")
    sub.add_parser("perturb-audit", parents=[common], help="single-coordinate Lipschitz audit")
    sub.add_parser("cover-audit", parents=[common], help="stable cover budget and witness audit")
    return parser


def resolve_config(args):
    """Merge defaults, config file and explicit flags into one dict."""
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(load_config(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    cfg["command"] = args.command
    if cfg["format"] is None:
        cfg["format"] = "edges" if args.command == "generate" else "json"
    if cfg["format"] == "edges" and args.command != "generate":
        raise UsageError("--format edges applies to generate only")
    return cfg


def _params(cfg):
    return ModelParams(cfg["a"], cfg["m"], cfg["n"])


def _model_meta(cfg):
    return {"a": float(cfg["a"]), "m": cfg["m"], "n": cfg["n"], "seed": cfg["seed"]}


def _embedded(cfg):
    # the destination path is not part of the artifact
    return {k: v for k, v in cfg.items() if k != "out"}


def _csv_header(cfg):
    return "".join(f"# {k}={_fmt(v)}\n" for k, v in sorted(_embedded(cfg).items()) if v is not None)


def _csv(rows, cfg):
    buf = io.StringIO()
    buf.write(_csv_header(cfg))
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def _fmt(v):
    return ",".join(map(str, v)) if isinstance(v, list) else str(v)


def _cmd_generate(cfg):
    params = _params(cfg)
    _, g = generate(params, cfg["seed"])
    if cfg["format"] == "json":
        return dumps_json({"config": _embedded(cfg), "vertices": g.vertex_count, "edges": g.edges.tolist()}), EXIT_OK
    return edge_list_text(g, _model_meta(cfg)), EXIT_OK


def _cmd_stats(cfg):
    if cfg["input"]:
        g, _ = import_edge_list(cfg["input"])
    else:
        _, g = generate(_params(cfg), cfg["seed"])
    tables = count_tables(g)
    if cfg["format"] == "csv":
        return _csv_header(cfg) + tables.to_csv(), EXIT_OK
    return dumps_json({"config": _embedded(cfg), "tables": tables.as_dict()}), EXIT_OK


def _cmd_predict(cfg):
    params = _params(cfg)
    n, a = cfg["n"], cfg["a"]
    rows = []
    for k in cfg["k_grid"]:
        rows.append({
            "k": k,
            "expected_Y": expected_Y(n, k, a),
            "expected_X": expected_X(n, k, a),
            "expected_degree_count": expected_degree_count(k, n, params),
            "corrections": list(correction_terms(n, k, a)),
        })
    if cfg["format"] == "csv":
        table = [["k", "expected_Y", "expected_X", "expected_degree_count"]]
        table += [[r["k"], repr(r["expected_Y"]), repr(r["expected_X"]), repr(r["expected_degree_count"])] for r in rows]
        return _csv(table, cfg), EXIT_OK
    return dumps_json({"config": _embedded(cfg), "predictions": rows}), EXIT_OK


def _spec(cfg):
    return EnsembleSpec(_params(cfg), cfg["replicas"], cfg["seed"], tuple(cfg["k_grid"]), n_jobs=cfg["jobs"])


def _cmd_experiment(cfg):
    spec = _spec(cfg)
    report = run_ensemble(spec)
    doc = report.as_dict()
    doc.pop("wall_time_s")  # timing lives in the manifest so artifacts stay byte-identical
    n, a = cfg["n"], cfg["a"]
    doc["expected_Y"] = [expected_Y(n, k, a) if k >= 2 else None for k in spec.k_grid]
    doc["expected_X"] = [expected_X(n, k, a) for k in spec.k_grid]
    probe = None
    if cfg["epsilon"] is not None:
        probe = concentration_probe(spec, cfg["epsilon"], report)
        doc["concentration"] = [
            {"k": r.k, "statistic": r.statistic, "threshold": r.threshold, "rate": r.rate,
             "wilson_low": r.low, "wilson_high": r.high}
            for r in probe
        ]
    if cfg["format"] == "csv":
        table = [["k", "mean_Y", "sd_Y", "mean_X", "sd_X", "expected_Y", "expected_X"]]
        for j, k in enumerate(spec.k_grid):
            table.append([k, doc["mean_Y"][j], doc["sd_Y"][j], doc["mean_X"][j], doc["sd_X"][j],
                          doc["expected_Y"][j], doc["expected_X"][j]])
        return _csv(table, cfg), EXIT_OK
    doc["config"] = _embedded(cfg)
    return dumps_json(doc), EXIT_OK


def _cmd_perturb(cfg):
    params = _params(cfg)
    results = []
    for k in cfg["k_grid"]:
        r = lipschitz_audit(params, k, cfg["trials"], cfg["seed"])
        results.append({"k": k, "bound": r.bound, "trials": r.trials, "max_delta": r.max_delta,
                        "violations": r.violations})
    status = EXIT_VIOLATION if any(r["violations"] for r in results) else EXIT_OK
    if cfg["format"] == "csv":
        table = [["k", "bound", "trials", "max_delta", "violations"]]
        table += [[r["k"], r["bound"], r["trials"], r["max_delta"], r["violations"]] for r in results]
        return _csv(table, cfg), status
    return dumps_json({"config": _embedded(cfg), "audit": results}), status


def _cmd_cover(cfg):
    params = _params(cfg)
    results = []
    for r in range(cfg["replicas"]):
        seed = cfg["seed"] + r
        seq, g = generate(params, seed)
        for k in cfg["k_grid"]:
            cover = build_stable_cover(g, seq, k)
            fails = check_witness(cover, seq, cfg["completions"], seed)
            results.append({
                "seed": seed, "k": k, "q": cover.q, "cost": cover.total_cost, "budget": cover.budget,
                "stable": check_stability(cover, seq), "witness_failures": len(fails),
            })
    bad = any(not x["stable"] or x["witness_failures"] or x["cost"] > x["budget"] for x in results)
    status = EXIT_VIOLATION if bad else EXIT_OK
    if cfg["format"] == "csv":
        cols = ["seed", "k", "q", "cost", "budget", "stable", "witness_failures"]
        return _csv([cols] + [[x[c] for c in cols] for x in results], cfg), status
    return dumps_json({"config": _embedded(cfg), "covers": results}), status


HANDLERS = {
    "generate": _cmd_generate,
    "stats": _cmd_stats,
    "predict": _cmd_predict,
    "experiment": _cmd_experiment,
    "perturb-audit": _cmd_perturb,
    "cover-audit": _cmd_cover,
}


def dispatch(cfg):
    """Run one command; returns ``(text, exit status)`` and writes ``cfg['out']`` if set."""
    t0 = time.perf_counter()
    text, status = HANDLERS[cfg["command"]](cfg)
    if cfg["out"]:
        atomic_write(cfg["out"], text)
        write_manifest(cfg["out"], cfg, time.perf_counter() - t0)
    return text, status


def _error(kind, exc, code):
    record = {"error": kind, "type": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(record), file=sys.stderr)
    return code


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
    except UsageError as exc:
        return _error("usage", exc, EXIT_USAGE)
    except OSError as exc:
        return _error("io", exc, EXIT_IO)
    try:
        text, status = dispatch(cfg)
    except UsageError as exc:
        return _error("usage", exc, EXIT_USAGE)
    except (BuckleyOsthusError, ValueError, ArithmeticError) as exc:
        return _error("domain", exc, EXIT_DOMAIN)
    except OSError as exc:
        return _error("io", exc, EXIT_IO)
    if not cfg["out"]:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
