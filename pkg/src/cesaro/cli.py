"""Command-line interface: ``cesaro <command> --config cfg.json ...``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from importlib import resources

import jsonschema
import numpy as np

from .io import (InputError, grid_from_config, load_config, read_function_csv,
                 write_curves_csv)
from .majorant import essential_majorant, majorant_eval
from .norms import (apply_Aw, apply_Bw, cesaro_norm, dual_membership, dual_norm,
                    dual_norm_quadrature)
from .oracle import MAX_MAJORANT_N, brute_dual_norm
from .weights import WeightError, validate_weight
from .witness import RefinementError, l1_escape_sequence, near_optimizer, slice_witnesses

log = logging.getLogger("cesaro")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3

SCHEMAS = {
    "norm": "norm_report.schema.json",
    "dual-norm": "norm_report.schema.json",
    "majorant": "majorant.schema.json",
    "duality": "witness.schema.json",
    "slice": "witness.schema.json",
    "l1-escape": "l1_escape.schema.json",
}


def load_schema(name: str) -> dict:
    text = resources.files("cesaro.schemas").joinpath(name).read_text()
    return json.loads(text)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _need_input(args):
    if not args.input:
        raise InputError(f"command '{args.command}' needs --input")


def _load(args):
    raw, wspec = load_config(args.config)
    diag = validate_weight(wspec)
    if not diag.ok:
        raise InputError(f"weight fails conditions: {diag.failures()}")
    return raw, wspec, diag


def _param(args, raw, name, default=None):
    val = getattr(args, name)
    if val is None:
        val = raw.get(name, default)
    if val is None:
        raise InputError(f"missing --{name}")
    return float(val)


def cmd_norm(args, raw, wspec):
    _need_input(args)
    f = read_function_csv(args.input, wspec.l)
    rep = cesaro_norm(f, wspec).to_dict()
    if args.curves:
        write_curves_csv(args.curves, f.x, {"f": f.values, "Aw_f": apply_Aw(f, wspec).values})
    return rep


def cmd_dual_norm(args, raw, wspec):
    _need_input(args)
    f = read_function_csv(args.input, wspec.l)
    m = essential_majorant(f, wspec.psi)
    rep = dual_norm(f, wspec, majorant=m).to_dict()
    rep["quadrature_value"] = dual_norm_quadrature(f, wspec, majorant=m).value
    rep["membership"] = dual_membership(f, wspec)
    if args.oracle:
        if len(f) > MAX_MAJORANT_N:
            raise InputError(f"--oracle needs at most {MAX_MAJORANT_N} grid points, got {len(f)}")
        res = brute_dual_norm(f, wspec, iters=int(raw.get("oracle_iters", 10_000)),
                              seed=args.seed)
        rep["oracle"] = {"value": res.value, "evaluations": res.evaluations,
                         "exhaustive": res.exhaustive, "gap": rep["value"] - res.value}
    if args.curves:
        write_curves_csv(args.curves, f.x, {
            "f": f.values, "fhat": majorant_eval(m, f.x),
            "Bw_f": apply_Bw(f, wspec, majorant=m).values})
    return rep


def cmd_majorant(args, raw, wspec):
    _need_input(args)
    f = read_function_csv(args.input, wspec.l)
    m = essential_majorant(f, wspec.psi)
    rep = m.to_dict()
    if args.curves:
        write_curves_csv(args.curves, f.x, {"f": f.values, "fhat": majorant_eval(m, f.x)})
    return rep


def _witness_curves(args, f, rep):
    cols = {"f": f.values, "g": rep.g.values}
    if rep.g2 is not None:
        cols = {"f": f.values, "g1": rep.g.values, "g2": rep.g2.values}
    write_curves_csv(args.curves, f.x, cols)


def cmd_duality(args, raw, wspec):
    _need_input(args)
    f = read_function_csv(args.input, wspec.l)
    eps = _param(args, raw, "eps", 0.1)
    rep = near_optimizer(f, wspec, eps)
    if args.curves:
        _witness_curves(args, f, rep)
    return rep.to_dict()


def cmd_slice(args, raw, wspec):
    _need_input(args)
    f = read_function_csv(args.input, wspec.l)
    eps = _param(args, raw, "eps", 0.04)
    eta = _param(args, raw, "eta", 0.5)
    rep = slice_witnesses(f, wspec, eps, eta)
    if args.curves:
        _witness_curves(args, f, rep)
    return rep.to_dict()


def cmd_l1_escape(args, raw, wspec):
    n_max = int(args.n_max or raw.get("n_max", 16))
    if n_max < 1:
        raise InputError("--n-max must be >= 1")
    grid = None
    if "grid" in raw:
        grid = grid_from_config(raw["grid"], wspec.l, psi=wspec.psi)
    rows = []
    n = 1
    while n <= n_max:
        _, r = l1_escape_sequence(wspec, n, grid=grid)
        rows.append(r)
        n *= 2
    return {"rows": rows}


COMMANDS = {
    "norm": cmd_norm,
    "dual-norm": cmd_dual_norm,
    "majorant": cmd_majorant,
    "duality": cmd_duality,
    "slice": cmd_slice,
    "l1-escape": cmd_l1_escape,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cesaro",
                                 description="Cesaro function space norms, dual norms and witnesses.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="JSON weight/run configuration")
    ap.add_argument("--input", help="CSV with header x,value")
    ap.add_argument("--out", help="report path (default: stdout)")
    ap.add_argument("--eps", type=float)
    ap.add_argument("--eta", type=float)
    ap.add_argument("--oracle", action="store_true", help="cross-check with the brute-force oracle")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n-max", type=int, dest="n_max")
    ap.add_argument("--curves", help="also write plot-ready curves to this CSV")
    return ap


def _setup_logging():
    level = os.environ.get("CESARO_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        raw, wspec, diag = _load(args)
        log.info("running %s with weight %s", args.command, wspec.describe())
        body = COMMANDS[args.command](args, raw, wspec)
    except (ValueError, WeightError) as exc:
        # InputError and argument checks of the numerical routines
        print(f"cesaro: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RefinementError as exc:
        print(f"cesaro: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    report = _jsonable({"command": args.command, "weight": wspec.describe(),
                        "weight_check": diag.to_dict(), **body})
    jsonschema.validate(report, load_schema(SCHEMAS[args.command]))
    text = json.dumps(report, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
