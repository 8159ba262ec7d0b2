"""Reading functions and run configurations, writing curve tables."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .grid import Grid, SampledFunction, make_grid, parse_endpoint
from .weights import WeightSpec


class InputError(ValueError):
    """Malformed input file or configuration."""


def read_xy_csv(path):
    """Read a two-column ``x,value`` CSV with strictly increasing x."""
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    xs, vs = [], []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["x", "value"]:
            raise InputError(f"{path}: row 1: header must be 'x,value', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise InputError(f"{path}: row {lineno}: expected 2 fields, got {len(row)}")
            try:
                x, v = float(row[0]), float(row[1])
            except ValueError:
                raise InputError(f"{path}: row {lineno}: not a number: {row}") from None
            if not (math.isfinite(x) and math.isfinite(v)):
                raise InputError(f"{path}: row {lineno}: non-finite value")
            if xs and x <= xs[-1]:
                raise InputError(f"{path}: row {lineno}: x={x} not above previous x={xs[-1]}")
            xs.append(x)
            vs.append(v)
    if len(xs) < 3:
        raise InputError(f"{path}: need at least 3 data rows, got {len(xs)}")
    return np.array(xs), np.array(vs)


def read_function_csv(path, l) -> SampledFunction:
    """Read a sampled function; its abscissas become the grid."""
    xs, vs = read_xy_csv(path)
    try:
        grid = Grid(xs, l=l, scheme="input")
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc
    return SampledFunction(grid, vs)


def write_function_csv(path, f: SampledFunction):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "value"])
        for x, v in zip(f.x, f.values):
            w.writerow([repr(float(x)), repr(float(v))])


def write_curves_csv(path, x, columns: dict):
    """Plot-ready table: an ``x`` column followed by the named curves."""
    names = list(columns)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x"] + names)
        for i in range(len(x)):
            w.writerow([repr(float(x[i]))] + [repr(float(columns[n][i])) for n in names])


def weight_from_config(cfg: dict, base_dir=".") -> WeightSpec:
    """Build a WeightSpec from the JSON weight configuration."""
    if "p" not in cfg:
        raise InputError("config: missing 'p'")
    kind = cfg.get("kind")
    l = cfg.get("l", 1.0)
    try:
        l = parse_endpoint(l)
        if kind == "power":
            if "s" not in cfg:
                raise InputError("config: power weight needs 's'")
            return WeightSpec.power(float(cfg["s"]), float(cfg["p"]), l)
        if kind == "table":
            if "path" not in cfg:
                raise InputError("config: table weight needs 'path'")
            tx, tw = read_xy_csv(Path(base_dir) / cfg["path"])
            head = cfg.get("head_exponent")
            return WeightSpec.tabulated(tx, tw, float(cfg["p"]), l,
                                        head_exponent=None if head is None else float(head))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"config: {exc}") from exc
    raise InputError(f"config: 'kind' must be 'power' or 'table', got {kind!r}")


def grid_from_config(gcfg: dict, l, psi=None) -> Grid:
    try:
        return make_grid(l, int(gcfg.get("n", 10_000)),
                         gcfg.get("scheme", "geometric-near-zero"),
                         x_min=float(gcfg.get("x_min", 1e-6)),
                         x_max=None if gcfg.get("x_max") is None else float(gcfg["x_max"]),
                         psi=psi, knots=gcfg.get("knots", ()))
    except (TypeError, ValueError) as exc:
        raise InputError(f"config grid: {exc}") from exc


def load_config(path) -> tuple:
    """Return (raw dict, WeightSpec) for a JSON run configuration."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise InputError(f"{path}: top level must be an object")
    return raw, weight_from_config(raw, base_dir=path.parent)
