"""Sample grids on (0, l), sampled functions and the quadrature rules built on them.

A :class:`Grid` never contains the endpoints of the open interval.  Each
sample point owns a cell (midpoint rule on interior points, half cells at
the two ends); the cell widths play the role of Lebesgue measure for point
sets.  Integrals over ``(0, x_1]`` treat the function as the constant
``f(x_1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

SCHEMES = ("uniform", "geometric-near-zero", "uniform-in-psi")


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def parse_endpoint(l) -> float:
    """Accept a positive number or one of ``inf``/``"inf"``/``None`` for l."""
    if l is None:
        return math.inf
    if isinstance(l, str):
        if l.strip().lower() in ("inf", "infinity", "+inf"):
            return math.inf
        l = float(l)
    l = float(l)
    if not (l > 0) or math.isnan(l):
        raise ValueError(f"right endpoint l must be positive, got {l}")
    return l


@dataclass(frozen=True, eq=False)
class Grid:
    """Strictly increasing abscissas inside the open interval (0, l)."""

    points: np.ndarray
    l: float = 1.0
    scheme: str = "uniform"

    def __post_init__(self):
        pts = _frozen(self.points)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "l", parse_endpoint(self.l))
        if pts.ndim != 1 or pts.size < 3:
            raise ValueError("a grid needs at least 3 points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("grid points must be finite")
        if pts[0] <= 0:
            raise ValueError(f"first grid point must be > 0, got {pts[0]}")
        if pts[-1] >= self.l:
            raise ValueError(f"last grid point {pts[-1]} must be < l={self.l}")
        steps = np.diff(pts)
        if np.any(steps <= 0):
            i = int(np.argmin(steps))
            raise ValueError(f"grid points must be strictly increasing (index {i + 1})")
        object.__setattr__(self, "widths", _frozen(cell_widths(pts)))

    def __len__(self):
        return self.points.size

    @property
    def x(self) -> np.ndarray:
        return self.points

    def same_as(self, other: "Grid") -> bool:
        return self is other or (
            len(self) == len(other)
            and self.l == other.l
            and np.array_equal(self.points, other.points)
        )

    def set_measure(self, mask_or_indices) -> float:
        """Measure of a set of grid points: the sum of their cell widths."""
        idx = np.asarray(mask_or_indices)
        if idx.dtype == bool:
            return float(self.widths[idx].sum())
        return float(self.widths[idx.astype(int)].sum())


def cell_widths(points) -> np.ndarray:
    """Midpoint cells for interior points and half cells at both ends.

    The widths coincide with the trapezoid weights, so they sum to
    ``x_N - x_1``.
    """
    x = np.asarray(points, dtype=float)
    d = np.diff(x)
    w = np.empty_like(x)
    w[0] = d[0] / 2
    w[-1] = d[-1] / 2
    w[1:-1] = (d[:-1] + d[1:]) / 2
    return w


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Finite real values attached to the points of a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        if v.shape != (len(self.grid),):
            raise ValueError(
                f"expected {len(self.grid)} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            bad = int(np.flatnonzero(~np.isfinite(v))[0])
            raise ValueError(f"values must be finite (index {bad})")
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return self.grid.points

    def __len__(self):
        return len(self.grid)

    def with_values(self, values) -> "SampledFunction":
        return SampledFunction(self.grid, values)

    def __mul__(self, c):
        return self.with_values(self.values * float(c))

    __rmul__ = __mul__

    def __add__(self, other: "SampledFunction"):
        _check_same_grid(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "SampledFunction"):
        _check_same_grid(self, other)
        return self.with_values(self.values - other.values)

    def __abs__(self):
        return self.with_values(np.abs(self.values))


def _check_same_grid(f: SampledFunction, g: SampledFunction):
    if not f.grid.same_as(g.grid):
        raise ValueError("functions live on different grids")


def sample(fn: Callable, grid: Grid) -> SampledFunction:
    """Evaluate a vectorised callable on the grid points."""
    vals = np.broadcast_to(np.asarray(fn(grid.points), dtype=float), grid.points.shape)
    return SampledFunction(grid, vals)


def indicator(lo: float, hi: float, closed: bool = True) -> Callable:
    """Indicator of the interval [lo, hi] (or (lo, hi) when ``closed=False``).

    Functions are equal up to null sets, so the choice only matters on
    grid points that sit exactly on an endpoint.
    """
    if closed:
        return lambda x: ((x >= lo) & (x <= hi)).astype(float)
    return lambda x: ((x > lo) & (x < hi)).astype(float)


def make_grid(l, n: int, scheme: str = "geometric-near-zero", x_min: float = 1e-6,
              x_max: Optional[float] = None, psi=None,
              knots: Sequence[float] = ()) -> Grid:
    """Build a grid of ``n`` points in [x_min, x_max] inside (0, l).

    Parameters
    ----------
    l : float or "inf"
        Right endpoint of the interval.
    n : int
        Number of points, at least 3.
    scheme : {"uniform", "geometric-near-zero", "uniform-in-psi"}
        Arithmetic progression, geometric progression (resolution
        concentrated near 0), or equal increments of ``psi``.
    x_min, x_max : float
        Truncation of the interval.  ``x_max`` is mandatory when l is
        infinite; for finite l it defaults to ``l * (1 - 1e-6)``.
    psi : PsiTransform, optional
        Needed by the "uniform-in-psi" scheme.
    knots : sequence of float
        Points that must belong to the grid.  The nearest grid point is
        moved onto each knot, so ``n`` is preserved.
    """
    l = parse_endpoint(l)
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    if x_max is None:
        if math.isinf(l):
            raise ValueError("x_max is required when l is infinite")
        x_max = l * (1 - 1e-6)
    x_min, x_max = float(x_min), float(x_max)
    if not (math.isfinite(x_min) and math.isfinite(x_max)):
        raise ValueError("x_min and x_max must be finite")
    if not (0 < x_min < x_max < l):
        raise ValueError(f"need 0 < x_min < x_max < l, got {x_min}, {x_max}, {l}")

    if scheme == "uniform":
        pts = np.linspace(x_min, x_max, n)
    elif scheme == "geometric-near-zero":
        pts = np.geomspace(x_min, x_max, n)
    elif scheme == "uniform-in-psi":
        if psi is None:
            raise ValueError("the uniform-in-psi scheme needs a PsiTransform")
        u = np.linspace(psi(x_min), psi(x_max), n)
        pts = psi.inverse(u[1:-1])
        pts = np.concatenate([[x_min], np.sort(pts), [x_max]])
    else:
        raise ValueError(f"unknown grid scheme {scheme!r}; pick one of {SCHEMES}")
    pts[0], pts[-1] = x_min, x_max

    for k in knots:
        k = float(k)
        if not (x_min <= k <= x_max):
            raise ValueError(f"knot {k} outside [{x_min}, {x_max}]")
        i = int(np.argmin(np.abs(pts - k)))
        pts[i] = k
    return Grid(pts, l=l, scheme=scheme)


def refine_grid(grid: Grid, centers: Sequence[float], half_width: float,
                levels: int = 20, ratio: float = 0.5) -> Grid:
    """Add graded point clusters around each center.

    The cluster around ``c`` is ``c`` itself plus ``c +- half_width * ratio**k``
    for ``k = 0 .. levels-1``; points falling outside the grid range are
    dropped.  Used to resolve jumps and kinks of sampled data.
    """
    extra = [grid.points]
    offs = half_width * ratio ** np.arange(levels)
    for c in centers:
        extra.append(np.concatenate([[c], c - offs, c + offs]))
    pts = np.unique(np.concatenate(extra))
    pts = pts[(pts >= grid.points[0]) & (pts <= grid.points[-1])]
    return Grid(pts, l=grid.l, scheme=grid.scheme)


def _interp_value(f: SampledFunction, t: float) -> float:
    return float(np.interp(t, f.x, f.values))


def trapezoid_integral(f: SampledFunction, lo: float, hi: float) -> float:
    """Trapezoid rule for f on [lo, hi], interpolating linearly at the cuts."""
    x, v = f.x, f.values
    if lo > hi:
        raise ValueError(f"lo={lo} > hi={hi}")
    if lo < x[0] or hi > x[-1]:
        raise ValueError(f"[{lo}, {hi}] not inside grid range [{x[0]}, {x[-1]}]")
    if lo == hi:
        return 0.0
    inner = (x > lo) & (x < hi)
    xs = np.concatenate([[lo], x[inner], [hi]])
    vs = np.concatenate([[_interp_value(f, lo)], v[inner], [_interp_value(f, hi)]])
    return float(np.sum((vs[1:] + vs[:-1]) * np.diff(xs)) / 2)


def integral(f: SampledFunction) -> float:
    """Trapezoid integral over the whole grid range."""
    return float(np.dot(f.grid.widths, f.values))


def cumulative_abs_integral(f: SampledFunction) -> SampledFunction:
    """F(x_i) = integral of |f| over (0, x_i].

    Trapezoid rule on [x_1, x_i] plus ``|f(x_1)| * x_1`` for the leading
    cell, where f is taken constant.
    """
    a = np.abs(f.values)
    x = f.x
    steps = (a[1:] + a[:-1]) * np.diff(x) / 2
    F = np.empty_like(a)
    F[0] = a[0] * x[0]
    F[1:] = F[0] + np.cumsum(steps)
    return f.with_values(F)


def cell_masses(f: SampledFunction) -> np.ndarray:
    """Running mass of |f| when every sample carries its cell.

    Entry i is ``|f(x_1)| x_1 + sum_{k<=i} |f(x_k)| width_k``: the value of
    the integral of |f| on the whole open interval (x_i, x_{i+1}).
    """
    a = np.abs(f.values)
    return a[0] * f.x[0] + np.cumsum(a * f.grid.widths)
