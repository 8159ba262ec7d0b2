"""Psi-concavity and the least Psi-concave majorant of sampled data.

In the coordinate u = Psi(x) a Psi-concave function is an ordinary
concave function, so the majorant of |f| is the upper concave hull of the
points (Psi(x_i), |f(x_i)|).  Because Psi(0+) is infinite the majorant is
nondecreasing in u; on a truncated grid this is enforced by replacing the
part of the hull past its maximum with a flat segment.

Samples stop at x_N < l and f is taken to vanish beyond x_N, so the hull
also contains the point (u, v) = (0, 0), the image of x = l.  The first
segment therefore runs from that anchor to the first hull vertex and the
majorant tends to 0 at l.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .grid import SampledFunction

CROSS_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class Majorant:
    """Piecewise Psi-affine function stored in u-coordinates.

    Attributes
    ----------
    u, v : ndarray
        Breakpoints, u strictly increasing, v the majorant values.
    x : ndarray
        Preimages Psi^{-1}(u) of the breakpoints (grid abscissas).
    slopes : ndarray
        ``(v[k+1] - v[k]) / (u[k+1] - u[k])``; nonnegative and nonincreasing.
    psi : PsiTransform
    x_range : tuple
        Grid range (x_1, x_N) the majorant was built on.
    """

    u: np.ndarray
    v: np.ndarray
    x: np.ndarray
    slopes: np.ndarray
    psi: object
    x_range: Tuple[float, float]

    @property
    def limit_at_l(self) -> float:
        """Value of the majorant as x -> l (the anchor makes it 0)."""
        return float(self.v[0])

    def to_dict(self) -> dict:
        def xval(c):
            return "inf" if np.isinf(c) else float(c)
        return {
            "breakpoints": [{"u": float(a), "v": float(b), "x": xval(c)}
                            for a, b, c in zip(self.u, self.v, self.x)],
            "slopes": [float(s) for s in self.slopes],
        }


@dataclass(frozen=True)
class SupportLine:
    """T(x) = B + A * Psi(x), touching the majorant at ``y``."""

    A: float
    B: float
    y: float

    def __call__(self, x, psi):
        return self.B + self.A * np.asarray(psi(x))


def is_psi_concave(f: SampledFunction, psi, tol: float = 0.0):
    """Test the three-point difference-quotient inequality on consecutive triples.

    Returns
    -------
    ok : bool
    triple : tuple of int or None
        Indices (i, i+1, i+2) of the first violation.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    u = np.asarray(psi(f.x))
    v = f.values
    q = np.diff(v) / np.diff(u)
    bad = np.flatnonzero(q[:-1] > q[1:] + tol)
    if bad.size:
        i = int(bad[0])
        return False, (i, i + 1, i + 2)
    return True, None


def _upper_hull(u, v):
    """Indices of the upper concave hull of points sorted by increasing u.

    Collinear points (relative cross product below CROSS_RTOL) are dropped.
    """
    hull = []
    for k in range(u.size):
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            d1u, d1v = u[j] - u[i], v[j] - v[i]
            d2u, d2v = u[k] - u[i], v[k] - v[i]
            cross = d1u * d2v - d1v * d2u
            scale = abs(d1u * d2v) + abs(d1v * d2u)
            if cross >= -CROSS_RTOL * scale:
                hull.pop()
            else:
                break
        hull.append(k)
    return hull


def essential_majorant(f: SampledFunction, psi) -> Majorant:
    """Least Psi-concave majorant of |f| on the grid of f."""
    x = f.x
    u = np.concatenate([[0.0], np.asarray(psi(x))[::-1]])
    v = np.concatenate([[0.0], np.abs(f.values)[::-1]])
    xr = np.concatenate([[psi.l], x[::-1]])
    idx = _upper_hull(u, v)
    hu, hv, hx = u[idx], v[idx], xr[idx]
    top = int(np.argmax(hv))
    if top < hu.size - 1:
        hu = np.append(hu[:top + 1], u[-1])
        hv = np.append(hv[:top + 1], hv[top])
        hx = np.append(hx[:top + 1], xr[-1])
    slopes = np.diff(hv) / np.diff(hu)
    slopes = np.maximum(slopes, 0.0)
    return Majorant(u=hu, v=hv, x=hx, slopes=slopes, psi=psi,
                    x_range=(float(x[0]), float(x[-1])))


def _u_of(m: Majorant, x):
    x = np.asarray(x, dtype=float)
    lo = m.x_range[0]
    if np.any(x < lo * (1 - 1e-15)) or np.any(x >= m.psi.l):
        raise ValueError(f"x outside [{lo}, {m.psi.l})")
    return np.asarray(m.psi(np.maximum(x, lo)), dtype=float)


def _eval_u(m: Majorant, uu):
    return np.interp(uu, m.u, m.v)


def majorant_eval(m: Majorant, x):
    """Evaluate the majorant at x in [x_1, l).

    Beyond the last grid point the majorant follows its first segment,
    which ends at 0 at x = l.
    """
    scalar = np.ndim(x) == 0
    out = _eval_u(m, _u_of(m, x))
    return float(out) if scalar else out


def sample_majorant(m: Majorant, grid) -> SampledFunction:
    return SampledFunction(grid, majorant_eval(m, grid.points))


def _slope_u(m: Majorant, uu):
    k = np.clip(np.searchsorted(m.u, uu, side="left") - 1, 0, m.slopes.size - 1)
    return m.slopes[k]


def d_psi_plus(m: Majorant, x):
    """Right derivative of the majorant with respect to Psi.

    At a breakpoint the slope of the segment on the smaller-u side is
    returned, which is the segment to the right of x; the result is
    right-continuous in x.
    """
    scalar = np.ndim(x) == 0
    out = _slope_u(m, _u_of(m, x))
    return float(out) if scalar else out


def d_psi_minus(m: Majorant, x):
    """Left derivative with respect to Psi (larger-u segment at breakpoints)."""
    scalar = np.ndim(x) == 0
    uu = _u_of(m, x)
    k = np.clip(np.searchsorted(m.u, uu, side="right") - 1, 0, m.slopes.size - 1)
    out = m.slopes[k]
    return float(out) if scalar else out


def support_line(m: Majorant, y: float) -> SupportLine:
    """Psi-affine line through the majorant at y that dominates it."""
    uy = float(_u_of(m, y))
    A = float(_slope_u(m, uy))
    vy = float(_eval_u(m, uy))
    return SupportLine(A=A, B=vy - A * uy, y=float(y))


def running_max_bound(f: SampledFunction, psi, i: int) -> float:
    """Upper bound B_y Psi(y) + A_y for the majorant at grid index i.

    A_y is the max of |f| to the right of y and B_y the max of |f|/Psi to
    the left (both including y).
    """
    a = np.abs(f.values)
    u = np.asarray(psi(f.x))
    return float(np.max(a[:i + 1] / u[:i + 1]) * u[i] + np.max(a[i:]))
