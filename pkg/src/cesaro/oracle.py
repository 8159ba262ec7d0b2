"""Brute-force references for small instances.

These deliberately avoid the hull and segment machinery of the production
code so that agreement is evidence of correctness.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .grid import SampledFunction
from .norms import _head_integral, cesaro_norm_p, pairing

MAX_MAJORANT_N = 200
MAX_COMBINATION_N = 40


@dataclass
class OracleResult:
    value: object
    evaluations: int
    exhaustive: bool


def brute_majorant_points(u, v) -> OracleResult:
    """Least nondecreasing concave majorant of (u_i, v_i) as a minimum over lines.

    Candidate lines pass through pairs of points with nonnegative slope and
    must dominate every point; the horizontal line at max v is always a
    candidate.  Each value is the minimum of the candidates at u_i.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    n = u.size
    if n > MAX_MAJORANT_N:
        raise ValueError(f"brute_majorant is limited to N <= {MAX_MAJORANT_N}")
    i, j = np.triu_indices(n, k=1)
    du = u[j] - u[i]
    slope = (v[j] - v[i]) / du
    keep = slope >= 0
    A = np.append(slope[keep], 0.0)
    B = np.append(v[i][keep] - slope[keep] * u[i][keep], v.max())
    lines = A[:, None] * u[None, :] + B[:, None]
    scale = np.maximum(np.abs(v).max(), 1.0)
    dominates = np.all(lines >= v[None, :] - 1e-12 * scale, axis=1)
    best = lines[dominates].min(axis=0)
    return OracleResult(value=best, evaluations=int(lines.size), exhaustive=True)


def _with_anchor(f: SampledFunction, psi):
    """Sample points plus (0, 0), the image of x = l where f vanishes."""
    u = np.concatenate([np.asarray(psi(f.x)), [0.0]])
    v = np.concatenate([np.abs(f.values), [0.0]])
    return u, v


def brute_majorant(f: SampledFunction, psi) -> OracleResult:
    """Values of the majorant of |f| at the grid points (ordered as the grid)."""
    u, v = _with_anchor(f, psi)
    res = brute_majorant_points(u, v)
    res.value = res.value[:-1]
    return res


def brute_combination_majorant(f: SampledFunction, psi, max_n: int = 2) -> OracleResult:
    """Maximise sum alpha_i |f(y_i)| over convex combinations with sum alpha_i Psi(y_i) <= Psi(y).

    ``max_n`` is the largest tuple size (1, 2 or 3).  The inequality in the
    constraint encodes monotonicity of the majorant in x.
    """
    if max_n not in (1, 2, 3):
        raise ValueError("max_n must be 1, 2 or 3")
    if len(f) > MAX_COMBINATION_N:
        raise ValueError(f"brute_combination_majorant is limited to N <= {MAX_COMBINATION_N}")
    u, v = _with_anchor(f, psi)
    n = u.size
    evals = 0
    # singles: any point with Psi(y_i) <= Psi(y)
    below = u[None, :] <= u[:, None]
    best = np.where(below, v[None, :], -np.inf).max(axis=1)
    evals += n * n
    if max_n >= 2:
        i, j = np.triu_indices(n, k=1)
        lo = np.where(u[i] < u[j], i, j)
        hi = np.where(u[i] < u[j], j, i)
        for y in range(n):
            uy = u[y]
            ok = (u[lo] <= uy) & (u[hi] >= uy)
            t = (uy - u[lo[ok]]) / (u[hi[ok]] - u[lo[ok]])
            vals = (1 - t) * v[lo[ok]] + t * v[hi[ok]]
            if vals.size:
                best[y] = max(best[y], vals.max())
            evals += int(ok.size)
    if max_n >= 3:
        trip = np.array(list(itertools.combinations(range(n), 3)))
        # alpha_k = t on the third entry, the rest on the pair
        for a, b, c in ((0, 1, 2), (0, 2, 1), (1, 2, 0)):
            pi, pj, pk = trip[:, a], trip[:, b], trip[:, c]
            ulo = np.minimum(u[pi], u[pj])
            uhi = np.maximum(u[pi], u[pj])
            vlo = np.where(u[pi] < u[pj], v[pi], v[pj])
            vhi = np.where(u[pi] < u[pj], v[pj], v[pi])
            for y in range(n):
                uy = u[y]
                # feasible t: pair mean r(t) = (uy - t u_k)/(1 - t) must lie in [ulo, uhi]
                uk = u[pk]
                t_grid = np.linspace(0.0, 0.999, 7)
                for t in t_grid:
                    r = (uy - t * uk) / (1 - t)
                    ok = (r >= ulo) & (r <= uhi)
                    if not ok.any():
                        continue
                    s = (r[ok] - ulo[ok]) / (uhi[ok] - ulo[ok])
                    vals = t * v[pk[ok]] + (1 - t) * ((1 - s) * vlo[ok] + s * vhi[ok])
                    best[y] = max(best[y], vals.max())
                    evals += int(ok.sum())
                # t = 1 is the single point y_k, feasible when u_k <= uy
    return OracleResult(value=best[:-1], evaluations=evals, exhaustive=max_n >= 2)


def brute_dual_norm(f: SampledFunction, wspec, iters: int = 10_000, seed: int = 0) -> OracleResult:
    """Lower bound for sup { int f g : ||g||_{C_{p,w}} <= 1 } by coordinate ascent.

    g is kept nonnegative and matched to sign f; each step maximises the
    ratio pairing / norm in one coordinate by bounded scalar search and
    renormalises.
    """
    n = len(f)
    if n > MAX_MAJORANT_N:
        raise ValueError(f"brute_dual_norm is limited to N <= {MAX_MAJORANT_N}")
    a = np.abs(f.values)
    if not a.any():
        return OracleResult(value=0.0, evaluations=0, exhaustive=False)
    rng = np.random.default_rng(seed)
    W = f.grid.widths
    p = wspec.p
    u = np.asarray(wspec.psi(f.x))
    du = np.append(u[:-1] - u[1:], u[-1])
    support = np.flatnonzero(a > 0)

    head_unit = _head_integral(1.0, float(f.x[0]), wspec)
    x1 = float(f.x[0])
    if not np.isfinite(head_unit):
        # any mass on the first cell has infinite norm
        support = support[support > 0]
        head_unit = 0.0
    if support.size == 0:
        return OracleResult(value=0.0, evaluations=0, exhaustive=False)

    g = np.zeros(n)
    g[support] = rng.random(support.size)
    evals = 0

    def masses(gv):
        return gv[0] * x1 + np.cumsum(gv * W)

    def ratio_parts(gv):
        S = masses(gv)
        norm_p = float(np.dot(S ** p, du)) + head_unit * gv[0] ** p
        return float(np.dot(W, a * gv)), norm_p

    num, norm_p = ratio_parts(g)
    best = num / norm_p ** (1 / p)
    for _ in range(iters):
        i = int(support[rng.integers(support.size)])
        S = masses(g)
        base_num = num - W[i] * a[i] * g[i]
        step = W[i] + (x1 if i == 0 else 0.0)
        Sm = S.copy()
        Sm[i:] -= step * g[i]

        def neg_ratio(t, i=i, Sm=Sm, base_num=base_num, step=step):
            St = Sm.copy()
            St[i:] += step * t
            npow = float(np.dot(St ** p, du))
            if i == 0:
                npow += head_unit * t ** p
            else:
                npow += head_unit * g[0] ** p
            if npow <= 0:
                return 0.0
            return -(base_num + W[i] * a[i] * t) / npow ** (1 / p)

        hi = 4.0 * max(g.max(), 1e-300)
        res = minimize_scalar(neg_ratio, bounds=(0.0, hi), method="bounded",
                              options={"xatol": 1e-10 * hi})
        evals += int(res.nfev)
        cand = float(res.x)
        if -res.fun >= best:
            g[i] = cand
            num, norm_p = ratio_parts(g)
            scale = norm_p ** (1 / p)
            g /= scale
            num /= scale
            best = num
    gfun = f.with_values(g * np.where(f.values < 0, -1.0, 1.0))
    value = pairing(f, gfun) / cesaro_norm_p(gfun, wspec) ** (1 / p)
    return OracleResult(value=float(value), evaluations=evals, exhaustive=False)
