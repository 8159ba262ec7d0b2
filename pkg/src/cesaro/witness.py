"""Constructive witnesses for the dual norm.

``near_optimizer`` builds g >= 0 (times sign f) in the Cesaro unit ball,
up to a factor 1 + eps, whose pairing with a normalised f is close to 1.
The running integral of g follows the staircase of
h = (D_Psi^+ f_hat)^(q/p) between two cut points a < b:

* the grid points between a and b are grouped into consecutive cells on
  which h grows by at most eps / (4 gamma), gamma = Psi(a)^(1/p), and f_hat
  drops by at most eps / (4 h(b));
* a point where h jumps by at least eps / (4 gamma) gets a bracket cell of
  its own, narrow enough in Psi-measure;
* the growth of h over a cell is spread uniformly over the cell's
  contact points, where |f| is within eps / (4 h(b)) of f_hat.

``slice_witnesses`` does the same with each contact set split into two
disjoint halves, producing g1, g2 with disjoint supports.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .grid import Grid, SampledFunction, make_grid
from .majorant import essential_majorant, majorant_eval, d_psi_plus
from .norms import cesaro_norm, dual_norm, pairing

log = logging.getLogger(__name__)

MAX_SHRINK = 200


class RefinementError(RuntimeError):
    """The grid is too coarse for the construction near ``x``."""

    def __init__(self, message: str, x: Optional[float] = None):
        super().__init__(message)
        self.x = x


@dataclass
class WitnessReport:
    g: SampledFunction
    epsilon: float
    a: float
    b: float
    partition: List[float]
    cells: List[dict]
    contact_sets: List[List[int]]
    kappa: object
    gamma: float
    normalization: float
    case: str
    brackets: List[dict]
    achieved_norm: float
    achieved_pairing: float
    checks: dict
    g2: Optional[SampledFunction] = None
    eta: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self, include_values: bool = False) -> dict:
        out = {
            "epsilon": self.epsilon,
            "eta": self.eta,
            "a": self.a,
            "b": self.b,
            "gamma": self.gamma,
            "kappa": self.kappa,
            "normalization": self.normalization,
            "case": self.case,
            "partition": [float(c) for c in self.partition],
            "cells": self.cells,
            "contact_sets": self.contact_sets,
            "brackets": self.brackets,
            "achieved_norm": self.achieved_norm,
            "achieved_pairing": self.achieved_pairing,
            "checks": self.checks,
        }
        out.update(self.extra)
        if include_values:
            out["g"] = self.g.values.tolist()
            if self.g2 is not None:
                out["g2"] = self.g2.values.tolist()
        return out


def _normalise(f: SampledFunction, wspec):
    d = dual_norm(f, wspec).value
    if not d > 0:
        raise ValueError("f has zero dual norm; nothing to normalise")
    return f * (1.0 / d), d


def h_function(f: SampledFunction, wspec) -> SampledFunction:
    """h = (D_Psi^+ f_hat)^(q/p) for f scaled to dual norm 1."""
    fn, _ = _normalise(f, wspec)
    m = essential_majorant(fn, wspec.psi)
    sig = np.asarray(d_psi_plus(m, fn.x))
    return fn.with_values(sig ** (wspec.q / wspec.p))


class _Setup:
    """Quantities shared by the two witness constructions."""

    def __init__(self, f, wspec, eps):
        if not (0 < eps < 1):
            raise ValueError(f"eps must lie in (0, 1), got {eps}")
        self.wspec = wspec
        self.eps = eps
        self.p, self.q = wspec.p, wspec.q
        self.fn, self.factor = _normalise(f, wspec)
        psi = wspec.psi
        x = self.fn.x
        self.x = x
        self.m = essential_majorant(self.fn, psi)
        self.absf = np.abs(self.fn.values)
        self.fhat = np.asarray(majorant_eval(self.m, x))
        self.sig = np.asarray(d_psi_plus(self.m, x))
        self.h = self.sig ** (self.q / self.p)
        self.u = np.asarray(psi(x))
        self.mid = (x[:-1] + x[1:]) / 2
        self.u_mid = np.asarray(psi(self.mid))
        self._choose_cuts()

    def _choose_cuts(self):
        q, p, eps = self.q, self.p, self.eps
        psi = self.wspec.psi
        x, sig, u = self.x, self.sig, self.u
        dens = sig[:-1] ** q
        cells = dens * (u[:-1] - u[1:])
        # the majorant's first segment covers (x_N, l)
        tail = float(self.sig[-1] ** q * u[-1])
        half = eps ** p / 2
        # dual mass right of x_j and left of x_j
        T = np.concatenate([np.cumsum(cells[::-1])[::-1], [0.0]]) + tail
        H = np.concatenate([[0.0], np.cumsum(cells)])
        if T[-1] > half:
            raise RefinementError("dual mass beyond the grid is too large; increase x_max",
                                  float(x[-1]))
        # b in (x_jb, x_jb+1] with mass right of b equal to half
        jb = int(np.flatnonzero(T <= half)[0]) - 1
        if jb < 0:
            raise RefinementError("no admissible cut b; decrease x_min", float(x[0]))
        ub = u[jb + 1] + (half - T[jb + 1]) / dens[jb]
        b = float(psi.inverse(ub)) if ub > 0 else float(x[jb + 1])
        b = self._inside(b, jb)
        # a in [x_ja, x_ja+1) with mass left of a equal to half
        ja = int(np.flatnonzero(H <= half)[-1])
        ja = min(ja, jb)
        if dens[ja] > 0:
            a = float(psi.inverse(u[ja] - (half - H[ja]) / dens[ja]))
        else:
            a = float(x[ja + 1])
        a = self._inside(a, ja)
        if ja >= jb:
            raise RefinementError("cuts a and b fall in one grid cell; refine the grid",
                                  float(x[ja]))
        self.ja, self.jb = ja, jb
        self._a, self._b = a, b
        self.head_mass = float(H[ja] + dens[ja] * (u[ja] - psi(a)))
        self.tail_mass = float(T[jb + 1] + dens[jb] * (psi(b) - u[jb + 1]))
        self.hb = float(self.h[jb])
        self.tol = eps / (4 * self.hb) if self.hb > 0 else math.inf
        self.contact = self.fhat <= self.absf + self.tol
        self.b_moved = False

    def _inside(self, c, j):
        """Keep a cut strictly inside the open cell (x_j, x_{j+1})."""
        lo, hi = self.x[j], self.x[j + 1]
        pad = 1e-9 * (hi - lo)
        return float(min(max(c, lo + pad), hi - pad))

    def move_a_to_contact(self, pair: bool):
        """Shift a left until the first point after it is a contact point."""
        if self.h[self.ja] == 0:
            return
        for c in range(self.ja + 1, 0, -1):
            if self.contact[c] and (not pair or (c + 1 <= self.jb and self.contact[c + 1])):
                if c != self.ja + 1:
                    self.ja = c - 1
                    self._a = float(self.mid[self.ja])
                return
        raise RefinementError("no contact point at or before a; refine the grid",
                              float(self._a))

    def expose_first_jump(self):
        """Move a one cell left when a large jump sits on the first point after a.

        The bracket of that jump can then borrow the contact point before it.
        """
        i0 = self.ja + 1
        thr = self.eps / (4 * float(self.wspec.psi(self.a)) ** (1 / self.p))
        if self.ja < 1 or self.h[i0] - self.h[i0 - 1] < thr:
            return
        if self.contact[i0 + 1] and i0 + 1 <= self.jb:
            return
        if self.contact[i0 - 1]:
            self.ja -= 1
            self._a = float(self.mid[self.ja])

    @property
    def a(self):
        return self._a

    @property
    def b(self):
        return self._b


def _build_cells(s: _Setup, pair: bool):
    """Group grid indices in (a, b) into cells.

    A cell whose h-increment exceeds the threshold is a bracket.  Without
    ``pair`` every large jump is a one-point bracket.  With ``pair`` each
    cell carrying mass needs two contact points, so cells are grown until
    they have them; a cell left short at the end is merged into its
    predecessor.
    """
    p, eps = s.p, s.eps
    i0, i1 = s.ja + 1, s.jb
    h, fhat, contact = s.h, s.fhat, s.contact
    gamma = float(s.wspec.psi(s.a)) ** (1 / p)
    thr = eps / (4 * gamma)
    large = np.zeros(h.size, dtype=bool)
    large[1:] = np.diff(h) >= thr
    ha = float(h[s.ja])

    def rise(first, last):
        return h[last] - h[first - 1]

    def needs_more(idx):
        mass = rise(idx[0], idx[-1]) + (ha if idx[0] == i0 else 0.0)
        return mass > 0 and int(contact[idx].sum()) < 2

    groups: List[List[int]] = []

    def borrow(cur):
        """Move the last point of the previous group to the front of ``cur``."""
        if not groups:
            return False
        prev = groups[-1]
        cand = prev[-1]
        if not contact[cand] or fhat[cand] - fhat[cur[-1]] > s.tol:
            return False
        rest = prev[:-1]
        if rest and needs_more(rest):
            return False
        cur.insert(0, cand)
        if rest:
            groups[-1] = rest
        else:
            groups.pop()
        return True

    def merge(cur):
        """Append ``cur`` to the previous group when the f_hat drop allows."""
        if groups and fhat[groups[-1][0]] - fhat[cur[-1]] <= s.tol:
            groups[-1] = groups[-1] + cur
            return True
        return False

    def short(cur):
        return RefinementError(f"cell starting at x={s.x[cur[0]]:.6g} has fewer than two "
                               "contact points; refine grid near x", float(s.x[cur[0]]))

    cur: List[int] = []
    for k in range(i0, i1 + 1):
        if not cur:
            cur = [k]
        elif pair and needs_more(cur):
            if not contact[k] and borrow(cur) and not needs_more(cur):
                groups.append(cur)
                cur = [k]
            elif fhat[cur[0]] - fhat[k] <= s.tol:
                cur.append(k)
            elif borrow(cur) and not needs_more(cur):
                groups.append(cur)
                cur = [k]
            elif merge(cur):
                cur = [k]
            else:
                raise short(cur)
        elif (not large[k] and rise(cur[0], k) <= thr and fhat[cur[0]] - fhat[k] <= s.tol):
            cur.append(k)
        else:
            groups.append(cur)
            cur = [k]
        if not pair and large[k]:
            if len(cur) > 1:
                cur.pop()
                groups.append(cur)
            groups.append([k])
            cur = []
    if cur:
        if pair and needs_more(cur):
            while needs_more(cur):
                if not borrow(cur):
                    if merge(cur):
                        break
                    if not groups:
                        raise short(cur)
                    # drop the short tail cell: b moves left past it
                    s.jb = cur[0] - 1
                    s._b = float(s.mid[s.jb])
                    s.b_moved = True
                    break
            else:
                groups.append(cur)
        else:
            groups.append(cur)

    cells = []
    for idx in groups:
        kind = "bracket" if rise(idx[0], idx[-1]) > thr or (not pair and len(idx) == 1
                                                            and large[idx[0]]) else "cell"
        cell = {"kind": kind, "idx": idx}
        if kind == "bracket":
            jumps = h[idx] - h[np.array(idx) - 1]
            cell["at"] = int(idx[int(np.argmax(jumps))])
        cells.append(cell)
    n_large = sum(c["kind"] == "bracket" for c in cells)
    return cells, gamma, thr, n_large


def _shrink_bracket(s: _Setup, cell, n_large, left, right):
    """Cut points around a bracket obeying the Psi-mass and f_hat-drop bounds.

    The cuts start at ``left`` and ``right`` and move geometrically toward
    the bracketed grid points.
    """
    p = s.p
    lo_i, hi_i = cell["idx"][0], cell["idx"][-1]
    jump = float(s.h[hi_i] - s.h[lo_i - 1])
    bound = s.eps ** p / (2 ** p * n_large * jump ** p)
    psi = s.wspec.psi
    x = s.x
    xl, xr = x[lo_i], x[hi_i]
    dl, dr = xl - left, right - xr
    core_mass = float(s.u[lo_i] - s.u[hi_i])
    core_drop = float(s.fhat[lo_i] - s.fhat[hi_i])
    if core_mass > bound or core_drop > s.tol:
        raise RefinementError(
            f"bracket at x={xl:.6g} too wide (Psi-mass {core_mass:.3g} > {bound:.3g} or "
            f"f_hat drop {core_drop:.3g} > {s.tol:.3g}); refine grid near x", float(xl))
    r = 1.0
    for _ in range(MAX_SHRINK):
        lo, hi = xl - dl * r, xr + dr * r
        mass = float(psi(lo) - psi(hi))
        drop = float(majorant_eval(s.m, lo) - majorant_eval(s.m, hi))
        if mass <= bound and drop <= s.tol:
            return {"y": float(x[cell["at"]]), "lo": float(lo), "hi": float(hi),
                    "jump": jump, "psi_mass": mass, "bound": float(bound), "fhat_drop": drop}
        r /= 2
    raise RefinementError(f"bracket at x={xl:.6g} did not shrink; refine grid near x", float(xl))


def _layout(s: _Setup, cells, n_large):
    """Attach cut points to cells, inserting empty gap cells beside brackets."""
    x = s.x
    bounds = [s.a] + [float((x[c["idx"][-1]] + x[c["idx"][-1] + 1]) / 2) for c in cells[:-1]]
    bounds.append(s.b)
    brackets = []
    out = []
    for n, c in enumerate(cells):
        left, right = bounds[n], bounds[n + 1]
        if c["kind"] == "bracket":
            br = _shrink_bracket(s, c, n_large, left, right)
            c["lo"], c["hi"] = br["lo"], br["hi"]
            brackets.append(br)
        else:
            c["lo"], c["hi"] = left, right
        if c["lo"] > left:
            out.append({"kind": "gap", "idx": [], "lo": left, "hi": c["lo"]})
        out.append(c)
        if c["hi"] < right:
            out.append({"kind": "gap", "idx": [], "lo": c["hi"], "hi": right})
    return out, brackets


def _sign(values):
    return np.where(values < 0, -1.0, 1.0)


def _construct(f, wspec, eps, pair):
    s = _Setup(f, wspec, eps)
    s.move_a_to_contact(pair)
    if pair:
        s.expose_first_jump()
    cells, gamma, thr, n_large = _build_cells(s, pair)
    cells, brackets = _layout(s, cells, n_large)
    W = s.fn.grid.widths
    h = s.h
    n_sets = 2 if pair else 1
    gs = [np.zeros(h.size) for _ in range(n_sets)]
    contact_sets = []
    ha = float(h[s.ja])
    kappas = [0.0] * n_sets
    first = True
    for c in cells:
        if c["kind"] == "gap":
            c["rise"] = 0.0
            contact_sets.append([])
            continue
        idx = np.array(c["idx"])
        rise = float(h[idx[-1]] - h[idx[0] - 1])
        c["rise"] = rise
        A = idx[s.contact[idx]]
        contact_sets.append(A.tolist())
        parts = [A[0::2], A[1::2]] if pair else [A]
        for j, part in enumerate(parts):
            mass = rise + (ha if first else 0.0)
            if mass <= 0:
                continue
            meas = W[part].sum() if part.size else 0.0
            if meas <= 0:
                raise RefinementError(
                    f"cell starting at x={s.x[idx[0]]:.6g} lacks contact points; "
                    "refine grid near x", float(s.x[idx[0]]))
            gs[j][part] += rise / meas
            if first and ha > 0:
                kappas[j] = ha / meas
                gs[j][part] += kappas[j]
        first = False
    case = "a0nz" if ha > 0 else "a0z"
    sign = _sign(s.fn.values)
    gfun = [s.fn.with_values(g * sign) for g in gs]
    for c in cells:
        c["idx"] = [int(i) for i in c["idx"]]
    partition = [s.a] + [c["hi"] for c in cells]
    return s, gfun, cells, contact_sets, brackets, kappas, gamma, thr, n_large, case, partition


def _cell_dump(cells):
    return [{"kind": c["kind"], "lo": c["lo"], "hi": c["hi"], "rise": c["rise"],
             "n_points": len(c["idx"])} for c in cells]


def near_optimizer(f: SampledFunction, wspec, eps: float) -> WitnessReport:
    """Near-norming g for f with ||g|| <= 1 + eps.

    Raises
    ------
    ValueError
        For eps outside (0, 1) or f with zero dual norm.
    RefinementError
        When the grid cannot resolve the construction.
    """
    s, (g,), cells, contact_sets, brackets, kappas, gamma, thr, n_large, case, partition = \
        _construct(f, wspec, eps, pair=False)
    norm = cesaro_norm(g, wspec).value
    pr = pairing(s.fn, g)
    ratio = pr / norm if norm > 0 else 0.0
    checks = {
        "norm_bound": {"value": norm, "bound": 1 + eps, "ok": bool(norm <= 1 + eps)},
        "pairing_bound": {"value": pr / (1 + eps), "bound": 1 - 3 * eps,
                          "ok": bool(pr / (1 + eps) >= 1 - 3 * eps)},
        "duality_gap": {"value": 1 - ratio, "bound": 3 * eps, "ok": bool(1 - ratio <= 3 * eps)},
    }
    return WitnessReport(
        g=g, epsilon=eps, a=s.a, b=s.b, partition=partition, cells=_cell_dump(cells),
        contact_sets=contact_sets, kappa=kappas[0], gamma=gamma,
        normalization=s.factor, case=case, brackets=brackets,
        achieved_norm=norm, achieved_pairing=pr, checks=checks,
        extra={"h_threshold": thr, "contact_tolerance": s.tol, "large_jumps": n_large,
               "head_mass": s.head_mass, "tail_mass": s.tail_mass,
               "pairing_unnormalized": pr * s.factor})


def slice_witnesses(f: SampledFunction, wspec, eps: float, eta: float) -> WitnessReport:
    """Two witnesses with disjoint supports, both in the slice of f.

    Needs 0 < eps < eta / 10.
    """
    if not (0 < eps < eta / 10):
        raise ValueError(f"need 0 < eps < eta/10, got eps={eps}, eta={eta}")
    if not (0 < eta < 1):
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    s, (g1, g2), cells, contact_sets, brackets, kappas, gamma, thr, n_large, case, partition = \
        _construct(f, wspec, eps, pair=True)
    n1, n2 = cesaro_norm(g1, wspec).value, cesaro_norm(g2, wspec).value
    p1, p2 = pairing(s.fn, g1), pairing(s.fn, g2)
    diam = cesaro_norm(g1 - g2, wspec).value / (1 + eps)
    overlap = int(np.count_nonzero((g1.values != 0) & (g2.values != 0)))
    checks = {
        "norm_bound_1": {"value": n1, "bound": 1 + eps, "ok": bool(n1 <= 1 + eps)},
        "norm_bound_2": {"value": n2, "bound": 1 + eps, "ok": bool(n2 <= 1 + eps)},
        "slice_1": {"value": p1 / (1 + eps), "bound": 1 - eta, "ok": bool(p1 / (1 + eps) > 1 - eta)},
        "slice_2": {"value": p2 / (1 + eps), "bound": 1 - eta, "ok": bool(p2 / (1 + eps) > 1 - eta)},
        "diameter": {"value": diam, "bound": 2 - 6 * eps, "ok": bool(diam >= 2 - 6 * eps)},
        "disjoint": {"value": overlap, "bound": 0, "ok": overlap == 0},
    }
    splits = []
    for A in contact_sets:
        splits.append({"B": A[0::2], "C": A[1::2]})
    return WitnessReport(
        g=g1, g2=g2, epsilon=eps, eta=eta, a=s.a, b=s.b, partition=partition,
        cells=_cell_dump(cells), contact_sets=contact_sets, kappa=list(kappas), gamma=gamma,
        normalization=s.factor, case=case, brackets=brackets,
        achieved_norm=max(n1, n2), achieved_pairing=min(p1, p2), checks=checks,
        extra={"diameter_bound": diam, "norms": [n1, n2], "pairings": [p1, p2],
               "splits": splits, "h_threshold": thr, "contact_tolerance": s.tol,
               "large_jumps": n_large, "b_moved": s.b_moved})


def escape_point(wspec, n: int) -> float:
    """a_n with int_{a_n}^l w^p = n^(-p)."""
    return float(wspec.psi.inverse(float(n) ** (-wspec.p)))


def l1_escape_sequence(wspec, n: int, grid: Optional[Grid] = None, n_points: int = 20001):
    """Unit-ball functions of Cesaro norm <= 1 with L1 norm n.

    For finite l, g_n = n / m(E) on the grid points E strictly inside
    (a_n, a_{n+1}); for l = inf, g_n is the indicator of (a_n, a_n + n).

    Returns
    -------
    g : SampledFunction
    report : dict
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    l = wspec.l
    an = escape_point(wspec, n)
    finite = math.isfinite(l)
    hi = escape_point(wspec, n + 1) if finite else an + n
    if grid is None:
        x_max = hi + (l - hi) / 2 if finite else hi + n
        grid = make_grid(l, n_points, "uniform", x_min=an / 2, x_max=x_max)
    x = grid.points
    inside = (x > an) & (x < hi)
    if x[0] >= an or x[-1] <= hi or not inside.any():
        raise ValueError(f"grid [{x[0]:.6g}, {x[-1]:.6g}] cannot resolve ({an:.6g}, {hi:.6g}); "
                         f"need x_min < {an:.6g} and x_max > {hi:.6g} with points inside")
    if finite:
        vals = np.where(inside, n / grid.set_measure(inside), 0.0)
    else:
        vals = inside.astype(float)
    g = SampledFunction(grid, vals)
    l1 = float(np.dot(grid.widths, np.abs(vals)))
    norm = cesaro_norm(g, wspec).value
    report = {"n": n, "a_n": an, "a_next": hi, "cesaro_norm": norm, "l1_norm": l1,
              "support_points": int(inside.sum())}
    return g, report
