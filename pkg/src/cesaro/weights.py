"""Weights w on (0, l), the exponent p and the transform Psi(x) = int_x^l w^p.

Two kinds of weight are supported:

* ``power``: w(x) = x**s, handled in closed form;
* ``tabulated``: positive samples of w.  Between samples w**p is linear,
  so Psi is exact for that model.  Below the first sample w follows a
  declared power law (the *head model*); above the last sample w is held
  constant up to a finite l, and dropped for l = inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .grid import parse_endpoint


class WeightError(ValueError):
    """The weight does not satisfy the conditions needed for Psi."""


@dataclass(frozen=True, eq=False)
class WeightSpec:
    """A weight and the exponent p of the Cesaro space.

    Parameters
    ----------
    kind : {"power", "tabulated"}
    p : float
        Exponent, strictly greater than 1.
    l : float
        Right endpoint (``math.inf`` allowed).
    s : float
        Power exponent, for ``kind="power"``.
    table_x, table_w : array_like
        Samples of w, for ``kind="tabulated"``.
    head_exponent : float, optional
        Declared behaviour w(x) ~ x**head_exponent below the first sample.
    """

    kind: str
    p: float
    l: float = 1.0
    s: float = -1.0
    table_x: Optional[np.ndarray] = None
    table_w: Optional[np.ndarray] = None
    head_exponent: Optional[float] = None
    _psi: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        p = float(self.p)
        if not math.isfinite(p) or p <= 1:
            raise ValueError(f"p must satisfy 1 < p < inf, got {p}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "l", parse_endpoint(self.l))
        if self.kind == "power":
            if not math.isfinite(float(self.s)):
                raise ValueError("power exponent s must be finite")
            object.__setattr__(self, "s", float(self.s))
        elif self.kind == "tabulated":
            if self.table_x is None or self.table_w is None:
                raise ValueError("tabulated weight needs table_x and table_w")
            tx = np.array(self.table_x, dtype=float)
            tw = np.array(self.table_w, dtype=float)
            if tx.shape != tw.shape or tx.ndim != 1 or tx.size < 2:
                raise ValueError("table_x and table_w must be 1-D of equal length >= 2")
            if np.any(np.diff(tx) <= 0) or tx[0] <= 0 or tx[-1] >= self.l:
                raise ValueError("table abscissas must increase strictly inside (0, l)")
            tx.setflags(write=False)
            tw.setflags(write=False)
            object.__setattr__(self, "table_x", tx)
            object.__setattr__(self, "table_w", tw)
        else:
            raise ValueError(f"unknown weight kind {self.kind!r}")

    @classmethod
    def power(cls, s: float, p: float, l=1.0) -> "WeightSpec":
        return cls(kind="power", p=p, l=l, s=s)

    @classmethod
    def tabulated(cls, x, w, p: float, l=1.0, head_exponent=None) -> "WeightSpec":
        return cls(kind="tabulated", p=p, l=l, table_x=x, table_w=w,
                   head_exponent=head_exponent)

    @property
    def q(self) -> float:
        """Conjugate exponent p / (p - 1)."""
        return self.p / (self.p - 1)

    @property
    def psi(self) -> "PsiTransform":
        """The Psi-transform; raises :class:`WeightError` for invalid weights."""
        if self._psi is None:
            diag = validate_weight(self)
            if not diag.ok:
                raise WeightError(f"weight fails conditions: {diag.failures()}")
            object.__setattr__(self, "_psi", PsiTransform(self))
        return self._psi

    def w(self, x):
        """Evaluate the weight."""
        if self.kind == "power":
            return np.asarray(x, dtype=float) ** self.s
        return self.psi.w(x)

    def describe(self) -> dict:
        l = "inf" if math.isinf(self.l) else self.l
        if self.kind == "power":
            return {"kind": "power", "s": self.s, "p": self.p, "l": l}
        return {"kind": "table", "p": self.p, "l": l,
                "head_exponent": self.head_exponent, "samples": int(self.table_x.size)}


@dataclass
class WeightDiagnosis:
    """Per-condition status: "pass", "fail" or "assumed" with a detail string."""

    conditions: dict

    @property
    def ok(self) -> bool:
        return all(c["status"] != "fail" for c in self.conditions.values())

    def failures(self):
        return {k: c["detail"] for k, c in self.conditions.items() if c["status"] == "fail"}

    def to_dict(self):
        return {"ok": self.ok, "conditions": self.conditions}


def validate_weight(wspec: WeightSpec) -> WeightDiagnosis:
    """Check w > 0 (i), finite tail integrals (ii) and divergence at 0 (iii)."""
    p, l = wspec.p, wspec.l
    cond = {}
    if wspec.kind == "power":
        sp = wspec.s * p
        cond["i"] = {"status": "pass", "detail": "x**s > 0 on (0, l)"}
        if math.isinf(l) and sp >= -1:
            cond["ii"] = {"status": "fail",
                          "detail": f"s*p = {sp:g} >= -1: int_x^inf t^(s p) dt diverges"}
        else:
            cond["ii"] = {"status": "pass", "detail": f"s*p = {sp:g}"}
        if sp <= -1 or math.isinf(l):
            cond["iii"] = {"status": "pass", "detail": f"s*p = {sp:g}: int_0^l w^p = inf"}
        else:
            cond["iii"] = {"status": "fail",
                           "detail": f"s*p = {sp:g} > -1: int_0^l w^p is finite"}
        return WeightDiagnosis(cond)

    tw = wspec.table_w
    bad = np.flatnonzero(~(tw > 0) | ~np.isfinite(tw))
    if bad.size:
        i = int(bad[0])
        cond["i"] = {"status": "fail", "detail": f"sample {i} at x={wspec.table_x[i]:g} is {tw[i]:g}"}
    else:
        cond["i"] = {"status": "pass", "detail": "all samples positive"}
    if math.isinf(l):
        cond["ii"] = {"status": "assumed",
                      "detail": "tail beyond the last sample taken as 0 (truncation)"}
    else:
        cond["ii"] = {"status": "pass", "detail": "finite table, constant extension to l"}
    h = wspec.head_exponent
    if h is None:
        cond["iii"] = {"status": "fail", "detail": "no head model declared"}
    elif h * p <= -1:
        cond["iii"] = {"status": "assumed", "detail": f"head exponent*p = {h * p:g} <= -1"}
    else:
        cond["iii"] = {"status": "fail", "detail": f"head exponent*p = {h * p:g} > -1"}
    return WeightDiagnosis(cond)


def _check_domain(x, l):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)) or np.any(~(x < l)):
        raise ValueError(f"x must lie in (0, {l})")
    return x


class PsiTransform:
    """Psi(x) = int_x^l w(t)^p dt with its inverse.

    Instances are callable; arrays are evaluated elementwise.
    """

    def __init__(self, wspec: WeightSpec):
        self.wspec = wspec
        self.p = wspec.p
        self.l = wspec.l
        if wspec.kind == "power":
            self._e = wspec.s * wspec.p + 1.0
        else:
            self._build_table()

    # tabulated kind: w^p linear between samples
    def _build_table(self):
        ws = self.wspec
        tx = ws.table_x
        wp = ws.table_w ** self.p
        self._tx, self._wp = tx, wp
        seg = (wp[1:] + wp[:-1]) * np.diff(tx) / 2
        if math.isinf(self.l):
            tail = 0.0
        else:
            tail = wp[-1] * (self.l - tx[-1])
        self._tail = tail
        psi_t = np.empty_like(tx)
        psi_t[-1] = tail
        psi_t[:-1] = tail + np.cumsum(seg[::-1])[::-1]
        self._psi_t = psi_t

    @property
    def kind(self):
        return self.wspec.kind

    @property
    def has_head_model(self) -> bool:
        return self.kind == "power" or self.wspec.head_exponent is not None

    def w(self, x):
        x = _check_domain(x, self.l)
        if self.kind == "power":
            return x ** self.wspec.s
        return self.wp(x) ** (1 / self.p)

    def wp(self, x):
        """w(x)**p."""
        x = _check_domain(x, self.l)
        if self.kind == "power":
            return x ** (self.wspec.s * self.p)
        tx, wp = self._tx, self._wp
        out = np.interp(x, tx, wp)
        lo = x < tx[0]
        if np.any(lo):
            h = self._need_head()
            out = np.where(lo, wp[0] * (np.where(lo, x, tx[0]) / tx[0]) ** (h * self.p), out)
        return out

    def _need_head(self) -> float:
        h = self.wspec.head_exponent
        if h is None:
            raise ValueError("x below the table head needs a declared head_exponent")
        return h

    def __call__(self, x):
        scalar = np.ndim(x) == 0
        x = _check_domain(x, self.l)
        out = self._power(x) if self.kind == "power" else self._table(x)
        return float(np.reshape(out, -1)[0]) if scalar else out

    def _power(self, x):
        e, l = self._e, self.l
        if e == 0.0:
            return np.log(l / x)
        if math.isinf(l):
            return x ** e / (-e)
        # x^e - l^e, written to keep accuracy as x -> l
        return l ** e * np.expm1(e * np.log(x / l)) / (-e)

    def _table(self, x):
        tx, wp, pt = self._tx, self._wp, self._psi_t
        x = np.atleast_1d(x)
        out = np.empty_like(x)
        k = np.clip(np.searchsorted(tx, x, side="right") - 1, 0, tx.size - 2)
        inside = (x >= tx[0]) & (x <= tx[-1])
        if np.any(inside):
            xi, ki = x[inside], k[inside]
            x0, x1 = tx[ki], tx[ki + 1]
            y0, y1 = wp[ki], wp[ki + 1]
            wx = y0 + (y1 - y0) * (xi - x0) / (x1 - x0)
            out[inside] = pt[ki + 1] + (wx + y1) * (x1 - xi) / 2
        hi = x > tx[-1]
        if np.any(hi):
            out[hi] = wp[-1] * (self.l - x[hi]) if math.isfinite(self.l) else 0.0
        lo = x < tx[0]
        if np.any(lo):
            h = self._need_head() * self.p
            r = x[lo] / tx[0]
            if h == -1.0:
                head = -np.log(r)
            else:
                head = (1 - r ** (h + 1)) / (h + 1)
            out[lo] = pt[0] + wp[0] * tx[0] * head
        return out

    @property
    def head_value(self) -> float:
        """Psi at the first table sample (tabulated kind), inf for power."""
        return math.inf if self.kind == "power" else float(self._psi_t[0])

    def inverse(self, u):
        """x with Psi(x) = u, for u > 0."""
        scalar = np.ndim(u) == 0
        u = np.asarray(u, dtype=float)
        if np.any(~(u > 0)) or np.any(~np.isfinite(u)):
            raise ValueError("psi_inverse needs finite u > 0")
        if self.kind == "power":
            out = self._power_inverse(u)
        else:
            out = self._bisect(np.atleast_1d(u))
            if scalar:
                out = out[0]
        return float(out) if scalar else out

    def _power_inverse(self, u):
        e, l = self._e, self.l
        if e == 0.0:
            return l * np.exp(-u)
        if math.isinf(l):
            return (u * (-e)) ** (1 / e)
        return l * np.exp(np.log1p(u * (-e) / l ** e) / e)

    def _bisect(self, u):
        if not self.has_head_model and np.any(u > self.head_value):
            raise ValueError("u above the table head needs a declared head_exponent")
        if math.isinf(self.l) and np.any(u <= 0):
            raise ValueError("u must be positive")
        # bracket in log x; Psi is strictly decreasing
        lo = np.full_like(u, math.log(self._tx[0]))
        while np.any(self(np.exp(lo)) < u):
            lo = np.where(self(np.exp(lo)) < u, lo - 5.0, lo)
        top = self.l if math.isfinite(self.l) else self._tx[-1]
        hi = np.full_like(u, math.log(top))
        for _ in range(200):
            mid = (lo + hi) / 2
            big = self(np.exp(mid)) > u
            lo = np.where(big, mid, lo)
            hi = np.where(big, hi, mid)
            if np.all(hi - lo < 1e-15):
                break
        return np.exp((lo + hi) / 2)


def psi_eval(psi: PsiTransform, x):
    return psi(x)


def psi_inverse(psi: PsiTransform, u):
    return psi.inverse(u)
