"""The Cesaro norm, the operator B_w and the dual norm.

Quadrature model
----------------
A sample f(x_i) carries its whole cell, so the running integral of |f| is
the step function ``S_i = |f_1| x_1 + sum_{k<=i} |f_k| width_k`` on
(x_i, x_{i+1}); f is taken constant on (0, x_1] and zero beyond x_N.
With this model the Cesaro norm is exact:

    ||f||^p = head + sum_i S_i^p (Psi(x_i) - Psi(x_{i+1})) + S_N^p Psi(x_N),

and the pairing ``sum_i width_i f_i g_i`` obeys the Holder inequality
against the segment-sum dual norm without discretisation slack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np
from scipy import integrate

from .grid import SampledFunction, cell_masses, cumulative_abs_integral, _check_same_grid
from .majorant import Majorant, essential_majorant, d_psi_plus, majorant_eval

MEMBERSHIP_ETA = 1e-3


@dataclass
class NormReport:
    value: float
    method: str
    truncation_note: str = ""

    def to_dict(self):
        return asdict(self)


def apply_Aw(f: SampledFunction, wspec) -> SampledFunction:
    """A_w f(x_i) = w(x_i) * int_0^{x_i} |f|."""
    F = cumulative_abs_integral(f)
    return F.with_values(wspec.psi.w(f.x) * F.values)


def _head_integral(a1: float, x1: float, wspec) -> float:
    """int_0^{x_1} (w(x) |f_1| x)^p dx with f constant on (0, x_1]."""
    if a1 == 0.0:
        return 0.0
    p = wspec.p
    psi = wspec.psi
    if wspec.kind == "power":
        E = (wspec.s + 1) * p + 1
        return math.inf if E <= 0 else a1 ** p * x1 ** E / E
    t0 = psi._tx[0]
    if x1 <= t0:
        E = (wspec.head_exponent + 1) * p + 1
        if E <= 0:
            return math.inf
        # w^p(x) = wp_0 (x/t0)^(h p) below the table
        return a1 ** p * psi._wp[0] * t0 ** (-wspec.head_exponent * p) * x1 ** E / E
    val, _ = integrate.quad(lambda t: float(psi.wp(t)) * t ** p, 0.0, x1, limit=200)
    return a1 ** p * val


def cesaro_norm_p(f: SampledFunction, wspec) -> float:
    """p-th power of the Cesaro norm; see the module docstring."""
    p = wspec.p
    psi = wspec.psi
    S = cell_masses(f)
    u = np.asarray(psi(f.x))
    body = np.dot(S[:-1] ** p, u[:-1] - u[1:]) + S[-1] ** p * u[-1]
    return float(_head_integral(abs(f.values[0]), f.x[0], wspec) + body)


def cesaro_norm(f: SampledFunction, wspec) -> NormReport:
    """||f||_{C_{p,w}} = ||A_w f||_p."""
    val = cesaro_norm_p(f, wspec) ** (1 / wspec.p)
    notes = ["|f| constant on (0, x_1], zero beyond x_N"]
    if wspec.kind == "tabulated" and math.isinf(wspec.l):
        notes.append("w^p beyond the table dropped")
    return NormReport(value=float(val), method="quadrature", truncation_note="; ".join(notes))


def majorant_slopes_on_grid(m: Majorant, f: SampledFunction) -> np.ndarray:
    """D_Psi^+ of the majorant at every grid point."""
    return np.asarray(d_psi_plus(m, f.x))


def apply_Bw(f: SampledFunction, wspec, majorant: Majorant = None) -> SampledFunction:
    """B_w f = w^(p-1) D_Psi^+ f_hat, sampled on the grid of f."""
    m = majorant or essential_majorant(f, wspec.psi)
    w = wspec.psi.w(f.x)
    return f.with_values(w ** (wspec.p - 1) * majorant_slopes_on_grid(m, f))


def _segment_masses(m: Majorant, q: float):
    """sigma_k^q (u_{k+1} - u_k) per segment."""
    return m.slopes ** q * np.diff(m.u)


def dual_norm_q(m: Majorant, wspec) -> float:
    return float(_segment_masses(m, wspec.q).sum())


def dual_norm(f: SampledFunction, wspec, majorant: Majorant = None) -> NormReport:
    """||B_w f||_q from the segment sum of the majorant slopes."""
    m = majorant or essential_majorant(f, wspec.psi)
    val = dual_norm_q(m, wspec) ** (1 / wspec.q)
    note = "f taken as 0 beyond x_N; majorant closed at (Psi, f_hat) = (0, 0)"
    return NormReport(value=float(val), method="segment-sum", truncation_note=note)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def dual_norm_quadrature(f: SampledFunction, wspec, majorant: Majorant = None) -> NormReport:
    """||B_w f||_q by Gauss-Legendre quadrature of |B_w f|^q on each grid cell.

    The right tail uses scipy's adaptive quadrature.
    """
    psi = wspec.psi
    q = wspec.q
    m = majorant or essential_majorant(f, psi)
    x = f.x
    lo, hi = x[:-1], x[1:]
    half = (hi - lo) / 2
    t = (lo + hi)[:, None] / 2 + half[:, None] * _GL_NODES[None, :]
    sig = np.asarray(d_psi_plus(m, t.ravel())).reshape(t.shape)
    w = np.asarray(psi.w(t.ravel())).reshape(t.shape)
    body = float(np.sum(half * ((w ** (wspec.p - 1) * sig) ** q @ _GL_WEIGHTS)))

    tail = 0.0
    s0 = m.slopes[0]
    if s0 > 0:
        # integrand is s0^q w^p on (x_N, l)
        val, _ = integrate.quad(lambda z: float(psi.wp(z)), x[-1], psi.l, limit=400)
        tail = s0 ** q * val
    return NormReport(value=(body + tail) ** (1 / q), method="quadrature",
                      truncation_note="Gauss-Legendre per cell, adaptive right tail")


def pairing(f: SampledFunction, g: SampledFunction) -> float:
    """int f g with cell widths as weights."""
    _check_same_grid(f, g)
    return float(np.dot(f.grid.widths, f.values * g.values))


def holder_check(f: SampledFunction, g: SampledFunction, wspec, tol: float = 1e-8) -> dict:
    lhs = abs(pairing(f, g))
    rhs = dual_norm(f, wspec).value * cesaro_norm(g, wspec).value
    slack = rhs - lhs
    return {"lhs": lhs, "rhs": rhs, "slack": slack, "ok": bool(slack >= -tol * max(rhs, 1.0))}


def dual_membership(f: SampledFunction, wspec, eta: float = MEMBERSHIP_ETA) -> dict:
    """Finite-grid proxies for the three membership conditions of the dual space."""
    m = essential_majorant(f, wspec.psi)
    top = float(m.v.max())
    tail = float(majorant_eval(m, f.x[-1]))
    norm = dual_norm(f, wspec, majorant=m).value
    tail_small = tail <= eta * top or top == 0.0
    return {
        "max_fhat": top,
        "fhat_finite": bool(math.isfinite(top)),
        "tail_value": tail,
        "tail_small": bool(tail_small),
        "first_slope": float(m.slopes[-1]),
        "dual_norm": norm,
        "member": bool(math.isfinite(top) and tail_small and math.isfinite(norm)),
    }
