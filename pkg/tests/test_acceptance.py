"""Acceptance suite: one test per criterion, each logging a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in
the "acceptance criteria" section of the terminal summary.
"""

import math
import time

import numpy as np
import pytest
from scipy import integrate

from cesaro import (Grid, SampledFunction, WeightSpec, cesaro_norm, dual_norm,
                    dual_norm_quadrature, essential_majorant, indicator, is_psi_concave,
                    l1_escape_sequence, make_grid, majorant_eval, near_optimizer, pairing,
                    sample, sample_majorant, slice_witnesses)
from cesaro.oracle import brute_majorant
from cesaro.witness import RefinementError

from helpers import composite_grid, random_pl, random_small_grid, random_values

P_CHOICES = (1.5, 2.0, 3.0)
S_CHOICES = (-1.0, -2.0)


def _random_weight(rng):
    return WeightSpec.power(float(rng.choice(S_CHOICES)), float(rng.choice(P_CHOICES)), 1.0)


def _witness_functions(seed=2024):
    """chi_(0,1/2), 1 - x and three random piecewise-linear functions, with their kinks."""
    rng = np.random.default_rng(seed)
    fs = [("chi(0,1/2)", indicator(0.0, 0.5), [0.5]), ("1-x", lambda x: 1 - x, [])]
    for k in range(3):
        knots = np.sort(rng.uniform(0.02, 0.98, 6))
        xs = np.concatenate([[0.0], knots, [1.0]])
        ys = np.append(rng.uniform(-1.0, 2.0, 7), 0.0)
        fs.append((f"pl{k}", lambda x, xs=xs, ys=ys: np.interp(x, xs, ys), list(knots)))
    return fs


def test_criterion_01_dual_closed_forms(ces2, record):
    g = make_grid(1.0, 10_000, "geometric-near-zero", x_min=1e-6, knots=[0.5])
    cases = [("1-x", sample(lambda x: 1 - x, g), 1 / math.sqrt(3)),
             ("chi(0,1/2)", sample(indicator(0.0, 0.5), g), 1.0)]
    ok, parts = True, []
    for name, f, exact in cases:
        seg = dual_norm(f, ces2).value
        quad = dual_norm_quadrature(f, ces2).value
        rel = abs(seg - quad) / seg
        ok &= abs(seg - exact) <= 1e-3 and rel <= 1e-4
        parts.append(f"{name}: {seg:.6f} vs {exact:.6f}, routes rel {rel:.1e}")
    assert record(1, ok, "; ".join(parts))


def test_criterion_02_cesaro_closed_forms(ces2, record):
    g = make_grid(1.0, 10_000, "geometric-near-zero", x_min=1e-6)
    one = cesaro_norm(sample(lambda x: np.ones_like(x), g), ces2).value
    u = make_grid(1.0, 20_000, "uniform", x_min=1e-4, x_max=1 - 1e-6, knots=[0.5])
    chi = cesaro_norm(sample(indicator(0.5, 1.0), u), ces2).value
    exact = math.sqrt(0.75 - math.log(2))
    # the closed form against adaptive quadrature of the continuous integrand
    quad = math.sqrt(integrate.quad(lambda x: (max(x - 0.5, 0.0) / x) ** 2, 0.5, 1.0)[0])
    ok = abs(one - 1) <= 1e-6 and abs(chi - exact) <= 1e-4 and abs(quad - exact) < 1e-12
    assert record(2, ok, f"||1|| = {one:.9f}; ||chi(1/2,1)|| = {chi:.7f} vs {exact:.7f}")


def test_criterion_03_majorant_oracle(record):
    rng = np.random.default_rng(303)
    worst, elapsed = 0.0, 0.0
    for _ in range(200):
        ws = _random_weight(rng)
        g = random_small_grid(rng, int(rng.integers(3, 51)))
        f = SampledFunction(g, random_values(rng, len(g)))
        t0 = time.perf_counter()
        fast = majorant_eval(essential_majorant(f, ws.psi), g.points)
        ref = brute_majorant(f, ws.psi).value
        elapsed += time.perf_counter() - t0
        worst = max(worst, float(np.max(np.abs(fast - ref))))
    ok = worst <= 1e-9 and elapsed < 10.0
    assert record(3, ok, f"200 instances, max |diff| = {worst:.1e}, {elapsed:.2f} s")


def test_criterion_04_majorant_properties(record):
    rng = np.random.default_rng(404)
    failures = {k: 0 for k in ("domination", "concavity", "decreasing", "idempotence",
                               "monotone", "homogeneity")}
    for _ in range(500):
        ws = _random_weight(rng)
        psi = ws.psi
        g = random_small_grid(rng, int(rng.integers(3, 51)))
        f = SampledFunction(g, random_values(rng, len(g)))
        a = np.abs(f.values)
        fh = sample_majorant(essential_majorant(f, psi), g)
        v = fh.values
        failures["domination"] += not np.all(v >= a - 1e-12)
        failures["concavity"] += not is_psi_concave(fh, psi, 1e-9)[0]
        failures["decreasing"] += not np.all(v[:-1] >= v[1:] - 1e-12)
        again = majorant_eval(essential_majorant(fh, psi), g.points)
        failures["idempotence"] += not np.allclose(again, v, rtol=0, atol=1e-12 * max(1, v.max()))
        bigger = SampledFunction(g, a + rng.uniform(0, 1, len(g)) * (rng.random(len(g)) < 0.5))
        vb = majorant_eval(essential_majorant(bigger, psi), g.points)
        failures["monotone"] += not np.all(vb >= v - 1e-12)
        c = float(10 ** rng.uniform(-3, 3))
        vc = majorant_eval(essential_majorant(f * c, psi), g.points)
        failures["homogeneity"] += not np.allclose(vc, c * v, rtol=1e-12, atol=0)
    ok = not any(failures.values())
    detail = ", ".join(f"{k} {500 - n}/500" for k, n in failures.items())
    assert record(4, ok, detail)


def test_criterion_05_holder(record):
    rng = np.random.default_rng(505)
    worst = -np.inf
    for _ in range(500):
        ws = _random_weight(rng)
        g = random_small_grid(rng, int(rng.integers(3, 200)))
        f = SampledFunction(g, random_values(rng, len(g)) + rng.normal(size=len(g)) * rng.random())
        kind = rng.integers(3)
        if kind == 0:
            h = SampledFunction(g, rng.standard_cauchy(len(g)) * (rng.random(len(g)) < 0.7))
        else:
            # sign-aligned with f, which pushes the ratio towards 1
            mag = np.abs(f.values) ** rng.uniform(0, 3) if kind == 1 else rng.random(len(g))
            h = SampledFunction(g, np.sign(f.values) * mag)
        lhs = abs(pairing(f, h))
        rhs = dual_norm(f, ws).value * cesaro_norm(h, ws).value
        if rhs > 0:
            worst = max(worst, lhs / rhs)
        else:
            worst = max(worst, np.inf if lhs > 0 else 0.0)
    ok = worst <= 1 + 1e-8
    assert record(5, ok, f"500 pairs (2/3 sign-aligned), max pairing / (dual * cesaro) = {worst:.10f}")


def test_criterion_06_near_optimizer(ces2, record):
    g = make_grid(1.0, 10_000, "geometric-near-zero", x_min=1e-6, knots=[0.5])
    ok, rows, worst_gap = True, [], -np.inf
    for name, fn, _ in _witness_functions():
        f = sample(fn, g)
        for eps in (0.2, 0.1, 0.05):
            try:
                rep = near_optimizer(f, ces2, eps)
            except RefinementError as exc:
                ok = False
                rows.append(f"{name} eps={eps}: refinement failure: {exc}")
                continue
            norm, pr = rep.achieved_norm, rep.achieved_pairing
            gap = 1 - pr / norm
            good = (norm <= 1 + eps + 1e-6 and pr / (1 + eps) >= 1 - 3 * eps - 1e-6
                    and gap <= 3 * eps + 1e-3)
            ok &= good
            worst_gap = max(worst_gap, gap / eps)
            rows.append(f"{name:10s} eps={eps:<5} norm={norm:.5f} pairing/(1+eps)={pr / (1 + eps):.5f}"
                        f" gap={gap:.5f} {'ok' if good else 'VIOLATED'}")
    assert record(6, ok, f"5 functions x 3 eps, max gap/eps = {worst_gap:.3f} (bound 3)", rows)


def test_criterion_07_slice_diameter(ces2, record):
    ok, rows = True, ["f           eps    diameter  bound 2-6eps  min slice"]
    for name, fn, knots in _witness_functions():
        f = sample(fn, composite_grid(knots))
        for eps in (0.04, 0.02):
            try:
                rep = slice_witnesses(f, ces2, eps, 0.5)
            except RefinementError as exc:
                ok = False
                rows.append(f"{name} eps={eps}: refinement failure: {exc}")
                continue
            diam = rep.extra["diameter_bound"]
            slice_min = min(rep.extra["pairings"]) / (1 + eps)
            good = (diam >= 2 - 6 * eps - 1e-3 and slice_min > 0.5
                    and rep.checks["disjoint"]["ok"])
            ok &= good
            rows.append(f"{name:10s} {eps:<6} {diam:.5f}   {2 - 6 * eps:.2f}          "
                        f"{slice_min:.4f} {'ok' if good else 'VIOLATED'}")
    assert record(7, ok, "eta = 0.5, both witnesses in the slice, diameter table:", rows)


def test_criterion_08_l1_escape(ces2, record):
    ok, rows = True, []
    for n in (1, 2, 4, 8, 16):
        _, rep = l1_escape_sequence(ces2, n)
        closed = n ** 2 / (n ** 2 + 1)
        good = (abs(rep["a_n"] - closed) <= 4 * np.spacing(closed)
                and rep["cesaro_norm"] <= 1 + 1e-6
                and abs(rep["l1_norm"] - n) <= 1e-13 * n)
        ok &= good
        rows.append(f"n={n:2d} a_n={rep['a_n']:.15f} closed={closed:.15f} "
                    f"cesaro={rep['cesaro_norm']:.8f} l1={rep['l1_norm']:.15g}")
    assert record(8, ok, "a_n = n^2/(n^2+1), cesaro <= 1+1e-6, l1 = n", rows)


def test_criterion_09_psi_identities(record):
    weights = [WeightSpec.power(s, p, 1.0) for s in S_CHOICES for p in P_CHOICES]
    weights.append(WeightSpec.power(-1.0, 2.0, "inf"))
    tx = np.linspace(0.05, 0.95, 31)
    weights.append(WeightSpec.tabulated(tx, tx ** -1.1, 2.0, 1.0, head_exponent=-1.1))
    fd_worst, rt_worst = 0.0, 0.0
    for ws in weights:
        top = 50.0 if math.isinf(ws.l) else ws.l
        g = make_grid(ws.l, 2000, "geometric-near-zero", x_min=1e-4 * top, x_max=top * (1 - 1e-4))
        x = g.points[1:-1]
        h = 1e-6 * x
        fd = (ws.psi(x + h) - ws.psi(x - h)) / (2 * h)
        fd_worst = max(fd_worst, float(np.max(np.abs(fd / -ws.psi.wp(x) - 1))))
        rt = ws.psi.inverse(ws.psi(g.points))
        rt_worst = max(rt_worst, float(np.max(np.abs(rt / g.points - 1))))
    half = WeightSpec.power(-1.0, 2.0, 1.0).psi(0.5)
    ok = fd_worst <= 1e-4 and rt_worst <= 1e-10 and half == 1.0
    assert record(9, ok, f"{len(weights)} weights: FD rel {fd_worst:.1e}, round trip rel "
                         f"{rt_worst:.1e}, Psi(0.5) = {half!r}")


def test_criterion_10_truncation_convergence(ces2, record):
    ms = 2 ** np.arange(2, 13)
    half = np.geomspace(1e-5, 0.5, 10_000)
    pts = np.unique(np.concatenate([half, 1 - half, 1 / ms, 1 - 1 / ms,
                                    np.linspace(0.1, 0.9, 2001)]))
    g = Grid(pts[(pts > 0) & (pts < 1)], l=1.0)
    x = g.points
    mid = (x >= 0.1) & (x <= 0.9)
    psi = ces2.psi
    rng = np.random.default_rng(1010)
    # halving is checked from m = 256 on; the table shows every doubling
    start = int(np.searchsorted(ms, 256))
    ok, rows = True, ["ratios d(2m)/d(m) for m = " + ", ".join(str(m) for m in ms[:-1])]
    for k in range(20):
        if k % 2 == 0:
            f, _ = random_pl(rng, g)
        else:
            # nonzero near x = 1, so the truncated tail carries Psi-mass of order 1/m
            knots = np.sort(rng.uniform(0.02, 0.98, 6))
            f = SampledFunction(g, np.interp(x, np.r_[0.0, knots, 1.0], rng.uniform(-1, 2, 8)))
        ref = majorant_eval(essential_majorant(f, psi), x[mid])
        d = np.array([np.max(np.abs(majorant_eval(essential_majorant(
            f.with_values(f.values * ((x >= 1 / m) & (x <= 1 - 1 / m))), psi), x[mid]) - ref))
            for m in ms])
        halves = d[1:] <= d[:-1] / 2 + 1e-12
        ok &= bool(np.all(halves[start:])) and d[-1] <= d[0]
        ratio = np.where(d[:-1] > 0, d[1:] / np.where(d[:-1] > 0, d[:-1], 1), 0.0)
        rows.append(f"f{k:02d} d(4)={d[0]:.2e} d(4096)={d[-1]:.2e} "
                    + " ".join(f"{r:.3f}" for r in ratio))
    assert record(10, ok, "20 random f (odd rows nonzero at 1), max deviation on [0.1, 0.9] halves per doubling "
                          "for m >= 256", rows)
