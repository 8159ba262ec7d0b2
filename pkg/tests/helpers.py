import numpy as np

from cesaro import Grid, SampledFunction, refine_grid


def random_pl(rng, grid, n_knots=6):
    """Random piecewise-linear function on the grid, vanishing at 1."""
    knots = np.sort(rng.uniform(0.02, 0.98, n_knots))
    ys = np.append(rng.uniform(-1.0, 2.0, n_knots + 1), 0.0)
    xs = np.concatenate([[0.0], knots, [1.0]])
    return SampledFunction(grid, np.interp(grid.points, xs, ys)), knots


def random_small_grid(rng, n, lo=1e-3, hi=1 - 1e-3):
    pts = np.sort(rng.uniform(lo, hi, n))
    while np.any(np.diff(pts) < 1e-6):
        pts = np.sort(rng.uniform(lo, hi, n))
    return Grid(pts, l=1.0)


def random_values(rng, n):
    """Random samples of varied shapes: dense, sparse, single spike."""
    kind = rng.integers(3)
    if kind == 0:
        return rng.normal(size=n)
    if kind == 1:
        v = rng.uniform(0, 3, n)
        v[rng.random(n) < 0.6] = 0.0
        return v
    v = np.zeros(n)
    v[rng.integers(n)] = rng.uniform(0.5, 2)
    return v


def composite_grid(knots):
    """Dense near both ends and refined around the knots of f."""
    base = Grid(np.unique(np.concatenate([
        np.geomspace(1e-6, 1 - 1e-6, 5000),
        np.linspace(1e-3, 1 - 1e-6, 20000)])), l=1.0)
    return refine_grid(base, list(knots) + [1 - 1e-6], 0.01, levels=30)
