"""Shared test oracles: brute-force hulls and scans, random inputs.

The oracles deliberately use different algorithms and arithmetic paths than
the library (gift wrapping instead of a monotone chain, np.interp instead
of the chain evaluator) so that agreement is evidence, not tautology.
"""

from __future__ import annotations

import math

import numpy as np

from monoscan import GridFunction


def giftwrap_hull(xs, vs):
    """Upper hull by gift wrapping: from each vertex, chase the max slope.

    Slope ties pick the farthest point, which collapses collinear runs the
    same way the production chain does.  Points must be sorted by x.
    """
    xs = [float(x) for x in xs]
    vs = [float(v) for v in vs]
    last = len(xs) - 1
    idx = 0
    verts = [(xs[0], vs[0])]
    while idx < last:
        best = idx + 1
        for k in range(idx + 2, last + 1):
            # slope(idx->k) >= slope(idx->best) in cross-product form
            cross = (xs[k] - xs[idx]) * (vs[best] - vs[idx]) - (
                xs[best] - xs[idx]
            ) * (vs[k] - vs[idx])
            if cross <= 0.0:
                best = k
        verts.append((xs[best], vs[best]))
        idx = best
    return verts


def hull_values(verts, xs):
    """Ordinates of a polyline at ``xs`` via np.interp."""
    hx = np.array([p[0] for p in verts])
    hv = np.array([p[1] for p in verts])
    return np.interp(np.asarray(xs, dtype=np.float64), hx, hv)


def brute_scan(values, n, r, noise_sq):
    """All-pairs scan computed from scratch with the gift-wrap oracle.

    Returns (max_stat, best_interval, records) with one (i, j, stat)
    record per pair in (i, j) lexicographic order; ties for the maximum
    keep the first pair visited.
    """
    values = np.asarray(values, dtype=np.float64)
    fine = values.size - 1
    assert fine == n * r
    xs = np.arange(fine + 1) / fine
    best_stat = -1.0
    best_pair = None
    records = []
    for i in range(n):
        for j in range(i + 1, n + 1):
            lo, hi = i * r, j * r
            sub_x = xs[lo : hi + 1]
            sub_v = values[lo : hi + 1]
            gaps = hull_values(giftwrap_hull(sub_x, sub_v), sub_x) - sub_v
            dev = max(float(np.max(gaps)), 0.0)
            stat = dev * n / math.sqrt(noise_sq * (j - i))
            records.append((i, j, stat))
            if stat > best_stat:
                best_stat = stat
                best_pair = (i, j)
    return best_stat, best_pair, records


def lattice_grid_function(rng, max_knots=64):
    """Random grid function whose hull decisions are exact in doubles.

    Knot abscissas sit on multiples of 1/64 and ordinates on multiples of
    2^-10, so every cross product in a hull construction is an exact
    double and vertex sets are arithmetic-independent.
    """
    nknots = int(rng.integers(2, max_knots + 1))
    values = rng.integers(-(2**20), 2**20, size=nknots).astype(np.float64)
    return GridFunction(0.0, 1.0 / 64.0, values / 2.0**10)


def uniform_grid_function(rng, max_knots=64):
    """Random grid function with continuous ordinates on [0, 1]."""
    nknots = int(rng.integers(2, max_knots + 1))
    values = rng.normal(size=nknots)
    return GridFunction(0.0, 1.0 / (nknots - 1), values)
