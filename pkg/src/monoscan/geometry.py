"""Piecewise-linear functions on uniform grids and their least concave majorants.

A :class:`GridFunction` is the continuous function obtained by linear
interpolation of values given on a uniform knot grid.  Its least concave
majorant (LCM) is the pointwise-smallest concave function dominating it,
which for a piecewise-linear input is the upper concave hull of its knot
points.  :func:`lcm` builds the majorant with a single monotone-chain stack
pass, :func:`concat_lcm` merges majorants of contiguous restrictions, and
:func:`max_deviation` measures how far the majorant sits above the function.

All values are plain double precision; slope comparisons are exact floating
comparisons (collinear vertices collapse), so every chain has a canonical
minimal vertex set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError

__all__ = [
    "GridFunction",
    "ConcaveChain",
    "lcm",
    "concat_lcm",
    "evaluate",
    "max_deviation",
]


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A continuous piecewise-linear function sampled on a uniform grid.

    Parameters
    ----------
    left : float
        Abscissa of the first knot.
    step : float
        Grid spacing, strictly positive.
    values : array-like of shape (K+1,)
        Ordinates at the knots ``left + k*step``, ``k = 0..K``.  At least
        two knots are required and every value must be finite.
    """

    left: float
    step: float
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 2:
            raise DomainError("a grid function needs at least 2 knots")
        if not np.isfinite(values).all():
            raise DomainError("grid values must be finite")
        left = float(self.left)
        step = float(self.step)
        if not np.isfinite(left) or not np.isfinite(step) or step <= 0.0:
            raise DomainError("grid step must be finite and > 0")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "step", step)
        object.__setattr__(self, "values", values)

    @property
    def nknots(self) -> int:
        return int(self.values.size)

    @property
    def knots(self) -> np.ndarray:
        """Knot abscissas ``left + k*step`` as a fresh array."""
        return self.left + np.arange(self.values.size) * self.step

    def restrict(self, start: int, stop: int) -> "GridFunction":
        """Restriction to the knot index range ``start..stop`` (inclusive)."""
        if not (0 <= start < stop < self.values.size):
            raise DomainError(
                f"knot range ({start}, {stop}) outside 0..{self.values.size - 1}"
            )
        return GridFunction(
            self.left + start * self.step, self.step, self.values[start : stop + 1]
        )


@dataclass(frozen=True)
class ConcaveChain:
    """A least concave majorant given by its vertices.

    Parameters
    ----------
    vertices : sequence of (x, v) pairs
        Abscissas strictly increasing; consecutive slopes strictly
        decreasing (collinear vertices are collapsed, so the representation
        is canonical and minimal).  A single vertex is allowed only for a
        single-point domain.
    """

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        vertices = tuple((float(x), float(v)) for x, v in self.vertices)
        if len(vertices) == 0:
            raise DomainError("a chain needs at least one vertex")
        prev_slope = None
        for a, b in zip(vertices, vertices[1:]):
            dx = b[0] - a[0]
            if not dx > 0.0:
                raise DomainError("chain abscissas must be strictly increasing")
            slope = (b[1] - a[1]) / dx
            if prev_slope is not None and not slope < prev_slope:
                raise DomainError("chain slopes must be strictly decreasing")
            prev_slope = slope
        object.__setattr__(self, "vertices", vertices)

    @property
    def xs(self) -> np.ndarray:
        return np.array([p[0] for p in self.vertices])

    @property
    def vs(self) -> np.ndarray:
        return np.array([p[1] for p in self.vertices])


def _upper_hull(xs, vs) -> list[tuple[float, float]]:
    """Monotone-chain upper hull of points already sorted by x.

    Pops the middle point whenever it lies on or below the chord of its
    neighbours (cross product >= 0), which collapses collinear runs.
    """
    hx: list[float] = []
    hv: list[float] = []
    for x, v in zip(xs, vs):
        x = float(x)
        v = float(v)
        while len(hx) >= 2:
            x0 = hx[-2]
            v0 = hv[-2]
            if (hx[-1] - x0) * (v - v0) - (x - x0) * (hv[-1] - v0) >= 0.0:
                hx.pop()
                hv.pop()
            else:
                break
        hx.append(x)
        hv.append(v)
    return list(zip(hx, hv))


def lcm(g: GridFunction) -> ConcaveChain:
    """Least concave majorant of a grid function.

    Returns the upper concave hull of the knot points of ``g``: a chain
    that is pointwise >= ``g`` and pointwise <= any concave function that
    dominates ``g`` on the same interval.

    Parameters
    ----------
    g : GridFunction

    Returns
    -------
    ConcaveChain
    """
    if g.values.size < 2:
        raise DomainError("lcm needs at least 2 knots")
    return ConcaveChain(tuple(_upper_hull(g.knots, g.values)))


def concat_lcm(left_chain: ConcaveChain, right_chain: ConcaveChain) -> ConcaveChain:
    """Majorant of the concatenation of two contiguous restrictions.

    The chains must come from adjacent restrictions of one continuous
    function: the last vertex of ``left_chain`` and the first vertex of
    ``right_chain`` must coincide.  The result equals the least concave
    majorant over the union domain, i.e. the upper hull of the union of
    both vertex sets.
    """
    lx, lv = left_chain.vertices[-1]
    rx, rv = right_chain.vertices[0]
    if lx != rx or lv != rv:
        raise PreconditionError(
            f"chain junction mismatch: left ends at ({lx}, {lv}), "
            f"right starts at ({rx}, {rv})"
        )
    merged = left_chain.vertices + right_chain.vertices[1:]
    xs = [p[0] for p in merged]
    vs = [p[1] for p in merged]
    return ConcaveChain(tuple(_upper_hull(xs, vs)))


def _chain_values(chain: ConcaveChain, x: np.ndarray) -> np.ndarray:
    """Chain ordinates at the abscissas ``x`` (must lie inside the domain).

    Exact at vertices (no arithmetic), linear interpolation in between.
    """
    cx = chain.xs
    cv = chain.vs
    pos = np.searchsorted(cx, x, side="left")
    pos = np.minimum(pos, cx.size - 1)
    at_vertex = cx[pos] == x
    seg = np.clip(pos - 1, 0, max(cx.size - 2, 0))
    if cx.size == 1:
        return np.where(at_vertex, cv[pos], np.nan)
    slope = (cv[seg + 1] - cv[seg]) / (cx[seg + 1] - cx[seg])
    interp = cv[seg] + slope * (x - cx[seg])
    return np.where(at_vertex, cv[pos], interp)


def evaluate(chain: ConcaveChain, x: float) -> float:
    """Chain value at ``x`` by linear interpolation between vertices.

    Raises
    ------
    DomainError
        If ``x`` lies outside ``[first vertex abscissa, last vertex abscissa]``.
    """
    x = float(x)
    lo = chain.vertices[0][0]
    hi = chain.vertices[-1][0]
    if not (lo <= x <= hi):
        raise DomainError(f"x={x} outside chain domain [{lo}, {hi}]")
    return float(_chain_values(chain, np.array([x]))[0])


def max_deviation(chain: ConcaveChain, g: GridFunction) -> tuple[float, int]:
    """Largest gap between a majorant and its grid function.

    ``chain`` must be the LCM of ``g`` (same domain).  Because the gap is
    piecewise linear with kinks only at the knots of ``g``, the maximum
    over the knots equals the supremum over the continuous interval.

    Returns
    -------
    (dev, argmax)
        ``dev >= 0`` and ``argmax`` is the smallest knot index attaining it.
    """
    knots = g.knots
    if chain.vertices[0][0] != knots[0] or chain.vertices[-1][0] != knots[-1]:
        raise PreconditionError("chain and grid function cover different domains")
    if chain.vertices[0][1] != g.values[0] or chain.vertices[-1][1] != g.values[-1]:
        raise PreconditionError("chain endpoints do not match the grid function")
    gaps = _chain_values(chain, knots) - g.values
    idx = int(np.argmax(gaps))
    return float(gaps[idx]), idx
