"""Multiscale scan statistics for the white-noise and regression models.

The scan takes a cumulated observation on [0, 1] (a noisy integral path or
a cumulative sum diagram), and for every coarse interval [i/n, j/n]
normalizes the gap between the restriction and its least concave majorant:

    stat(i, j) = dev(i, j) * sqrt(n / (noise_sq * (j - i)/n)).

The maximum over all intervals is the test statistic; intervals whose
statistic exceeds a calibrated threshold localize where the underlying
signal increases.  The regression front end pairs consecutive observations
to estimate the noise variance and reduces to the same scan on the
cumulative sum diagram of the pair means.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernel import scan_pairs
from .errors import DegenerateSampleError, DomainError, PreconditionError
from .geometry import GridFunction

__all__ = [
    "ScanResult",
    "PairedSample",
    "cumulative_sum_diagram",
    "scan",
    "pair_and_estimate",
    "scan_regression",
    "violating_intervals",
]

# Retaining every interval costs n(n+1)/2 records; above this grid size an
# explicit positive floor is required.
RETAIN_ALL_MAX_N = 200


@dataclass(frozen=True)
class ScanResult:
    """Outcome of a multiscale scan.

    Attributes
    ----------
    n : int
        Coarse grid size (the pair count n-bar in regression mode).
    max_stat : float
        Largest normalized deviation over all intervals, always >= 0.
    best_interval : (int, int)
        Lexicographically smallest (i, j) attaining ``max_stat``.
    interval_stats : tuple of (i, j, stat) or None
        All scanned intervals with stat >= ``retain_floor``, in (i, j)
        order; None when retention was not requested.
    retain_floor : float or None
        The floor used to build ``interval_stats``.
    """

    n: int
    max_stat: float
    best_interval: tuple[int, int]
    interval_stats: tuple[tuple[int, int, float], ...] | None = None
    retain_floor: float | None = None


@dataclass(frozen=True, eq=False)
class PairedSample:
    """Pair means and variance estimates from consecutive observations.

    ``ybar[i] = (y[2i-1] + y[2i]) / 2`` (1-based pairing),
    ``sigma_hat_sq = (1/n) * sum (y[2i] - y[2i-1])^2`` and
    ``sigma0_hat_sq = sigma_hat_sq / 2`` exactly.
    """

    ybar: np.ndarray
    sigma_hat_sq: float
    sigma0_hat_sq: float

    def __post_init__(self):
        ybar = np.asarray(self.ybar, dtype=np.float64)
        if ybar.ndim != 1 or ybar.size < 2:
            raise DomainError("ybar needs at least 2 pair means")
        if not np.isfinite(ybar).all():
            raise DomainError("pair means must be finite")
        if not (self.sigma_hat_sq >= 0.0):
            raise DomainError("sigma_hat_sq must be >= 0")
        if self.sigma0_hat_sq != self.sigma_hat_sq / 2.0:
            raise DomainError("sigma0_hat_sq must equal sigma_hat_sq / 2")
        ybar = ybar.copy()
        ybar.setflags(write=False)
        object.__setattr__(self, "ybar", ybar)
        object.__setattr__(self, "sigma_hat_sq", float(self.sigma_hat_sq))
        object.__setattr__(self, "sigma0_hat_sq", float(self.sigma0_hat_sq))

    @property
    def nbar(self) -> int:
        return int(self.ybar.size)


def cumulative_sum_diagram(values) -> GridFunction:
    """Cumulative sum diagram of observations with equal weights 1/n.

    Returns the grid function on [0, 1] through the points
    ``(j/n, (1/n) * sum_{i<=j} values_i)``, starting at (0, 0).
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise DomainError("cumulative sum diagram needs a nonempty sequence")
    if not np.isfinite(values).all():
        raise DomainError("observations must be finite")
    nbar = values.size
    diagram = np.empty(nbar + 1)
    diagram[0] = 0.0
    np.cumsum(values / nbar, out=diagram[1:])
    return GridFunction(0.0, 1.0 / nbar, diagram)


def scan(
    g: GridFunction,
    n: int,
    noise_sq: float,
    retain_floor: float | None = None,
) -> ScanResult:
    """Scan all intervals [i/n, j/n], 0 <= i < j <= n, of a path on [0, 1].

    For each interval the deviation between ``g`` and its local least
    concave majorant is normalized by ``sqrt(n / (noise_sq * (j-i)/n))``.
    Majorants are grown per anchor by appending one coarse cell at a time
    (concatenation semantics), never rebuilt from scratch.

    Parameters
    ----------
    g : GridFunction
        Path on [0, 1] whose knots refine the coarse grid {i/n}: the knot
        count minus one must be a multiple r of n.
    n : int
        Coarse grid size.
    noise_sq : float
        Variance entering the normalization, > 0.
    retain_floor : float or None
        When set, keep (i, j, stat) for every interval with stat >= floor.
        A floor <= 0 (retain everything) is only allowed for n <= 200;
        larger grids need an explicit positive floor.

    Returns
    -------
    ScanResult
    """
    if not noise_sq > 0.0:
        raise DomainError("noise_sq must be > 0")
    if n < 1:
        raise DomainError("n must be >= 1")
    if abs(g.left) > 1e-9 or abs(g.left + (g.nknots - 1) * g.step - 1.0) > 1e-9:
        raise DomainError("scan expects a path on [0, 1]")
    K = g.nknots - 1
    if K % n != 0:
        raise PreconditionError(
            f"fine grid with {K} steps does not refine a coarse grid of size {n}"
        )
    r = K // n
    if retain_floor is not None and retain_floor <= 0.0 and n > RETAIN_ALL_MAX_N:
        raise PreconditionError(
            f"retaining all {n * (n + 1) // 2} intervals needs n <= "
            f"{RETAIN_ALL_MAX_N}; pass a positive retain_floor"
        )

    collect = retain_floor is not None
    if collect:
        stats_out = np.empty(n * (n + 1) // 2, dtype=np.float64)
    else:
        stats_out = np.empty(1, dtype=np.float64)
    max_stat, best_i, best_j = scan_pairs(
        np.ascontiguousarray(g.values), n, r, float(noise_sq), collect, stats_out
    )

    interval_stats = None
    if collect:
        entries = []
        idx = 0
        for i in range(n):
            for j in range(i + 1, n + 1):
                s = stats_out[idx]
                idx += 1
                if s >= retain_floor:
                    entries.append((i, j, float(s)))
        interval_stats = tuple(entries)
    return ScanResult(
        n=n,
        max_stat=float(max_stat),
        best_interval=(int(best_i), int(best_j)),
        interval_stats=interval_stats,
        retain_floor=retain_floor,
    )


def pair_and_estimate(y) -> PairedSample:
    """Pair consecutive observations and estimate the noise variance.

    With 1-based indexing as in the model, pairs are (y1, y2), (y3, y4), ...
    giving means ``ybar_i = (y_{2i-1} + y_{2i})/2`` and the estimates
    ``sigma_hat_sq = (1/n) sum (y_{2i} - y_{2i-1})^2``,
    ``sigma0_hat_sq = sigma_hat_sq / 2``.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.size < 4 or y.size % 2 != 0:
        raise DomainError("need an even number of observations, at least 4")
    if not np.isfinite(y).all():
        raise DomainError("observations must be finite")
    odd = y[0::2]
    even = y[1::2]
    sigma_hat_sq = float(np.sum((even - odd) ** 2) / y.size)
    return PairedSample(
        ybar=(odd + even) / 2.0,
        sigma_hat_sq=sigma_hat_sq,
        sigma0_hat_sq=sigma_hat_sq / 2.0,
    )


def scan_regression(
    sample: PairedSample, retain_floor: float | None = None
) -> ScanResult:
    """Scan the cumulative sum diagram of pair means.

    Runs :func:`scan` with n = n-bar, one fine step per coarse cell, and
    ``noise_sq = sigma0_hat_sq``, which realizes the studentized regression
    statistic.
    """
    if sample.sigma0_hat_sq <= 0.0:
        raise DegenerateSampleError(
            "variance estimate is zero (constant pairs); the statistic is undefined"
        )
    diagram = cumulative_sum_diagram(sample.ybar)
    return scan(diagram, sample.nbar, sample.sigma0_hat_sq, retain_floor)


def violating_intervals(
    result: ScanResult, threshold: float
) -> tuple[tuple[int, int, float], ...]:
    """All retained intervals with stat > threshold, strongest first.

    ``result`` must have been produced with a retain floor at or below
    ``threshold``, otherwise intervals could be silently missing.
    """
    if result.interval_stats is None:
        raise PreconditionError("scan was run without interval retention")
    if result.retain_floor is not None and result.retain_floor > threshold:
        raise PreconditionError(
            f"retain floor {result.retain_floor} lies above threshold {threshold}"
        )
    hits = [e for e in result.interval_stats if e[2] > threshold]
    hits.sort(key=lambda e: -e[2])
    return tuple(hits)
