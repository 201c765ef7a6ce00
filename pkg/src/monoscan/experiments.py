"""Alternative signals, data generators, power studies and theory functionals.

The catalog holds the benchmark alternatives f1..f7 and the bump family
f_a(x) = -(1+x) + a*exp(-50(x-0.5)^2), plus constant/linear/custom kinds for
harness work.  :func:`power_study` estimates rejection rates against a
calibrated threshold with a Wilson interval.  The functionals
(:func:`detectability`, :func:`guarantee_threshold`, :func:`delta2`,
:func:`envelope_gap`) quantify how detectable a departure from monotonicity
is; integrals use the composite midpoint rule throughout, which is exact on
constants and linear pieces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np

from ._parallel import map_indexed
from .calibration import QuantileTable, derive_stream
from .errors import DomainError, PreconditionError
from .geometry import GridFunction
from .statistics import pair_and_estimate, scan, scan_regression

__all__ = [
    "KINDS",
    "AlternativeSpec",
    "PowerReport",
    "signal",
    "simulate_white_path",
    "simulate_regression_sample",
    "power_study",
    "average",
    "detectability",
    "guarantee_threshold",
    "delta2",
    "envelope_gap",
]

KINDS = (
    "f1",
    "f2",
    "f3",
    "f4",
    "f5",
    "f6",
    "f7",
    "gijbels",
    "constant",
    "linear",
    "custom",
)

_Z95 = 1.959963984540054  # standard normal 0.975-quantile


@dataclass(frozen=True)
class AlternativeSpec:
    """One alternative-signal configuration.

    Attributes
    ----------
    kind : str
        One of ``KINDS``.  "gijbels" is the bump family parameterized by
        ``a``; "custom" evaluates ``func``.
    sigma : float
        Noise standard deviation, > 0.  Also enters the signal itself for
        kind "f2", which is 1.5*sigma*x by definition.
    a : float
        Bump height for kind "gijbels" (>= 0), ignored otherwise.
    scale : float
        Pre-multiplier applied to the signal (default 1).
    func : callable, optional
        The signal for kind "custom".  Must be a module-level function if
        the spec is used in a multi-process power study.
    """

    kind: str
    sigma: float = 1.0
    a: float = 0.0
    scale: float = 1.0
    func: Callable[[float], float] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown signal kind {self.kind!r}")
        if not self.sigma > 0.0:
            raise DomainError("sigma must be > 0")
        if self.kind == "gijbels" and self.a < 0.0:
            raise DomainError("the bump height a must be >= 0")
        if self.kind == "custom" and not callable(self.func):
            raise DomainError("kind 'custom' needs a callable func")

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "sigma": self.sigma,
            "a": self.a,
            "scale": self.scale,
        }


@dataclass(frozen=True)
class PowerReport:
    """Rejection-rate estimate for one alternative configuration."""

    spec: AlternativeSpec
    model: str
    n: int
    alpha: float
    threshold_used: float
    replications: int
    rejections: int
    power: float
    ci95: tuple[float, float]

    def __post_init__(self):
        if self.replications <= 0:
            raise DomainError("replications must be > 0")
        if self.power != self.rejections / self.replications:
            raise DomainError("power must equal rejections/replications")
        lo, hi = self.ci95
        if not (0.0 <= lo <= self.power <= hi <= 1.0):
            raise DomainError("ci95 must contain the power estimate")

    def to_json_dict(self) -> dict:
        return {
            "spec": self.spec.to_json_dict(),
            "model": self.model,
            "n": self.n,
            "alpha": self.alpha,
            "threshold_used": self.threshold_used,
            "replications": self.replications,
            "rejections": self.rejections,
            "power": self.power,
            "ci95": [self.ci95[0], self.ci95[1]],
        }


def _evaluate_kind(spec: AlternativeSpec, x: np.ndarray) -> np.ndarray:
    kind = spec.kind
    if kind == "f1":
        return (
            -15.0 * (x - 0.5) ** 3 * (x <= 0.5)
            - 0.3 * (x - 0.5)
            + np.exp(-250.0 * (x - 0.25) ** 2)
        )
    if kind == "f2":
        return 1.5 * spec.sigma * x
    if kind == "f3":
        return 0.2 * np.exp(-50.0 * (x - 0.5) ** 2)
    if kind == "f4":
        return -0.1 * np.cos(6.0 * np.pi * x)
    if kind == "f5":
        return -0.2 * x + 0.2 * np.exp(-50.0 * (x - 0.5) ** 2)
    if kind == "f6":
        return -0.2 * x - 0.1 * np.cos(6.0 * np.pi * x)
    if kind == "f7":
        # The steep-baseline bump at height 0.45, i.e. the "gijbels" family
        # with a = 0.45.  The height matters: this signal is meant to sit
        # in the moderate-power regime (white-noise power near 0.8 at
        # n = 100), which a bump of 0.25 cannot reach — at that height the
        # increase is essentially undetectable under any noise level used
        # here.
        return -(1.0 + x) + 0.45 * np.exp(-50.0 * (x - 0.5) ** 2)
    if kind == "gijbels":
        return -(1.0 + x) + spec.a * np.exp(-50.0 * (x - 0.5) ** 2)
    if kind == "constant":
        return np.zeros_like(x)
    if kind == "linear":
        return x.copy()
    # custom
    func = spec.func
    try:
        out = np.asarray(func(x), dtype=np.float64)
        if out.shape == x.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(func(u)) for u in x.ravel()]).reshape(x.shape)


def signal(spec: AlternativeSpec, x):
    """Signal value(s) at ``x`` in [0, 1], times ``spec.scale``.

    Accepts a scalar or an array; returns the matching shape.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise DomainError("x must lie in [0, 1]")
    out = _evaluate_kind(spec, np.atleast_1d(arr)) * spec.scale
    if arr.ndim == 0:
        return float(out[0])
    return out


def _eval_function(f, x: np.ndarray) -> np.ndarray:
    """Evaluate a spec or plain callable on an array of abscissas."""
    if isinstance(f, AlternativeSpec):
        return np.atleast_1d(np.asarray(signal(f, x), dtype=np.float64))
    try:
        out = np.asarray(f(x), dtype=np.float64)
        if out.shape == x.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(f(u)) for u in x])


def simulate_white_path(
    spec: AlternativeSpec, n: int, r: int, rng: np.random.Generator
) -> GridFunction:
    """Cumulated observation: integral of the signal plus scaled Brownian noise.

    Knot k/m (m = n*r) carries the midpoint-rule integral of the signal up
    to k/m plus (sigma/sqrt(n)) times a Brownian partial-sum path.
    """
    if n < 2:
        raise DomainError("n must be >= 2")
    if r < 1:
        raise DomainError("r must be >= 1")
    m = n * r
    mids = (np.arange(m) + 0.5) / m
    increments = signal(spec, mids) / m
    increments = increments + (spec.sigma / math.sqrt(n)) * rng.standard_normal(
        m
    ) / math.sqrt(m)
    values = np.empty(m + 1)
    values[0] = 0.0
    np.cumsum(increments, out=values[1:])
    return GridFunction(0.0, 1.0 / m, values)


def simulate_regression_sample(
    spec: AlternativeSpec, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Observations y_i = signal(i/n) + sigma * xi_i, i = 1..n."""
    if n % 2 != 0 or n < 4:
        raise DomainError("n must be even and >= 4")
    x = np.arange(1, n + 1) / n
    return signal(spec, x) + spec.sigma * rng.standard_normal(n)


def _wilson_ci95(rejections: int, reps: int) -> tuple[float, float]:
    p = rejections / reps
    z2 = _Z95 * _Z95
    denom = 1.0 + z2 / reps
    center = (p + z2 / (2.0 * reps)) / denom
    half = _Z95 * math.sqrt(p * (1.0 - p) / reps + z2 / (4.0 * reps * reps)) / denom
    # at the boundaries the interval ends exactly on 0 or 1 (center and
    # half coincide there); spell that out rather than trusting the float
    # cancellation, which can land a hair off and break containment
    lo = 0.0 if rejections == 0 else max(0.0, center - half)
    hi = 1.0 if rejections == reps else min(1.0, center + half)
    return (lo, hi)


def _power_replication(
    k: int,
    spec: AlternativeSpec,
    model: str,
    n: int,
    r: int,
    seed: int,
    threshold: float,
) -> int:
    rng = derive_stream(seed, k)
    if model == "white":
        g = simulate_white_path(spec, n, r, rng)
        stat = scan(g, n, spec.sigma**2).max_stat
    else:
        y = simulate_regression_sample(spec, n, rng)
        stat = scan_regression(pair_and_estimate(y)).max_stat
    return 1 if stat > threshold else 0


def power_study(
    spec: AlternativeSpec,
    model: str,
    n: int,
    r: int,
    alpha: float,
    table: QuantileTable,
    reps: int,
    seed: int,
) -> PowerReport:
    """Rejection rate of the test against one alternative.

    Simulates ``reps`` datasets under ``spec`` (replication k on the child
    stream of (seed, k)), scans each, and compares to the table's quantile
    at ``alpha``.

    Parameters
    ----------
    spec : AlternativeSpec
    model : str
        "white" or "regression"; must match the table.
    n : int
        Sample size; must match the table.
    r : int
        Fine steps per coarse cell (white model); must match the table.
        Ignored (forced to 1) for regression.
    alpha : float
        Level; must be one of the table's entries.
    table : QuantileTable
    reps : int
        Replication count, >= 100.
    seed : int
        Master seed of the replication streams.
    """
    if model not in ("white", "regression"):
        raise DomainError(f"unknown model {model!r}")
    if reps < 100:
        raise PreconditionError("reps must be >= 100")
    if model == "regression":
        r = 1
    if table.model != model or table.n != n or table.r != r:
        raise PreconditionError(
            f"table is for ({table.model}, n={table.n}, r={table.r}), "
            f"requested ({model}, n={n}, r={r})"
        )
    threshold = table.quantile(alpha)
    results = map_indexed(
        partial(
            _power_replication,
            spec=spec,
            model=model,
            n=n,
            r=r,
            seed=seed,
            threshold=threshold,
        ),
        reps,
    )
    rejections = int(sum(results))
    return PowerReport(
        spec=spec,
        model=model,
        n=n,
        alpha=alpha,
        threshold_used=threshold,
        replications=reps,
        rejections=rejections,
        power=rejections / reps,
        ci95=_wilson_ci95(rejections, reps),
    )


def average(f, x: float, y: float, grid: int) -> float:
    """Interval mean (1/(y-x)) * integral of f over [x, y], midpoint rule.

    ``f`` is an :class:`AlternativeSpec` or a plain callable on [0, 1];
    the integral uses ``grid`` equal panels (exact for linear integrands).
    """
    if not 0.0 <= x < y <= 1.0:
        raise DomainError(f"need 0 <= x < y <= 1, got x={x}, y={y}")
    if grid < 2:
        raise DomainError("grid must be >= 2")
    h = (y - x) / grid
    mids = x + (np.arange(grid) + 0.5) * h
    return float(np.mean(_eval_function(f, mids)))


def detectability(f, x: float = 0.0, y: float = 1.0, grid: int = 512) -> float:
    """Largest normalized mean drop sup_t (t-x)/sqrt(y-x) * (mean_xy - mean_xt).

    Positive values witness an increase of f inside [x, y]; the functional
    is 0 for every non-increasing f (the term vanishes at t = x and is
    non-positive beyond).  Evaluated on ``grid``+1 equally spaced t values,
    with interval means on 2*``grid`` midpoint panels; approximate for very
    spiky f.
    """
    if not 0.0 <= x < y <= 1.0:
        raise DomainError(f"need 0 <= x < y <= 1, got x={x}, y={y}")
    if grid < 2:
        raise DomainError("grid must be >= 2")
    mean_xy = average(f, x, y, 2 * grid)
    root = math.sqrt(y - x)
    best = 0.0  # the t = x term
    for t in np.linspace(x, y, grid + 1)[1:]:
        value = (t - x) / root * (mean_xy - average(f, x, float(t), 2 * grid))
        if value > best:
            best = value
    return best


def guarantee_threshold(alpha: float, beta: float, n: int) -> float:
    """Deviation size that guarantees power >= 1 - beta at level alpha.

    Returns 2*sqrt(2) * (sqrt(log(n*(n+1)/alpha)) + sqrt(log(2/beta))).
    If the normalized mean drop of the noiseless cumulated signal exceeds
    this value on some scanned interval, the level-alpha test rejects with
    probability at least 1 - beta; the comparison is left to the caller.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"level {alpha} outside (0, 1)")
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta {beta} outside (0, 1)")
    if n < 1:
        raise DomainError("n must be >= 1")
    return 2.0 * math.sqrt(2.0) * (
        math.sqrt(math.log(n * (n + 1) / alpha)) + math.sqrt(math.log(2.0 / beta))
    )


def delta2(f, grid: int = 4096) -> float:
    """Largest derivative of f on [0, 1], by central differences.

    Uses step h = 1/grid on the interior grid points; approximate near
    kinks of piecewise-smooth catalog members.
    """
    if grid < 2:
        raise DomainError("grid must be >= 2")
    values = _eval_function(f, np.arange(grid + 1) / grid)
    diffs = (values[2:] - values[:-2]) * (grid / 2.0)
    return float(np.max(diffs))


def envelope_gap(f, grid: int = 4096) -> float:
    """Largest gap between f and its running minimum on a grid.

    The running minimum f*(t) = min over [0, t] of f is the closest
    non-increasing envelope from below; the gap max(f - f*) is an upper
    bound for the distance from f to the non-increasing class, and it is 0
    exactly when the grid restriction of f is non-increasing.
    """
    if grid < 2:
        raise DomainError("grid must be >= 2")
    values = _eval_function(f, np.arange(grid + 1) / grid)
    running_min = np.minimum.accumulate(values)
    return float(np.max(values - running_min))
