"""Compiled inner loop of the multiscale scan.

The scan visits every interval [i/n, j/n] of a coarse grid.  Rebuilding the
least concave majorant from scratch for each interval would cost O(n^3 * r);
instead, for a fixed anchor i the majorant over [i/n, j/n] is grown one
coarse cell at a time.  Each cell's own upper hull is precomputed once, and
extending the interval appends that cell's hull vertices to a stack with the
usual monotone-chain pops — the merged stack is exactly the upper hull of
the union of vertex sets, hence the majorant of the concatenation.

Alongside the stack we keep, per hull segment, the running maximum of
(hull - values) over the fine knots under that segment, plus a prefix
maximum.  An extension only invalidates segments at or after the deepest
stack position touched by the pops, so only that suffix is recomputed.  The
gap is zero at hull vertices by construction, so segment maxima only look at
interior knots and every deviation is exactly >= 0.

Everything here is sequential and deterministic; parallelism lives at the
replication level in the calibration and power harnesses.
"""

from __future__ import annotations

import numba as nb
import numpy as np


@nb.njit(cache=True, inline="always")
def _segment_gap_max(values, ax, ay, bx, by):
    """Max of (chord - values) over the interior fine knots of one segment."""
    best = 0.0
    span = bx - ax
    if span >= 2:
        slope = (by - ay) / span
        for k in range(ax + 1, bx):
            d = ay + slope * (k - ax) - values[k]
            if d > best:
                best = d
    return best


@nb.njit(cache=True)
def scan_pairs(values, n, r, noise_sq, collect, stats_out):
    """Scan all coarse intervals of a path sampled on n*r fine steps.

    Parameters
    ----------
    values : float64[K+1]
        Path ordinates on the fine grid, K = n*r.
    n, r : int64
        Coarse grid size and fine steps per coarse cell.
    noise_sq : float64
        Variance entering the normalization.
    collect : bool
        When True, write the statistic of every visited pair into
        ``stats_out`` (length n*(n+1)//2, visit order: i ascending, then j).
    stats_out : float64[:]
        Output buffer (a length-1 dummy when ``collect`` is False).

    Returns
    -------
    (max_stat, best_i, best_j)
        The maximal normalized deviation and the lexicographically smallest
        interval attaining it.
    """
    # Upper hull of each coarse cell, stored back to back.
    cell_x = np.empty(n * (r + 1), np.int64)
    cell_v = np.empty(n * (r + 1), np.float64)
    cell_off = np.empty(n + 1, np.int64)
    p = 0
    cell_off[0] = 0
    for c in range(n):
        start = p
        for k in range(c * r, c * r + r + 1):
            v = values[k]
            while p - start >= 2:
                x0 = cell_x[p - 2]
                y0 = cell_v[p - 2]
                x1 = cell_x[p - 1]
                y1 = cell_v[p - 1]
                if (x1 - x0) * (v - y0) - (k - x0) * (y1 - y0) >= 0.0:
                    p -= 1
                else:
                    break
            cell_x[p] = k
            cell_v[p] = v
            p += 1
        cell_off[c + 1] = p

    K = values.shape[0] - 1
    hx = np.empty(K + 2, np.int64)  # hull vertex fine indices
    hv = np.empty(K + 2, np.float64)  # hull vertex ordinates
    seg = np.empty(K + 1, np.float64)  # per-segment gap maximum
    pre = np.empty(K + 1, np.float64)  # prefix maximum of seg

    best_stat = -1.0
    best_i = -1
    best_j = -1
    norm = n / np.sqrt(noise_sq)  # stat = dev * norm / sqrt(j - i)
    pair = 0
    for i in range(n):
        # Seed the stack with cell i's hull.
        m = 0
        for q in range(cell_off[i], cell_off[i + 1]):
            hx[m] = cell_x[q]
            hv[m] = cell_v[q]
            m += 1
        for s in range(m - 1):
            seg[s] = _segment_gap_max(values, hx[s], hv[s], hx[s + 1], hv[s + 1])
            pre[s] = seg[s] if s == 0 else max(pre[s - 1], seg[s])
        stat = pre[m - 2] * norm
        if collect:
            stats_out[pair] = stat
        pair += 1
        if stat > best_stat:
            best_stat = stat
            best_i = i
            best_j = i + 1
        for j in range(i + 2, n + 1):
            c = j - 1
            low = m  # deepest stack size reached during this merge
            # The cell hull's first vertex is the current right endpoint;
            # append the rest with monotone-chain pops.
            for q in range(cell_off[c] + 1, cell_off[c + 1]):
                x = cell_x[q]
                v = cell_v[q]
                while m >= 2:
                    x0 = hx[m - 2]
                    y0 = hv[m - 2]
                    x1 = hx[m - 1]
                    y1 = hv[m - 1]
                    if (x1 - x0) * (v - y0) - (x - x0) * (y1 - y0) >= 0.0:
                        m -= 1
                        if m < low:
                            low = m
                    else:
                        break
                hx[m] = x
                hv[m] = v
                m += 1
            # Segments strictly before low-1 kept both endpoints: unchanged.
            s0 = low - 1
            if s0 < 0:
                s0 = 0
            for s in range(s0, m - 1):
                seg[s] = _segment_gap_max(values, hx[s], hv[s], hx[s + 1], hv[s + 1])
                pre[s] = seg[s] if s == 0 else max(pre[s - 1], seg[s])
            stat = pre[m - 2] * norm / np.sqrt(j - i)
            if collect:
                stats_out[pair] = stat
            pair += 1
            if stat > best_stat:
                best_stat = stat
                best_i = i
                best_j = j
    return best_stat, best_i, best_j
