"""Brute-force reference solutions for small instances.

Everything here enumerates consecutive-block partitions directly and never
calls the fast algorithms it is meant to check.  Size guards are hard
errors so an oracle cannot end up on a production path by accident.
"""

import itertools
import math

import numpy as np

MAX_MONOTONE_N = 12
MAX_UNIMODAL_N = 10
MAX_SEGMENT_N = 16

# Same convention as the fast estimator: the smallest split whose error is
# within this tolerance (relative to ||y - y[0]||^2) of the minimum wins, and
# the mode is the first entry within the tolerance (relative to max |fit|)
# of the top.
_MODE_TIE_RTOL = 1e-12


def _guard(n, limit, what):
    if n > limit:
        raise ValueError(f"{what} is limited to n <= {limit} (got n={n})")


def _partitions(n):
    """All consecutive-block partitions of range(n), as lists of (lo, hi)."""
    for cuts in itertools.product((False, True), repeat=n - 1):
        blocks, lo = [], 0
        for i, cut in enumerate(cuts, start=1):
            if cut:
                blocks.append((lo, i))
                lo = i
        blocks.append((lo, n))
        yield blocks


def _sse(y, fitted):
    return float(sum((a - b) ** 2 for a, b in zip(y, fitted)))


def _brute_projection(y, feasible):
    """Best blockwise-mean fit among partitions whose fit passes ``feasible``.

    Candidates are checked in a fixed enumeration order and only a strictly
    smaller error replaces the incumbent.
    """
    y = [float(v) for v in y]
    csum = list(itertools.accumulate(y, initial=0.0))
    best, best_sse = None, math.inf
    for blocks in _partitions(len(y)):
        fitted = []
        for lo, hi in blocks:
            fitted.extend([(csum[hi] - csum[lo]) / (hi - lo)] * (hi - lo))
        if not feasible(fitted):
            continue
        sse = _sse(y, fitted)
        if sse < best_sse:
            best, best_sse = fitted, sse
    return np.array(best)


def _nondecreasing(v):
    return all(a <= b for a, b in zip(v[:-1], v[1:]))


def _nonincreasing(v):
    return all(a >= b for a, b in zip(v[:-1], v[1:]))


def brute_monotone_projection(y, direction="nondecreasing"):
    """Projection onto the monotone cone by exhaustive partition search."""
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise ValueError("y must be nonempty")
    _guard(y.size, MAX_MONOTONE_N, "brute_monotone_projection")
    direction = getattr(direction, "value", direction)
    if direction in ("nondecreasing", "up"):
        return _brute_projection(y, _nondecreasing)
    if direction in ("nonincreasing", "down"):
        return _brute_projection(y, _nonincreasing)
    raise ValueError(f"unknown direction {direction!r}")


def brute_mode_cone_projection(y, m):
    """Projection onto the cone of sequences with a mode at position ``m`` (1-based)."""
    y = np.asarray(y, dtype=float)
    n = y.size
    _guard(n, MAX_MONOTONE_N, "brute_mode_cone_projection")
    if not 1 <= m <= n:
        raise ValueError(f"mode must lie in [1, {n}], got {m}")
    return _brute_projection(
        y, lambda v: _nondecreasing(v[:m]) and _nonincreasing(v[m - 1:]))


def brute_unimodal_projection(y):
    """Least squares unimodal fit by enumerating every split and partition.

    Returns ``(fitted, mode, sse)``.  The smallest minimizing split is
    kept and ``mode`` is the 1-based position where that fit first peaks.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    if n == 0:
        raise ValueError("y must be nonempty")
    _guard(n, MAX_UNIMODAL_N, "brute_unimodal_projection")
    candidates = []
    for m in range(1, n + 1):
        left = brute_monotone_projection(y[:m], "nondecreasing")
        right = (brute_monotone_projection(y[m:], "nonincreasing")
                 if m < n else np.empty(0))
        fitted = np.concatenate([left, right])
        candidates.append((m, fitted, _sse(y, fitted)))
    best = min(c[2] for c in candidates)
    scale = sum((v - y[0]) ** 2 for v in y)
    for _, fitted, sse in candidates:
        if sse <= best + _MODE_TIE_RTOL * scale:
            top = max(fitted)
            tol = _MODE_TIE_RTOL * max(abs(v) for v in fitted)
            mode = next(i for i, v in enumerate(fitted, start=1) if v >= top - tol)
            return fitted, mode, sse
    raise AssertionError("unreachable")


def exhaustive_segment_error(theta_star, k):
    """Smallest within-segment squared error over all splits into ``k`` blocks."""
    x = [float(v) for v in theta_star]
    n = len(x)
    _guard(n, MAX_SEGMENT_N, "exhaustive_segment_error")
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    best = math.inf
    for cuts in itertools.combinations(range(1, n), k - 1):
        bounds = (0,) + cuts + (n,)
        err = 0.0
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            seg = x[lo:hi]
            mean = sum(seg) / len(seg)
            err += sum((v - mean) ** 2 for v in seg)
        best = min(best, err)
    return best
