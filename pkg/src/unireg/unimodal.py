"""Least squares unimodal regression in linear time.

With the mode fixed at ``m`` the problem splits into a nondecreasing fit
of ``y[:m]`` and a nonincreasing fit of ``y[m:]``.  The prefix and suffix
scans give the error of every such split in O(n), so the best mode is a
single argmin.  A split fit need not satisfy the coupling constraint at
the mode boundary, but it is unimodal either way (with its mode at ``m``
or ``m + 1``), hence the minimum over splits is the minimum over all
unimodal sequences.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .isotonic import (Direction, as_sequence, pava, prefix_isotonic_sse,
                       suffix_antitonic_sse)

# Splits whose errors agree to this tolerance, relative to ||y - y[0]||^2
# (the scale of the scan's rounding error), count as tied; the smallest of
# them is used.  Relative to max |theta|, the same tolerance decides which
# entries of the fit count as its maximum when reporting the mode.
MODE_TIE_RTOL = 1e-12


@dataclass
class UnimodalFit:
    """Result of ``unimodal_lse``.

    ``split`` is the 1-based boundary chosen by the scan (nondecreasing on
    ``1..split``, nonincreasing after).  ``mode`` is the smallest position
    at which ``fitted`` peaks; it equals ``split`` or ``split + 1``.
    ``per_mode_sse[j]`` is the error of the split at ``j + 1``.
    """

    fitted: np.ndarray
    mode: int
    sse: float
    split: int
    per_mode_sse: Optional[np.ndarray] = None


def first_peak(theta):
    """1-based position of the first entry that attains the maximum."""
    theta = np.asarray(theta, dtype=float)
    top = theta.max()
    tol = MODE_TIE_RTOL * np.abs(theta).max()
    return int(np.flatnonzero(theta >= top - tol)[0]) + 1


def unimodal_lse(y, per_mode=True):
    """Least squares projection of ``y`` onto the unimodal sequences.

    The split with the smallest error is found from the prefix and suffix
    scans; ties go to the smallest split.  Runs in O(n).

    >>> fit = unimodal_lse([2.0, 1.0, 2.0])
    >>> fit.fitted, fit.mode, fit.sse
    (array([2. , 1.5, 1.5]), 1, 0.5)
    """
    y = as_sequence(y)
    n = y.size
    prefix = prefix_isotonic_sse(y, Direction.NONDECREASING)
    suffix = suffix_antitonic_sse(y)
    costs = prefix[1:] + suffix[1:]
    c = y - y[0]
    tol = MODE_TIE_RTOL * float(c @ c)
    split = int(np.flatnonzero(costs <= costs.min() + tol)[0]) + 1

    left = pava(y[:split], Direction.NONDECREASING).fitted
    if split < n:
        right = pava(y[split:], Direction.NONINCREASING).fitted
        fitted = np.concatenate([left, right])
    else:
        fitted = left
    resid = y - fitted
    return UnimodalFit(fitted=fitted, mode=first_peak(fitted), sse=float(resid @ resid),
                       split=split, per_mode_sse=costs if per_mode else None)


def is_unimodal(theta, tol=0.0):
    """True when ``theta`` rises (weakly) and then falls (weakly)."""
    d = np.diff(np.asarray(theta, dtype=float))
    down = np.flatnonzero(d < -tol)
    if down.size == 0:
        return True
    return not np.any(d[down[0]:] > tol)


def smallest_mode(theta, tol=0.0):
    """Smallest 1-based ``m`` with ``theta`` in the mode-``m`` cone."""
    theta = as_sequence(theta, "theta")
    if not is_unimodal(theta, tol):
        raise ValueError("sequence is not unimodal")
    top = theta.max()
    return int(np.flatnonzero(theta >= top - tol)[0]) + 1


def in_mode_cone(theta, m, tol=0.0):
    theta = np.asarray(theta, dtype=float)
    d = np.diff(theta)
    return bool(np.all(d[:m - 1] >= -tol) and np.all(d[m - 1:] <= tol))


def _pava_blocks(values):
    """Nondecreasing PAVA blocks as parallel lists (sum, count)."""
    sums, counts = [], []
    for v in values:
        sums.append(v)
        counts.append(1)
        while len(sums) > 1 and sums[-2] * counts[-1] > sums[-1] * counts[-2]:
            s, c = sums.pop(), counts.pop()
            sums[-1] += s
            counts[-1] += c
    return sums, counts


def mode_cone_projection(y, m):
    """Exact projection of ``y`` onto the cone of sequences with mode at ``m``.

    Once the value ``c`` at position ``m`` (1-based) is fixed, each side is
    a monotone chain bounded above by ``c`` and its fit is the unbounded
    PAVA fit clipped at ``c``.  The optimal ``c`` is the mean of ``y`` over
    position ``m`` and all chain blocks whose level exceeds ``c``; it is
    found by absorbing the highest remaining block while it lies above the
    running mean.
    """
    y = as_sequence(y)
    n = y.size
    if not 1 <= m <= n:
        raise ValueError(f"mode must lie in [1, {n}], got {m}")
    ls, lc = _pava_blocks(y[:m - 1].tolist())
    rs, rc = _pava_blocks(y[m:][::-1].tolist())

    top_sum, n_left, n_right = float(y[m - 1]), 0, 0
    while True:
        level = top_sum / (1 + n_left + n_right)
        left = ls[-1] / lc[-1] if ls else -np.inf
        right = rs[-1] / rc[-1] if rs else -np.inf
        if max(left, right) <= level:
            break
        if left >= right:
            top_sum += ls.pop()
            n_left += lc.pop()
        else:
            top_sum += rs.pop()
            n_right += rc.pop()

    parts = [np.repeat(np.divide(ls, lc), lc)] if ls else []
    parts.append(np.full(1 + n_left + n_right, level))
    if rs:
        parts.append(np.repeat(np.divide(rs, rc), rc)[::-1])
    return np.concatenate(parts)


def project_onto_mode_cone(y, m, tol=1e-10, max_iter=100_000):
    """Projection onto the mode-``m`` cone by Dykstra's alternating projections.

    The two half cones are the nondecreasing sequences on positions
    ``1..m`` and the nonincreasing sequences on ``m..n``; they share
    position ``m``, which carries the coupling constraint.  Raises
    ``ConvergenceError`` if successive iterates still differ by ``tol``
    after ``max_iter`` sweeps.
    """
    from .geometry import MonotoneCone, dykstra_project

    y = as_sequence(y)
    n = y.size
    if not 1 <= m <= n:
        raise ValueError(f"mode must lie in [1, {n}], got {m}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    sets = [MonotoneCone(Direction.NONDECREASING, 0, m),
            MonotoneCone(Direction.NONINCREASING, m - 1, n)]
    return dykstra_project(y, sets, tol=tol, max_iter=max_iter)
