"""Monotone least squares by pool-adjacent-violators.

The block stack keeps, for every pooled block, its weight, sum and sum of
squares, so the squared error of the current fit is available after each
pushed element.  That is what makes the prefix scans linear.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

# Adjacent blocks whose levels agree to this absolute tolerance are pooled;
# the SSE is unchanged and the block structure becomes canonical.
MERGE_TOL = 1e-12


class Direction(enum.Enum):
    NONDECREASING = "nondecreasing"
    NONINCREASING = "nonincreasing"

    @property
    def sign(self):
        return 1.0 if self is Direction.NONDECREASING else -1.0

    @classmethod
    def parse(cls, value):
        """Accept a Direction, its value, or the shorthands ``up``/``down``."""
        if isinstance(value, cls):
            return value
        aliases = {"up": cls.NONDECREASING, "increasing": cls.NONDECREASING,
                   "down": cls.NONINCREASING, "decreasing": cls.NONINCREASING}
        key = str(value).strip().lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown direction {value!r}") from None


def as_sequence(y, name="y"):
    """Validate ``y`` as a nonempty finite 1-D float array."""
    arr = np.asarray(y, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise ValueError(f"{name} has a non-finite entry at position {bad}")
    return arr


@dataclass
class PavaBlockStack:
    """Pooled blocks of a monotone fit to the elements pushed so far.

    Values are stored shifted by the first pushed value and multiplied by
    the direction sign, so internally every fit is nondecreasing.  Block
    SSE uses ``sum_of_squares - sum**2 / weight``; the shift keeps the
    cancellation in that formula small for data far from zero.
    """

    direction: Direction = Direction.NONDECREASING
    starts: list = field(default_factory=list)
    weights: list = field(default_factory=list)
    sums: list = field(default_factory=list)
    sumsqs: list = field(default_factory=list)
    block_sse: list = field(default_factory=list)
    accumulated_sse: float = 0.0
    size: int = 0
    shift: float = 0.0

    def __post_init__(self):
        self.direction = Direction.parse(self.direction)
        self._sign = self.direction.sign

    def push(self, value, weight=1.0):
        if self.size == 0:
            self.shift = float(value)
        v = self._sign * (float(value) - self.shift)
        starts, weights, sums, sumsqs, bsse = (
            self.starts, self.weights, self.sums, self.sumsqs, self.block_sse)
        starts.append(self.size)
        weights.append(weight)
        sums.append(weight * v)
        sumsqs.append(weight * v * v)
        bsse.append(0.0)
        self.size += 1
        while len(sums) > 1 and sums[-2] / weights[-2] >= sums[-1] / weights[-1] - MERGE_TOL:
            w = weights.pop()
            s = sums.pop()
            q = sumsqs.pop()
            e = bsse.pop()
            starts.pop()
            weights[-1] += w
            sums[-1] += s
            sumsqs[-1] += q
            new = sumsqs[-1] - sums[-1] * sums[-1] / weights[-1]
            if new < 0.0:
                new = 0.0
            self.accumulated_sse += new - bsse[-1] - e
            bsse[-1] = new
        return self.accumulated_sse

    def levels(self):
        """Block levels in the caller's units and orientation."""
        return self._sign * (np.asarray(self.sums) / np.asarray(self.weights)) + self.shift

    def lengths(self):
        return np.diff(np.append(self.starts, self.size)).astype(int)

    def fitted(self):
        if self.size == 0:
            return np.empty(0)
        return np.repeat(self.levels(), self.lengths())


@dataclass
class IsotonicFit:
    fitted: np.ndarray
    sse: float
    direction: Direction


def pava(y, direction=Direction.NONDECREASING):
    """Euclidean projection of ``y`` onto the monotone cone in ``direction``.

    Runs in O(n).  Raises ``ValueError`` for empty or non-finite input.

    >>> pava([3.0, 1.0, 2.0]).fitted
    array([2., 2., 2.])
    """
    y = as_sequence(y)
    stack = PavaBlockStack(direction)
    for v in y.tolist():
        stack.push(v)
    fitted = stack.fitted()
    resid = y - fitted
    return IsotonicFit(fitted=fitted, sse=float(resid @ resid), direction=stack.direction)


def prefix_isotonic_sse(y, direction=Direction.NONDECREASING):
    """Errors of the best monotone fit to every prefix.

    Returns an array ``p`` of length ``n + 1`` with ``p[0] = 0`` and
    ``p[m]`` the minimal squared error of a monotone fit to ``y[:m]``.
    """
    y = as_sequence(y)
    stack = PavaBlockStack(direction)
    out = np.empty(y.size + 1)
    out[0] = 0.0
    push = stack.push
    for i, v in enumerate(y.tolist(), start=1):
        out[i] = push(v)
    return out


def suffix_antitonic_sse(y):
    """Errors of the best nonincreasing fit to every suffix.

    Returns ``s`` of length ``n + 1`` where ``s[k]`` is the minimal squared
    error of a nonincreasing fit to ``y[k:]`` (so ``s[n] = 0``).  A
    nonincreasing fit to a suffix is a nondecreasing fit to the reversed
    sequence, which is how it is computed.
    """
    y = as_sequence(y)
    return prefix_isotonic_sse(y[::-1], Direction.NONDECREASING)[::-1].copy()
