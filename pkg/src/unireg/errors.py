"""Exception types raised by the iterative solvers."""

import numpy as np


class ConvergenceError(RuntimeError):
    """An iterative routine ran out of iterations.

    The last iterate and the final gap are kept so callers can decide
    whether the partial answer is usable.
    """

    def __init__(self, message, iterate=None, gap=float("nan")):
        super().__init__(message)
        self.iterate = None if iterate is None else np.array(iterate, dtype=float)
        self.gap = float(gap)


class InfeasibleError(RuntimeError):
    """The intersection of the requested convex sets appears to be empty."""
