"""Monte Carlo risk experiments for the unimodal least squares estimator.

A study fixes a signal family, a noise law and a grid of sample sizes.
For every ``n`` the true sequence is generated once and ``replications``
noisy copies are fitted; replication ``r`` at size ``n`` draws its noise
from ``stream(seed, n, r)`` so results never depend on scheduling.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .isotonic import Direction, as_sequence, pava
from .rng import stream
from .unimodal import is_unimodal, smallest_mode, unimodal_lse


# -- signals -----------------------------------------------------------------

def _grid_points(n):
    return (np.arange(n) + 0.5) / n


def _boundaries(breakpoints, n):
    if all(isinstance(b, (int, np.integer)) and not isinstance(b, bool) for b in breakpoints):
        idx = [int(b) for b in breakpoints]
    else:
        idx = [int(round(float(b) * n)) for b in breakpoints]
    if any(b <= 0 or b >= n for b in idx) or any(a >= b for a, b in zip(idx[:-1], idx[1:])):
        raise ValueError(f"{len(idx) + 1} pieces do not fit into n={n} positions "
                         f"(boundaries {idx})")
    return idx


def _piecewise(levels, bounds, n):
    theta = np.empty(n)
    edges = [0] + list(bounds) + [n]
    for level, lo, hi in zip(levels, edges[:-1], edges[1:]):
        theta[lo:hi] = level
    return theta


@dataclass(frozen=True)
class PiecewiseConstantUnimodal:
    """Constant pieces with levels that rise and then fall.

    ``breakpoints`` are either integer start positions (0-based) of pieces
    2..k, or fractions in (0, 1) of the sequence length.
    """

    breakpoints: tuple
    levels: tuple

    def __post_init__(self):
        if len(self.levels) != len(self.breakpoints) + 1:
            raise ValueError("need exactly one more level than breakpoints")
        if not is_unimodal(self.levels):
            raise ValueError(f"levels {self.levels} are not unimodal")

    def values(self, n):
        return _piecewise(self.levels, _boundaries(self.breakpoints, n), n)


@dataclass(frozen=True)
class SmoothBump:
    """``sin(pi x)`` on cell midpoints, rescaled to range exactly ``V``.

    For ``n <= 2`` the midpoints are symmetric and the sequence is flat.
    """

    V: float = 1.0

    def __post_init__(self):
        if self.V < 0:
            raise ValueError("V must be nonnegative")

    def values(self, n):
        b = np.sin(np.pi * _grid_points(n))
        b = 0.5 * (b + b[::-1])  # exact mirror symmetry
        span = b.max() - b.min()
        if span <= 1e-12:
            return np.zeros(n)
        return self.V * (b - b.min()) / span


@dataclass(frozen=True)
class Indicator:
    """One on the cells whose midpoint lies in ``[lo, hi]``, zero elsewhere."""

    lo: float = 1.0 / 3.0
    hi: float = 2.0 / 3.0

    def __post_init__(self):
        if not 0 <= self.lo <= self.hi <= 1:
            raise ValueError("need 0 <= lo <= hi <= 1")

    def values(self, n):
        x = _grid_points(n)
        return ((x >= self.lo) & (x <= self.hi)).astype(float)


@dataclass(frozen=True)
class MonotoneStaircase:
    """``s`` nearly equal pieces climbing evenly from 0 to ``V``."""

    s: int
    V: float = 1.0

    def values(self, n):
        if not 1 <= self.s <= n:
            raise ValueError(f"{self.s} pieces do not fit into n={n} positions")
        bounds = [int(round(j * n / self.s)) for j in range(1, self.s)]
        levels = [self.V * j / (self.s - 1) if self.s > 1 else 0.0 for j in range(self.s)]
        return _piecewise(levels, bounds, n)


@dataclass(frozen=True)
class Constant:
    level: float = 0.0

    def values(self, n):
        return np.full(n, float(self.level))


@dataclass(frozen=True)
class Custom:
    data: tuple

    def values(self, n):
        if len(self.data) != n:
            raise ValueError(f"custom signal has length {len(self.data)}, not {n}")
        return np.array(self.data, dtype=float)


@dataclass
class Signal:
    theta: np.ndarray
    mode: int  # smallest valid mode, 1-based
    s1: int
    s2: int
    V: float


def generate_signal(spec, n):
    """Evaluate a signal spec at size ``n`` and record its piece counts.

    ``s1`` and ``s2`` are the numbers of distinct values before and after
    the smallest mode ``m*`` (positions ``1..m*`` and ``m*+1..n``).
    """
    if n < 1:
        raise ValueError("n must be positive")
    theta = as_sequence(spec.values(n), "signal")
    if not is_unimodal(theta):
        raise ValueError("signal is not unimodal")
    mode = smallest_mode(theta)
    s1 = len(np.unique(theta[:mode]))
    s2 = len(np.unique(theta[mode:]))
    return Signal(theta=theta, mode=mode, s1=s1, s2=s2,
                  V=float(theta.max() - theta.min()))


# -- noise -------------------------------------------------------------------

NOISE_KINDS = ("gaussian", "uniform_bounded", "rademacher")


@dataclass(frozen=True)
class NoiseSpec:
    """Mean-zero independent noise.

    ``gaussian`` has standard deviation ``sigma``; ``uniform_bounded`` is
    uniform on ``[-sigma, sigma]``; ``rademacher`` is ``+-sigma``.
    """

    kind: str = "gaussian"
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def draw(self, n, rng):
        if self.kind == "gaussian":
            return rng.normal(0.0, self.sigma, n)
        if self.kind == "uniform_bounded":
            return rng.uniform(-self.sigma, self.sigma, n)
        return self.sigma * (2.0 * rng.integers(0, 2, n) - 1.0)


def generate_noise(spec, n, rng):
    return spec.draw(n, rng)


# -- bounds ------------------------------------------------------------------

def thm1_scale(n, V, sigma):
    """Leading term of the worst-case bound without its constant: ``sigma^(4/3) (V+sigma)^(2/3) n^(-2/3)``."""
    return sigma ** (4 / 3) * (V + sigma) ** (2 / 3) * n ** (-2 / 3)


def thm1_rhs(n, V, sigma, alpha, C):
    """Worst-case high-probability bound on ``||theta_hat - theta*||^2 / n``.

    ``C sigma^(4/3) (V + sigma)^(2/3) n^(-2/3) + (C + 24 alpha) sigma^2 log(n) / n``;
    the constant ``C`` has no published value and is supplied by the caller.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if not (sigma > 0 and alpha > 0 and C >= 0):
        raise ValueError("need sigma > 0, alpha > 0, C >= 0")
    return C * thm1_scale(n, V, sigma) + (C + 24 * alpha) * sigma ** 2 * math.log(n) / n


def thm2_rhs(n, s1, s2, sigma, alpha):
    """Adaptive high-probability bound for a sequence with ``s1 + s2`` pieces."""
    s = s1 + s2
    if not 1 <= s <= n:
        raise ValueError(f"need 1 <= s1 + s2 <= n, got s1 + s2 = {s}, n = {n}")
    if not (sigma > 0 and alpha > 0):
        raise ValueError("need sigma > 0 and alpha > 0")
    return (12 * sigma ** 2 * (s / n) * math.log(math.e * n / s)
            + 48 * (alpha + 2) * sigma ** 2 * s * math.log(n) / n)


def segment_errors(x, k_max=None):
    """Smallest within-segment squared error for 1..k_max consecutive segments.

    ``x`` must be monotone: the segment cost then satisfies the quadrangle
    inequality and the optimal split points are monotone, which lets each
    layer of the dynamic program run by divide and conquer in
    O(n log n).  Returns an array ``e`` with ``e[k - 1]`` for ``k`` pieces.
    """
    return np.array([err for _, err in _segment_error_layers(x, k_max)])


def _segment_error_layers(x, k_max=None):
    x = as_sequence(x, "theta_star")
    n = x.size
    k_max = n if k_max is None else min(int(k_max), n)
    c = x - x.mean()
    S = np.concatenate([[0.0], np.cumsum(c)])
    Q = np.concatenate([[0.0], np.cumsum(c * c)])

    def costs(i, j):
        # cost of segment [i, j) for an array of starts i
        s = S[j] - S[i]
        q = Q[j] - Q[i]
        cost = q - s * s / (j - i)
        # anything within rounding of the segment's sum of squares is zero
        return np.where(cost > 16 * np.finfo(float).eps * q, cost, 0.0)

    prev = costs(np.zeros(n, dtype=int), np.arange(1, n + 1))  # prev[j-1]: cost of x[:j]
    yield 1, float(prev[-1])
    prev = np.concatenate([[np.inf], prev])  # index by prefix length
    for k in range(2, k_max + 1):
        cur = np.full(n + 1, np.inf)
        stack = [(k, n, k - 1, n - 1)]
        while stack:
            lo, hi, olo, ohi = stack.pop()
            if lo > hi:
                continue
            mid = (lo + hi) // 2
            starts = np.arange(olo, min(ohi, mid - 1) + 1)
            vals = prev[starts] + costs(starts, mid)
            best = int(np.argmin(vals))
            cur[mid] = vals[best]
            opt = int(starts[best])
            stack.append((lo, mid - 1, olo, opt))
            stack.append((mid + 1, hi, opt, ohi))
        prev = cur
        yield k, float(cur[n])


def oracle_rhs(theta_star, sigma):
    """Oracle-inequality value for a monotone sequence.

    ``min_k err(k)/n + sigma^2 (k/n) log(e n / k)`` where ``err(k)`` is the
    best ``k``-segment approximation error; for monotone input the segment
    means are themselves monotone, so this is the infimum over the cone.
    The scan over ``k`` stops once the penalty alone exceeds the best value.
    """
    x = as_sequence(theta_star, "theta_star")
    d = np.diff(x)
    if not (np.all(d >= 0) or np.all(d <= 0)):
        raise ValueError("oracle_rhs needs a monotone sequence")
    if not sigma >= 0:
        raise ValueError("sigma must be nonnegative")
    n = x.size
    best = math.inf
    for k, err in _segment_error_layers(x):
        penalty = sigma ** 2 * (k / n) * math.log(math.e * n / k)
        best = min(best, err / n + penalty)
        if penalty >= best or err == 0.0:
            break
    return best


def unimodal_oracle_rhs(theta_star, sigma):
    """Oracle value applied to each monotone half of a unimodal sequence.

    The halves are split at the smallest mode and combined with weights
    proportional to their lengths (the values are per-coordinate risks).
    """
    x = as_sequence(theta_star, "theta_star")
    m = smallest_mode(x)
    n = x.size
    total = m * oracle_rhs(x[:m], sigma)
    if m < n:
        total += (n - m) * oracle_rhs(x[m:], sigma)
    return total / n


# -- experiments -------------------------------------------------------------

@dataclass
class ExperimentConfig:
    n_grid: Sequence[int]
    replications: int
    seed: int
    signal: object
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    alpha: float = 1.0
    estimator: str = "unimodal"  # or "isotonic" (nondecreasing PAVA)
    oracle: bool = True

    def __post_init__(self):
        self.n_grid = [int(n) for n in self.n_grid]
        if not self.n_grid or any(n < 2 for n in self.n_grid):
            raise ValueError("n_grid needs sizes >= 2")
        if any(a >= b for a, b in zip(self.n_grid[:-1], self.n_grid[1:])):
            raise ValueError("n_grid must be increasing")
        if self.replications < 1:
            raise ValueError("replications must be positive")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.estimator not in ("unimodal", "isotonic"):
            raise ValueError(f"unknown estimator {self.estimator!r}")


@dataclass
class RiskRow:
    n: int
    mse_mean: float
    mse_std_err: float
    thm1_scale: float
    thm1_ratio: float  # mse_mean / thm1_scale
    thm2_rhs: float
    coverage_thm2: float
    oracle_rhs: Optional[float]
    s1: int
    s2: int
    V: float
    losses: np.ndarray = field(repr=False, default=None)


@dataclass
class RiskReport:
    config: ExperimentConfig
    rows: list

    @property
    def n(self):
        return np.array([r.n for r in self.rows])

    @property
    def mse_mean(self):
        return np.array([r.mse_mean for r in self.rows])


def _losses(config, n, reps):
    sig = generate_signal(config.signal, n)
    out = np.empty(len(reps))
    for j, r in enumerate(reps):
        z = config.noise.draw(n, stream(config.seed, n, r))
        y = sig.theta + z
        if config.estimator == "unimodal":
            fitted = unimodal_lse(y, per_mode=False).fitted
        else:
            fitted = pava(y, Direction.NONDECREASING).fitted
        d = fitted - sig.theta
        out[j] = d @ d / n
    return out


def _loss_task(args):
    config, n, lo, hi = args
    return _losses(config, n, range(lo, hi))


def run_experiment(config, workers=1, chunk=50):
    """Run the study and summarize the per-replication losses.

    ``workers > 1`` farms chunks of replications out to processes; the
    numbers are identical to a serial run.
    """
    tasks = [(config, n, lo, min(lo + chunk, config.replications))
             for n in config.n_grid for lo in range(0, config.replications, chunk)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_loss_task, tasks))
    else:
        parts = [_loss_task(t) for t in tasks]

    rows = []
    for n in config.n_grid:
        losses = np.concatenate([p for t, p in zip(tasks, parts) if t[1] == n])
        sig = generate_signal(config.signal, n)
        sigma = config.noise.sigma
        mean = float(losses.mean())
        err = float(losses.std(ddof=1) / math.sqrt(losses.size)) if losses.size > 1 else 0.0
        scale = thm1_scale(n, sig.V, sigma)
        bound2 = thm2_rhs(n, sig.s1, sig.s2, sigma, config.alpha)
        orc = None
        if config.oracle:
            orc = (unimodal_oracle_rhs(sig.theta, sigma) if config.estimator == "unimodal"
                   else oracle_rhs(sig.theta, sigma))
        rows.append(RiskRow(n=n, mse_mean=mean, mse_std_err=err, thm1_scale=scale,
                            thm1_ratio=mean / scale, thm2_rhs=bound2,
                            coverage_thm2=float(np.mean(losses <= bound2)),
                            oracle_rhs=orc, s1=sig.s1, s2=sig.s2, V=sig.V,
                            losses=losses))
    return RiskReport(config=config, rows=rows)


def scaling_slope(report_or_n, mse=None):
    """Least squares slope of ``log(mse)`` on ``log(n)`` and its standard error."""
    if mse is None:
        n, mse = report_or_n.n, report_or_n.mse_mean
    else:
        n = report_or_n
    n = np.asarray(n, dtype=float)
    mse = np.asarray(mse, dtype=float)
    if n.size < 3:
        raise ValueError("need at least three sample sizes")
    if np.any(mse <= 0) or np.any(n <= 0):
        raise ValueError("sizes and risks must be positive")
    fit = stats.linregress(np.log(n), np.log(mse))
    return float(fit.slope), float(fit.stderr)
