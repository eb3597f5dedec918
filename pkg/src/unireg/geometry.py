"""Numerical checks of the variational identities behind the risk bounds.

The central quantity is the localized supremum

    g(t) = sup { <z, theta - theta_star> : theta in C, ||theta - theta_star|| <= t }

for a closed convex set ``C`` (a mode cone, a monotone cone, or a union
of mode cones).  It is evaluated through the projection path
``mu -> P_C(theta_star + mu * z)``: the point on that path at distance
``t`` from ``theta_star`` maximizes the Lagrangian
``<z, theta - theta_star> - ||theta - theta_star||**2 / (2 mu)`` over ``C``
with the ball constraint active, so it attains the supremum.  The distance
along the path is continuous and nondecreasing in ``mu``, and a bracketed
root finder locates it.  Projected gradient ascent with Dykstra
projections is kept as an independent second route.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from .errors import ConvergenceError, InfeasibleError
from .isotonic import Direction, as_sequence, pava
from .rng import stream
from .unimodal import is_unimodal, mode_cone_projection, unimodal_lse


@dataclass(frozen=True)
class MonotoneCone:
    """Sequences monotone on positions ``start:stop`` (Python slice), free elsewhere."""

    direction: Direction = Direction.NONDECREASING
    start: int = 0
    stop: Optional[int] = None
    is_cone = True

    def project(self, x):
        x = np.array(x, dtype=float)
        seg = x[self.start:self.stop]
        if seg.size > 1:
            x[self.start:self.stop] = pava(seg, self.direction).fitted
        return x


@dataclass(frozen=True)
class ModeCone:
    """Sequences nondecreasing up to position ``m`` (1-based) and nonincreasing after."""

    m: int
    is_cone = True

    def project(self, x):
        return mode_cone_projection(x, self.m)


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float
    is_cone = False

    def __post_init__(self):
        if not self.radius >= 0:
            raise ValueError(f"radius must be nonnegative, got {self.radius}")
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))

    def project(self, x):
        x = np.asarray(x, dtype=float)
        d = x - self.center
        norm = math.sqrt(d @ d)
        if norm <= self.radius:
            return x.copy()
        return self.center + d * (self.radius / norm)


def distance(x, convex_set):
    return float(np.linalg.norm(x - convex_set.project(x)))


def dykstra_project(y, sets, tol=1e-10, max_iter=100_000):
    """Projection of ``y`` onto the intersection of ``sets`` by Dykstra's method.

    Each set must expose an exact ``project``.  Stops when a full sweep
    moves the iterate by less than ``tol`` and the iterate is within
    ``tol`` of every set.  Raises ``InfeasibleError`` when the iterates
    stall away from the intersection (the signature of an empty one) and
    ``ConvergenceError`` after ``max_iter`` sweeps.
    """
    y = as_sequence(y)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not sets:
        return y.copy()
    if len(sets) == 1:
        return sets[0].project(y)
    balls = [s for s in sets if isinstance(s, Ball)]
    if len(sets) == 2 and len(balls) == 1:
        ball = balls[0]
        other = sets[1] if sets[0] is ball else sets[0]
        if distance(ball.center, other) > ball.radius + tol:
            raise InfeasibleError("ball does not meet the other set")

    x = y.copy()
    corrections = [np.zeros_like(y) for _ in sets]
    gap = math.inf
    stalled = 0
    for _ in range(max_iter):
        prev = x
        for i, s in enumerate(sets):
            shifted = x + corrections[i]
            x = s.project(shifted)
            corrections[i] = shifted - x
        move = float(np.linalg.norm(x - prev))
        infeas = max(distance(x, s) for s in sets)
        gap = max(move, infeas)
        if gap < tol:
            return x
        if move < 1e-3 * tol and infeas > 100 * tol:
            stalled += 1
            if stalled >= 50:
                raise InfeasibleError(
                    f"iterates stalled at distance {infeas:.3g} from the sets")
        else:
            stalled = 0
    raise ConvergenceError(f"Dykstra did not converge in {max_iter} sweeps",
                           iterate=x, gap=gap)


def _region_sets(region, n):
    if isinstance(region, str):
        if region.upper() in ("U", "U_N", "UNIMODAL"):
            return [ModeCone(m) for m in range(1, n + 1)]
        raise ValueError(f"unknown region {region!r}")
    if isinstance(region, (int, np.integer)):
        if not 1 <= region <= n:
            raise ValueError(f"mode must lie in [1, {n}], got {region}")
        return [ModeCone(int(region))]
    if isinstance(region, (list, tuple)):
        return list(region)
    return [region]


def _slice_sup_dual(z, theta_star, t, cset):
    base = cset.project(theta_star)
    d = float(np.linalg.norm(base - theta_star))
    if t < d - 1e-12 * (1.0 + d):
        return -math.inf, None
    znorm = float(np.linalg.norm(z))
    if znorm == 0.0 or t <= d:
        return float(z @ (base - theta_star)), base

    def radius(mu):
        return float(np.linalg.norm(cset.project(theta_star + mu * z) - theta_star))

    lo, hi = 0.0, t / znorm
    for _ in range(200):
        if radius(hi) >= t:
            break
        lo, hi = hi, 2.0 * hi
    else:
        # the ball never binds: the linear objective is bounded on the set
        theta = cset.project(theta_star + hi * z)
        return float(z @ (theta - theta_star)), theta

    mu = optimize.brentq(lambda m: radius(m) - t, lo, hi,
                         xtol=1e-15 * hi, rtol=4 * np.finfo(float).eps, maxiter=200)
    theta = cset.project(theta_star + mu * z)
    r = float(np.linalg.norm(theta - theta_star))
    if r > t:
        # pull back toward the nearest point so the answer stays feasible
        lam = (t - d) / (r - d)
        theta = base + lam * (theta - base)
    return float(z @ (theta - theta_star)), theta


def _slice_sup_pga(z, theta_star, t, cset, max_iter, tol):
    base = cset.project(theta_star)
    d = float(np.linalg.norm(base - theta_star))
    if t < d - 1e-12 * (1.0 + d):
        return -math.inf, None
    if t <= d:
        return float(z @ (base - theta_star)), base
    ball = Ball(theta_star, t)
    step = t / (float(np.linalg.norm(z)) + 1e-12)
    theta = base
    best, best_theta = float(z @ (theta - theta_star)), theta
    for _ in range(max_iter):
        theta = dykstra_project(theta + step * z, [cset, ball], tol=tol)
        value = float(z @ (theta - theta_star))
        if value > best:
            best, best_theta = value, theta
    return best, best_theta


def localized_sup(z, theta_star, t, region="U", method="dual", max_iter=500,
                  tol=1e-10, return_argmax=False):
    """Supremum of ``<z, theta - theta_star>`` over ``region`` within distance ``t``.

    ``region`` is ``"U"`` (all unimodal sequences, the union of the mode
    cones), a 1-based mode ``m``, a convex set object, or a list of convex
    sets whose union is taken.  Slices farther than ``t`` from
    ``theta_star`` are skipped; if every slice is, the result is ``-inf``.

    ``method="dual"`` follows the projection path (see module docstring);
    ``method="pga"`` runs ``max_iter`` steps of projected gradient ascent
    with step ``t / ||z||`` and Dykstra projections onto slice and ball.
    Both return the objective at a feasible point, so a lower bound.
    """
    z = as_sequence(z, "z")
    theta_star = as_sequence(theta_star, "theta_star")
    if z.shape != theta_star.shape:
        raise ValueError("z and theta_star must have the same length")
    if not t >= 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    best, best_theta = -math.inf, None
    for cset in _region_sets(region, z.size):
        if method == "dual":
            value, theta = _slice_sup_dual(z, theta_star, t, cset)
        elif method == "pga":
            value, theta = _slice_sup_pga(z, theta_star, t, cset, max_iter, tol)
        else:
            raise ValueError(f"unknown method {method!r}")
        if value > best:
            best, best_theta = value, theta
    if return_argmax:
        return best, best_theta
    return best


def slicing_objective(z, theta_star, t, region="U"):
    """``localized_sup(z, theta_star, t) - t**2 / 2``."""
    return localized_sup(z, theta_star, t, region) - 0.5 * t * t


@dataclass
class SlicingReport:
    achieved_radius: float
    f_at_achieved: float
    max_f_on_grid: float
    grid: np.ndarray
    f_grid: np.ndarray
    identity_gap: float  # max(0, max_f_on_grid - f_at_achieved)
    signed_gap: float
    termination_radius: Optional[float]  # smallest grid t* with f < 0 from t* on
    termination_holds: bool
    spacing: float


def slicing_check(y, theta_star, grid=None, grid_points=200):
    """Check that the fitted distance maximizes the slicing objective.

    With ``z = y - theta_star`` and ``theta_hat`` the unimodal fit,
    ``f(t) = localized_sup(z, theta_star, t) - t**2/2`` should peak at
    ``t = ||theta_hat - theta_star||``.  ``f`` is evaluated on ``grid``
    (default: ``grid_points`` radii spanning ``[0, 2||z||]``) and at that
    radius.  The report also tests the termination property: if ``f < 0``
    on every grid radius from ``t*`` on, the fitted distance must be below
    ``t*`` plus one grid spacing.
    """
    y = as_sequence(y)
    theta_star = as_sequence(theta_star, "theta_star")
    if y.shape != theta_star.shape:
        raise ValueError("y and theta_star must have the same length")
    if not is_unimodal(theta_star):
        raise ValueError("theta_star must be unimodal")
    z = y - theta_star
    fit = unimodal_lse(y, per_mode=False)
    achieved = float(np.linalg.norm(fit.fitted - theta_star))
    if grid is None:
        upper = 2.0 * float(np.linalg.norm(z))
        grid = np.linspace(0.0, upper if upper > 0 else 1.0, grid_points)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0) or grid[0] < 0:
        raise ValueError("grid must be an increasing list of nonnegative radii")

    f_grid = np.array([slicing_objective(z, theta_star, t) for t in grid])
    f_hat = slicing_objective(z, theta_star, achieved)
    max_f = float(f_grid.max())
    spacing = float(np.max(np.diff(grid)))

    negative = f_grid < 0
    term = None
    # smallest index from which every grid value is negative
    tail = np.flatnonzero(~negative)
    first = 0 if tail.size == 0 else tail[-1] + 1
    if first < grid.size:
        term = float(grid[first])
    holds = term is None or achieved < term + spacing

    signed = max_f - f_hat
    return SlicingReport(achieved_radius=achieved, f_at_achieved=f_hat,
                         max_f_on_grid=max_f, grid=grid, f_grid=f_grid,
                         identity_gap=max(0.0, signed), signed_gap=signed,
                         termination_radius=term, termination_holds=holds,
                         spacing=spacing)


@dataclass
class StatDimEstimate:
    n: int
    estimate: float
    std_err: float
    bound: float  # log(e n)
    replications: int
    pointwise_max_error: float = float("nan")

    def __iter__(self):
        return iter((self.estimate, self.std_err))


def statistical_dimension_mc(n, replications, seed=0, pointwise=0):
    """Monte Carlo estimate of ``E||P_M z||**2`` for the nondecreasing cone.

    ``z`` is standard Gaussian in ``R^n``; replication ``i`` draws from
    ``stream(seed, n, i)``.  For the first ``pointwise`` draws the norm of
    the projection is compared with ``localized_sup(z, 0, 1, M)`` and the
    largest discrepancy is reported.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if replications < 2:
        raise ValueError("need at least two replications")
    cone = MonotoneCone(Direction.NONDECREASING)
    sq = np.empty(replications)
    worst = 0.0 if pointwise else float("nan")
    zero = np.zeros(n)
    for i in range(replications):
        z = stream(seed, n, i).standard_normal(n)
        proj = pava(z).fitted
        sq[i] = proj @ proj
        if i < pointwise:
            sup = localized_sup(z, zero, 1.0, cone)
            worst = max(worst, abs(math.sqrt(sq[i]) - sup))
    return StatDimEstimate(n=n, estimate=float(sq.mean()),
                           std_err=float(sq.std(ddof=1) / math.sqrt(replications)),
                           bound=math.log(math.e * n), replications=replications,
                           pointwise_max_error=worst)


def lipschitz_check(theta_star, t, region="U", pairs=200, seed=0):
    """Largest observed ``|f(z) - f(z')| / ||z - z'||`` for ``f = localized_sup``.

    Pairs are drawn as a Gaussian ``z`` and a perturbation of it with a
    log-uniform scale in ``[0.01, 1]``.  The ratio can never exceed ``t``.
    """
    theta_star = as_sequence(theta_star, "theta_star")
    if not t >= 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return 0.0
    n = theta_star.size
    worst = 0.0
    for i in range(pairs):
        rng = stream(seed, n, i)
        z = rng.standard_normal(n)
        dz = rng.standard_normal(n) * 10.0 ** rng.uniform(-2.0, 0.0)
        a = localized_sup(z, theta_star, t, region)
        b = localized_sup(z + dz, theta_star, t, region)
        worst = max(worst, abs(a - b) / float(np.linalg.norm(dz)))
    return worst


def concavity_check(z, theta_star, m, grid):
    """Largest midpoint shortfall of ``t -> localized_sup(z, theta_star, t, C_m)``.

    For each consecutive pair of radii the value at their midpoint is
    compared with the average of the endpoint values.  All radii must be
    at least the distance from ``theta_star`` to the mode-``m`` cone.
    """
    z = as_sequence(z, "z")
    theta_star = as_sequence(theta_star, "theta_star")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be increasing")
    d = distance(theta_star, ModeCone(m))
    if grid[0] < d - 1e-12 * (1.0 + d):
        raise ValueError(f"grid starts below the distance {d:.6g} to the cone")
    g = np.array([localized_sup(z, theta_star, t, m) for t in grid])
    mids = np.array([localized_sup(z, theta_star, t, m)
                     for t in 0.5 * (grid[:-1] + grid[1:])])
    shortfall = 0.5 * (g[:-1] + g[1:]) - mids
    return max(0.0, float(shortfall.max()))


def worst_case_width_form(t, n, V, sigma=1.0):
    """``sigma * (n**(1/4) sqrt(t (V + sigma)) + t sqrt(log n))``; the unknown constant is left out."""
    t = np.asarray(t, dtype=float)
    return sigma * (n ** 0.25 * np.sqrt(t * (V + sigma)) + t * math.sqrt(math.log(n)))


def adaptive_width_bound(t, n, s, sigma=1.0, alpha=1.0):
    """High-probability bound on the localized supremum around a monotone ``s``-piece sequence."""
    t = np.asarray(t, dtype=float)
    return (2 * t * sigma * math.sqrt(s * math.log(math.e * n / s))
            + 2 * t * sigma * math.sqrt(2 * s * (alpha + 2) * math.log(n)))


def count_pieces(theta):
    theta = np.asarray(theta, dtype=float)
    return 1 + int(np.count_nonzero(np.diff(theta) != 0))


@dataclass
class WidthEstimate:
    t_grid: np.ndarray
    mean_sup: np.ndarray
    std_err: np.ndarray
    bound_curve: np.ndarray
    replications: int
    seed: int
    bound_kind: str = "worst"
    ratio: np.ndarray = field(default=None)

    def __post_init__(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            self.ratio = np.where(self.bound_curve > 0,
                                  self.mean_sup / self.bound_curve, np.nan)


def width_curve(theta_star, t_grid, region="U", replications=100, seed=0,
                bound="worst", alpha=1.0):
    """Monte Carlo mean of the localized supremum over a grid of radii.

    Noise is standard Gaussian.  The same draws are used at every radius,
    so the mean curve inherits monotonicity in ``t``.  ``bound="worst"``
    attaches the worst-case functional form (unknown constant removed);
    ``bound="adaptive"`` attaches the explicit bound for a monotone
    piecewise-constant ``theta_star``.
    """
    theta_star = as_sequence(theta_star, "theta_star")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or np.any(np.diff(t_grid) <= 0) or np.any(t_grid < 0):
        raise ValueError("t_grid must be increasing and nonnegative")
    n = theta_star.size
    values = np.empty((replications, t_grid.size))
    for i in range(replications):
        z = stream(seed, n, i).standard_normal(n)
        values[i] = [localized_sup(z, theta_star, t, region) for t in t_grid]
    if bound == "worst":
        V = float(theta_star.max() - theta_star.min())
        curve = worst_case_width_form(t_grid, n, V)
    elif bound == "adaptive":
        curve = adaptive_width_bound(t_grid, n, count_pieces(theta_star), alpha=alpha)
    else:
        raise ValueError(f"unknown bound {bound!r}")
    err = values.std(axis=0, ddof=1) / math.sqrt(replications) if replications > 1 \
        else np.zeros(t_grid.size)
    return WidthEstimate(t_grid=t_grid, mean_sup=values.mean(axis=0), std_err=err,
                         bound_curve=np.asarray(curve, dtype=float),
                         replications=replications, seed=seed, bound_kind=bound)


@dataclass
class SubGaussianMaxCheck:
    n: int
    trials: int
    max_mean: float
    threshold: float
    exceed_fraction: float


def subgaussian_max_check(n=100, trials=400, seed=0, t=1.0):
    """Tail check for the maximum over mode cones of the localized supremum.

    With ``theta_star = 0`` the slice suprema are ``X_m = t ||P_{C_m} z||``,
    each ``t``-Lipschitz in Gaussian ``z`` and hence sub-Gaussian with
    scale ``a = t``.  The means ``E X_m`` come from a separate calibration
    sample of ``trials`` draws; the report gives the fraction of fresh
    draws in which ``max_m X_m`` exceeds
    ``max_m E X_m + a (sqrt(2 log n) + sqrt(2 pi))``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")

    def suprema(key):
        out = np.empty((trials, n))
        for i in range(trials):
            z = stream(seed, n, key, i).standard_normal(n)
            out[i] = [t * np.linalg.norm(mode_cone_projection(z, m))
                      for m in range(1, n + 1)]
        return out

    max_mean = float(suprema(0).mean(axis=0).max())
    threshold = max_mean + t * (math.sqrt(2 * math.log(n)) + math.sqrt(2 * math.pi))
    fresh = suprema(1).max(axis=1)
    return SubGaussianMaxCheck(n=n, trials=trials, max_mean=max_mean, threshold=threshold,
                               exceed_fraction=float(np.mean(fresh > threshold)))


def random_unimodal(n, rng):
    """A random unimodal sequence: sorted Gaussians rising, then falling."""
    v = rng.standard_normal(n)
    m = int(rng.integers(1, n + 1))
    return np.concatenate([np.sort(v[:m]), np.sort(v[m:])[::-1]])
