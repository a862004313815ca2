"""Uncertainty sets with exact support maximization and Euclidean projection.

Three polyhedral families are supported:

* :class:`BoxSet` ``[lower, upper]``
* :class:`BudgetedSet` ``{c in [cl, cl + d] : sum_j (c_j - cl_j) / d_j <= gamma}``
* :class:`ScenarioHullSet` ``conv{c_1, ..., c_S}``

``support_max`` evaluates the robust objective ``f(x) = max_{c in U} c'x``;
``project`` is the oracle behind the gradient of the smoothed objective.
"""

from __future__ import annotations

import abc
import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import as_point

__all__ = [
    "BoxSet",
    "BudgetedSet",
    "ProjectionError",
    "ScenarioHullSet",
    "UncertaintySet",
    "constants",
    "project",
    "support_max",
]

DEFAULT_PROJECTION_TOL = 1e-9
SIMPLEX_MAX_ITERS = 100_000
POLISH_EVERY = 25


class ProjectionError(RuntimeError):
    """Internal failure of a projection routine (invariant violation)."""


class UncertaintySet(abc.ABC):
    dimension: int

    @abc.abstractmethod
    def support_max(self, x):
        """Return ``(value, maximizer)`` of ``max_{c in U} c'x``."""

    @abc.abstractmethod
    def project(self, z, tol: float = DEFAULT_PROJECTION_TOL):
        """Euclidean projection of ``z`` onto the set."""

    @abc.abstractmethod
    def constants(self) -> tuple:
        """Return ``(M, M_max)``: diameter bound and max-norm bound."""

    @abc.abstractmethod
    def center(self) -> np.ndarray:
        """A central member used as the smoothing anchor."""

    @abc.abstractmethod
    def contains(self, c, tol: float = 1e-9) -> bool:
        ...

    @abc.abstractmethod
    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Random members of the set, shape ``(size, n)``."""

    def _check_x(self, x, name="x"):
        return as_point(x, self.dimension, name)


# --------------------------------------------------------------------------- box


@dataclass(frozen=True, eq=False)
class BoxSet(UncertaintySet):
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = as_point(self.lower, name="lower")
        upper = as_point(self.upper, len(lower), name="upper")
        if np.any(lower > upper):
            raise ValueError("box requires lower <= upper elementwise")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    def support_max(self, x):
        x = self._check_x(x)
        c = np.where(x > 0, self.upper, self.lower)
        return float(c @ x), c

    def project(self, z, tol=DEFAULT_PROJECTION_TOL):
        z = self._check_x(z, "z")
        return np.clip(z, self.lower, self.upper)

    def constants(self):
        M = float(np.linalg.norm(self.upper - self.lower))
        M_max = float(np.sqrt(np.sum(np.maximum(self.lower**2, self.upper**2))))
        return M, M_max

    def center(self):
        return 0.5 * (self.lower + self.upper)

    def contains(self, c, tol=1e-9):
        c = np.asarray(c, dtype=float)
        return bool(np.all(c >= self.lower - tol) and np.all(c <= self.upper + tol))

    def sample(self, rng, size):
        u = rng.random((size, self.dimension))
        return self.lower + u * (self.upper - self.lower)


# ---------------------------------------------------------------------- budgeted


@dataclass(frozen=True, eq=False)
class BudgetedSet(UncertaintySet):
    """Budgeted uncertainty around nominal costs ``c_lower`` with deviations ``d``.

    ``gamma`` may be fractional; ``d`` must be strictly positive (coordinates
    without uncertainty belong in the nominal costs of a different model).
    """

    c_lower: np.ndarray
    d: np.ndarray
    gamma: float

    def __post_init__(self):
        cl = as_point(self.c_lower, name="c_lower")
        d = as_point(self.d, len(cl), name="d")
        if np.any(d <= 0):
            raise ValueError("budgeted set requires d_j > 0 for every coordinate")
        gamma = float(self.gamma)
        if not 0 <= gamma <= len(cl):
            raise ValueError(f"gamma must lie in [0, n], got {gamma}")
        object.__setattr__(self, "c_lower", cl)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "gamma", gamma)

    @property
    def dimension(self) -> int:
        return len(self.c_lower)

    def theta_of(self, c):
        return (np.asarray(c, dtype=float) - self.c_lower) / self.d

    def support_max(self, x):
        x = self._check_x(x)
        theta = greedy_budget(self.d * x, self.gamma)
        c = self.c_lower + self.d * theta
        return float(c @ x), c

    def project(self, z, tol=DEFAULT_PROJECTION_TOL):
        z = self._check_x(z, "z")
        w = (z - self.c_lower) / self.d
        theta = knapsack_projection(w, self.d**2, self.gamma)
        return self.c_lower + self.d * theta

    def constants(self):
        return budgeted_diameter(self.d, self.gamma), budgeted_max_norm(
            self.c_lower, self.d, self.gamma
        )

    def center(self):
        n = self.dimension
        theta = np.full(n, min(self.gamma / n, 1.0))
        return self.project(self.c_lower + self.d * theta)

    def contains(self, c, tol=1e-9):
        theta = self.theta_of(c)
        scale = tol / np.maximum(self.d, 1e-300)
        return bool(
            np.all(theta >= -scale)
            and np.all(theta <= 1 + scale)
            and theta.sum() <= self.gamma + tol * max(1.0, self.gamma)
        )

    def sample(self, rng, size):
        n = self.dimension
        out = np.empty((size, n))
        for k in range(size):
            theta = rng.random(n) * rng.random()
            s = theta.sum()
            if s > self.gamma:
                theta *= self.gamma / s
            out[k] = self.c_lower + self.d * theta
        return out


def greedy_budget(weights: np.ndarray, gamma: float) -> np.ndarray:
    """Maximize ``weights @ theta`` over ``theta in [0,1]^n, sum(theta) <= gamma``.

    Largest positive weights are filled first, the last one fractionally.
    Ties keep coordinate order (stable sort).
    """
    theta = np.zeros(len(weights))
    order = np.argsort(-weights, kind="stable")
    remaining = gamma
    for j in order:
        if weights[j] <= 0 or remaining <= 0:
            break
        take = min(1.0, remaining)
        theta[j] = take
        remaining -= take
    return theta


def knapsack_projection(w: np.ndarray, q: np.ndarray, gamma: float) -> np.ndarray:
    """Solve ``min sum_j q_j (theta_j - w_j)^2`` s.t. ``0 <= theta <= 1``, ``sum theta <= gamma``.

    Two-pegging breakpoint method on the budget multiplier ``lam``: for a fixed
    ``lam`` the minimizer is ``clip(w - lam / (2 q), 0, 1)``.  Each coordinate is
    pegged at 1 below its upper breakpoint ``2 q (w - 1)``, pegged at 0 above its
    lower breakpoint ``2 q w`` and free in between.  The breakpoints are sorted
    once and swept in increasing order until the budget sum crosses ``gamma``.
    """
    w = np.asarray(w, dtype=float)
    q = np.asarray(q, dtype=float)
    theta0 = np.clip(w, 0.0, 1.0)
    if theta0.sum() <= gamma:
        return theta0

    n = len(w)
    hi_bp = 2.0 * q * (w - 1.0)  # leaves the peg at 1
    lo_bp = 2.0 * q * w  # joins the peg at 0
    slope = 1.0 / (2.0 * q)

    values = np.concatenate([hi_bp, lo_bp])
    coords = np.concatenate([np.arange(n), np.arange(n)])
    kinds = np.concatenate([np.zeros(n, int), np.ones(n, int)])
    order = np.lexsort((kinds, coords, values))
    values, coords, kinds = values[order], coords[order], kinds[order]

    # Starting left of every breakpoint all coordinates sit at 1.  After the
    # k-th event the sum is A_k - lam * B_k on the next interval.
    w_e, slope_e = w[coords], slope[coords]
    dA = np.where(kinds == 0, w_e - 1.0, -w_e)
    dB = np.where(kinds == 0, slope_e, -slope_e)
    A = n + np.cumsum(dA)
    B = np.cumsum(dB)
    # value of the budget sum at each breakpoint (continuous across it)
    s_at = A - values * B
    # s_at is exact in theory; allow rounding noise so gamma = 0 still brackets
    slack = 1e-12 * (n + abs(gamma))
    hits = np.flatnonzero((values > 0) & (s_at <= gamma + slack))
    if len(hits) == 0:
        if gamma < 0 or len(values) == 0:
            raise ProjectionError("budget multiplier search failed to bracket the root")
        hits = [len(values) - 1]
    k = hits[0]
    before = values[:k][values[:k] > 0]
    lam_lo = before[-1] if len(before) else 0.0
    return _solve_interval(w, slope, hi_bp, lo_bp, lam_lo, values[k], gamma)


def _solve_interval(w, slope, hi_bp, lo_bp, lam_lo, lam_hi, gamma):
    # Inside (lam_lo, lam_hi) each coordinate keeps one status; s(lam) is affine.
    at_one = hi_bp >= lam_hi
    free = (hi_bp <= lam_lo) & (lo_bp >= lam_hi)
    A = at_one.sum() + w[free].sum()
    B = slope[free].sum()
    if B > 0:
        lam = (A - gamma) / B
        lam = min(max(lam, lam_lo), lam_hi)
    else:
        lam = lam_lo
    return np.clip(w - lam * slope, 0.0, 1.0)


def budgeted_diameter(d: np.ndarray, gamma: float) -> float:
    """Exact diameter of the budgeted set.

    The maximum of ``||d * (theta - theta')||`` is attained at a pair of
    vertices with disjoint supports.  Each vertex carries ``floor(gamma)`` unit
    entries and at most one entry equal to the fractional part, so the optimum
    assigns the weights ``1`` (``2 floor(gamma)`` times) and ``frac^2`` (twice)
    to the largest ``d_j^2``.
    """
    d2 = np.sort(np.asarray(d, dtype=float) ** 2)[::-1]
    k = int(math.floor(gamma + 1e-12))
    frac = max(gamma - k, 0.0)
    weights = np.array([1.0] * (2 * k) + [frac**2] * 2)[: len(d2)]
    weights = np.concatenate([weights, np.zeros(len(d2) - len(weights))])
    return float(np.sqrt(np.dot(weights, d2)))


def budgeted_max_norm(c_lower: np.ndarray, d: np.ndarray, gamma: float) -> float:
    """Exact ``max ||c||`` over the budgeted set (convex maximization over vertices)."""
    n = len(d)
    k = min(int(math.floor(gamma + 1e-12)), n)
    frac = max(gamma - k, 0.0) if k < n else 0.0
    base = float(np.sum(c_lower**2))
    gain_full = (c_lower + d) ** 2 - c_lower**2
    gain_frac = (c_lower + frac * d) ** 2 - c_lower**2

    def best_full(excluded=None):
        g = gain_full.copy()
        if excluded is not None:
            g[excluded] = -np.inf
        g = np.sort(g)[::-1][:k]
        return float(np.sum(g[g > 0]))

    best = best_full()
    if frac > 0:
        for j in range(n):
            if gain_frac[j] > 0:
                best = max(best, gain_frac[j] + best_full(j))
    return float(np.sqrt(base + best))


# ----------------------------------------------------------------- scenario hull


@dataclass(frozen=True, eq=False)
class ScenarioHullSet(UncertaintySet):
    scenarios: np.ndarray
    # Gram matrix cache, built once
    _gram: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        C = np.asarray(self.scenarios, dtype=float)
        if C.ndim == 1:
            C = C.reshape(1, -1)
        if C.ndim != 2 or C.shape[0] < 1 or C.shape[1] < 1:
            raise ValueError("scenarios must be a nonempty list of equal-length vectors")
        if not np.all(np.isfinite(C)):
            raise ValueError("scenarios contain non-finite entries")
        object.__setattr__(self, "scenarios", C)
        object.__setattr__(self, "_gram", C @ C.T)

    @property
    def dimension(self) -> int:
        return self.scenarios.shape[1]

    @property
    def num_scenarios(self) -> int:
        return self.scenarios.shape[0]

    def support_max(self, x):
        x = self._check_x(x)
        vals = self.scenarios @ x
        s = int(np.argmax(vals))
        return float(vals[s]), self.scenarios[s].copy()

    def project(self, z, tol=DEFAULT_PROJECTION_TOL):
        z = self._check_x(z, "z")
        lam, _ = simplex_projection_weights(self.scenarios, z, tol)
        return lam @ self.scenarios

    def constants(self):
        C = self.scenarios
        sq = np.sum(C**2, axis=1)
        dist2 = sq[:, None] + sq[None, :] - 2 * self._gram
        M = float(np.sqrt(max(dist2.max(), 0.0)))
        M_max = float(np.sqrt(sq.max()))
        return M, M_max

    def center(self):
        return self.scenarios.mean(axis=0)

    def contains(self, c, tol=1e-9):
        p = self.project(np.asarray(c, dtype=float), tol=min(tol, 1e-9))
        return bool(np.linalg.norm(p - c) <= tol * (1 + np.linalg.norm(c)) + 1e-9)

    def sample(self, rng, size):
        lam = rng.dirichlet(np.ones(self.num_scenarios) * 0.7, size=size)
        return lam @ self.scenarios


def simplex_projection_weights(C, z, tol=DEFAULT_PROJECTION_TOL, max_iters=SIMPLEX_MAX_ITERS):
    """Weights ``lam`` in the simplex minimizing ``||lam @ C - z||^2``.

    Away-step conditional gradient with exact line search.  Every few
    iterations the current support seeds an exact active-set finish (Wolfe's
    minimum-norm-point steps), which also certifies optimality when the gap is
    below rounding noise.  Returns ``(lam, gap)`` with ``gap`` the final
    Frank-Wolfe duality gap (an upper bound on the squared distance error).
    """
    S = C.shape[0]
    lam = np.zeros(S)
    lam[int(np.argmin(((C - z) ** 2).sum(axis=1)))] = 1.0
    if S == 1:
        return lam, 0.0

    target = tol * tol
    P = C - z  # the projection is the min-norm point of conv(P), shifted back

    gap = math.inf
    for it in range(max_iters):
        grad, gap = _fw_gap(P, lam)
        if gap <= target:
            break
        if it % POLISH_EVERY == 2:
            refined, certified = _min_norm_active_set(P, lam)
            rgap = _fw_gap(P, refined)[1]
            if certified or rgap <= target:
                return refined, rgap
        inner = grad @ lam
        s = int(np.argmin(grad))
        support = np.flatnonzero(lam > 0)
        a = int(support[np.argmax(grad[support])])
        if inner - grad[s] >= grad[a] - inner:
            direction = -lam.copy()
            direction[s] += 1.0
            step_max = 1.0
        else:
            direction = lam.copy()
            direction[a] -= 1.0
            step_max = lam[a] / (1.0 - lam[a]) if lam[a] < 1 else math.inf
        move = direction @ P
        curvature = 2.0 * (move @ move)
        slope = grad @ direction
        step = step_max if curvature <= 0 else min(-slope / curvature, step_max)
        if step <= 0:
            break
        lam = lam + step * direction
        lam[lam < 1e-15] = 0.0
        lam /= lam.sum()

    if gap > target:
        refined, certified = _min_norm_active_set(P, lam)
        rgap = _fw_gap(P, refined)[1]
        if certified or rgap < gap:
            lam, gap = refined, (0.0 if certified else rgap)
    if gap > target:
        warnings.warn(
            f"scenario-hull projection stopped at gap {gap:.3e} (target {target:.3e})",
            RuntimeWarning,
            stacklevel=3,
        )
    return lam, float(gap)


def _fw_gap(P, lam):
    # with r = lam @ P, gradient 2 P r and gap 2 (r - P_s)'r
    r = lam @ P
    grad = 2.0 * (P @ r)
    s = int(np.argmin(grad))
    return grad, max(2.0 * float((r - P[s]) @ r), 0.0)


def _affine_min_norm(Ps):
    # affine weights (summing to 1) of the min-norm point of aff(Ps)
    base = Ps[0]
    D = (Ps[1:] - base).T
    coef, *_ = np.linalg.lstsq(D, -base, rcond=None)
    return np.concatenate([[1.0 - coef.sum()], coef])


def _min_norm_active_set(P, lam, max_major=None):
    """Wolfe's minimum-norm-point iterations started from the support of ``lam``.

    Returns ``(weights, certified)``.  ``certified`` means the point can no
    longer be improved: either the most violating point is already in the
    corral or adding it fails to decrease the norm.
    """
    S = len(P)
    max_major = max_major or 4 * S + 20
    support = list(np.flatnonzero(lam > 0))
    w = lam[support]
    best = None
    for _ in range(max_major):
        # minor cycle: move to the affine min-norm point, clipping at the simplex
        for _ in range(S + 1):
            alpha = np.ones(1) if len(support) == 1 else _affine_min_norm(P[support])
            if np.all(alpha > 0):
                w = alpha
                break
            neg = alpha <= 0
            theta = np.min(w[neg] / (w[neg] - alpha[neg]))
            w = w + theta * (alpha - w)
            keep = w > 1e-15
            support = [j for j, k in zip(support, keep) if k]
            w = w[keep] / w[keep].sum()
        x = w @ P[support]
        norm2 = float(x @ x)
        if best is not None and norm2 >= best[0] * (1 - 1e-12):
            # no progress; keep the better corral
            if norm2 > best[0]:
                support, w = best[1], best[2]
            break
        best = (norm2, list(support), w.copy())
        scores = P @ x
        j = int(np.argmin(scores))
        if j in support:
            break
        support.append(j)
        w = np.append(w, 0.0)
    else:
        out = np.zeros(S)
        out[support] = w
        return out / out.sum(), False
    out = np.zeros(S)
    out[support] = w
    return out / out.sum(), True


def enumerate_budget_vertices(n: int, gamma: float):
    """Vertices of ``{theta in [0,1]^n : sum theta <= gamma}`` (small n only)."""
    k = int(math.floor(gamma + 1e-12))
    frac = gamma - k
    out = []
    for pattern in itertools.product((0.0, 1.0), repeat=n):
        s = sum(pattern)
        if s <= k:
            out.append(pattern)
    if frac > 1e-12:
        for pattern in itertools.product((0.0, 1.0), repeat=n):
            if sum(pattern) == k:
                for j in range(n):
                    if pattern[j] == 0.0:
                        p = list(pattern)
                        p[j] = frac
                        out.append(tuple(p))
    return np.array(out, dtype=float)


# -------------------------------------------------------------- module-level API


def support_max(uset: UncertaintySet, x):
    """``(max_{c in U} c'x, maximizer)``."""
    return uset.support_max(x)


def project(uset: UncertaintySet, z, tol: float = DEFAULT_PROJECTION_TOL):
    """Euclidean projection of ``z`` onto ``uset``."""
    if not tol > 0:
        raise ValueError("tol must be > 0")
    return uset.project(z, tol)


def constants(uset: UncertaintySet):
    """``(M, M_max)`` for the set."""
    return uset.constants()
