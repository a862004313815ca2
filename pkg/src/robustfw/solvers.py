"""Solution methods for ``min_{x in X} max_{c in U} c'x``.

* :func:`solve_fw` -- Frank-Wolfe on the smoothed objective with fixed ``mu``
* :func:`solve_afw` -- the same loop with ``mu_t`` decreasing like ``1/sqrt(t+1)``
* :func:`solve_fw_convhull` -- fixed smoothing plus periodic exact minimization
  over the hull of collected vertices, yielding dual bounds
* :func:`solve_consgen` -- constraint generation on the dual ``max_c min_x``

All methods touch ``X`` only through ``instance.lmo``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    Method,
    ProblemInstance,
    SolverConfig,
    SolverTrace,
    Termination,
    as_point,
    default_mu,
    iteration_bound,
)
from .lp import convhull_minmax, epigraph_lp
from .smoothing import (
    AdaptiveSchedule,
    FixedSchedule,
    SmoothedObjective,
    eval_f,
    eval_f_mu,
    mu_at,
)

__all__ = [
    "ActiveVertexSet",
    "RunResult",
    "solve",
    "solve_afw",
    "solve_consgen",
    "solve_fw",
    "solve_fw_convhull",
]

logger = logging.getLogger(__name__)


class ActiveVertexSet:
    """Distinct LMO outputs in insertion order.

    0/1 vertices are deduplicated by exact pattern, others by distance <= 1e-12.
    """

    def __init__(self, dimension: int):
        self.dimension = dimension
        self._vertices: list = []
        self._keys: dict = {}
        self.weights: Optional[np.ndarray] = None

    def _key(self, v):
        if np.all((v == 0) | (v == 1)):
            return np.packbits(v.astype(bool)).tobytes()
        return None

    def index(self, v) -> int:
        """Position of ``v`` in the set, or -1."""
        key = self._key(v)
        if key is not None:
            return self._keys.get(key, -1)
        for i, w in enumerate(self._vertices):
            if np.linalg.norm(w - v) <= 1e-12:
                return i
        return -1

    def add(self, v) -> bool:
        v = as_point(v, self.dimension, "vertex")
        if self.index(v) >= 0:
            return False
        key = self._key(v)
        if key is not None:
            self._keys[key] = len(self._vertices)
        self._vertices.append(v.copy())
        self.weights = None
        return True

    def __contains__(self, v):
        return self.index(np.asarray(v, dtype=float)) >= 0

    def __len__(self):
        return len(self._vertices)

    def __iter__(self):
        return iter(self._vertices)

    def as_array(self) -> np.ndarray:
        return np.array(self._vertices)

    def set_weights(self, weights):
        w = np.asarray(weights, dtype=float)
        if len(w) != len(self) or np.any(w < -1e-12) or abs(w.sum() - 1) > 1e-12 * max(1, len(w)):
            raise ValueError("weights must be a convex combination over the vertices")
        self.weights = np.clip(w, 0, None)


@dataclass
class RunResult:
    x_best: np.ndarray
    f_best: float
    dual_bound: Optional[float]
    trace: SolverTrace
    termination: Termination
    method: Method
    iterations: int = 0
    lmo_calls: int = 0
    vertices: Optional[ActiveVertexSet] = field(default=None, repr=False)


class _Counter:
    """LMO wrapper counting calls and spot-checking the diameter bound."""

    def __init__(self, instance: ProblemInstance):
        self.instance = instance
        self.calls = 0
        self.anchor = None
        self._warned = False

    def __call__(self, cost):
        self.calls += 1
        v = as_point(self.instance.lmo(np.asarray(cost, dtype=float)),
                     self.instance.dimension, "LMO output")
        if self.anchor is None:
            self.anchor = v
        elif not self._warned:
            D = self.instance.diameter_x
            if np.linalg.norm(v - self.anchor) > D * (1 + 1e-9) + 1e-9:
                self._warned = True
                warnings.warn(
                    f"instance {self.instance.name!r}: LMO outputs farther apart "
                    f"than diameter_x={D:g}",
                    RuntimeWarning,
                    stacklevel=3,
                )
        return v


def _degenerate_result(instance, config, method, lmo) -> RunResult:
    # U is a single point: the robust problem is the deterministic one
    uset = instance.uncertainty
    c = uset.center()
    x = lmo(c)
    f = eval_f(uset, x)
    trace = SolverTrace()
    exact = method in (Method.FW_CONVHULL, Method.CONSGEN)
    trace.append(0, f, lmo.calls, f_mu_value=None, dual_bound=f if exact else None)
    vs = ActiveVertexSet(instance.dimension)
    vs.add(x)
    return RunResult(x, f, f if exact else None, trace,
                     Termination.GAP_CLOSED if exact else Termination.EPSILON_REACHED,
                     method, 0, lmo.calls, vs)


def _fw_loop(instance: ProblemInstance, config: SolverConfig, schedule,
             iteration_target: Optional[int], method: Method,
             convhull: bool = False) -> RunResult:
    uset = instance.uncertainty
    tol = config.projection_tolerance
    eps = config.epsilon
    lmo = _Counter(instance)
    c0 = uset.center()
    obj = SmoothedObjective(uset, c0, mu_at(schedule, 0), tol)
    vertices = ActiveVertexSet(instance.dimension)

    x = lmo(c0)
    vertices.add(x)
    trace = SolverTrace()
    x_best, f_best = x.copy(), math.inf
    dual: Optional[float] = None
    closed = False
    t = 0
    while True:
        mu = mu_at(schedule, t)
        f_mu, grad = eval_f_mu(obj, x, mu)
        f = eval_f(uset, x)
        if f < f_best:
            x_best, f_best = x.copy(), f
        trace.append(t, f, lmo.calls, f_mu_value=f_mu, dual_bound=dual, f_best=f_best)
        if closed:
            termination = Termination.GAP_CLOSED
            break
        if iteration_target is not None and t >= iteration_target:
            termination = Termination.EPSILON_REACHED
            break
        if t >= config.max_iters:
            termination = Termination.ITER_BUDGET
            break
        if lmo.calls >= config.max_lmo_calls:
            termination = Termination.LMO_BUDGET
            break

        v = lmo(grad)
        vertices.add(v)
        t += 1
        step = 2.0 / (t + 1)
        x = x + step * (v - x)

        if convhull and t % config.conv_hull_period == 0 and lmo.calls < config.max_lmo_calls:
            hull = convhull_minmax(vertices, uset, config.lp_tolerance)
            v_conv = lmo(hull.c_star)
            vertices.add(v_conv)
            gap = float(hull.c_star @ (hull.x_conv - v_conv))
            bound = hull.value - gap
            dual = bound if dual is None else max(dual, bound)
            if hull.value < f_best:
                x_best, f_best = hull.x_conv.copy(), hull.value
            closed = gap <= eps or f_best - dual <= eps
            logger.debug("iter %d hull value %.6g gap %.3g", t, hull.value, gap)

    return RunResult(x_best, f_best, dual, trace, termination, method, t, lmo.calls, vertices)


def _check_method(config: SolverConfig, expected: Method):
    if config.method is not expected:
        raise ValueError(f"config.method is {config.method.value}, expected {expected.value}")


def solve_fw(instance: ProblemInstance, config: SolverConfig) -> RunResult:
    """Smoothed Frank-Wolfe with fixed ``mu`` (default ``eps / M^2``).

    Starts from ``x0 = LMO(c0)`` and uses the step ``2 / (t + 1)``.  With the
    default ``mu`` the run stops after ``ceil(4 D^2 M^2 / eps^2)`` iterations,
    which guarantees an ``eps``-optimal last iterate; the best iterate by true
    robust value is returned.
    """
    _check_method(config, Method.FW)
    return _fixed_smoothing(instance, config, Method.FW, convhull=False)


def solve_fw_convhull(instance: ProblemInstance, config: SolverConfig) -> RunResult:
    """:func:`solve_fw` plus an exact hull subproblem every ``conv_hull_period`` steps.

    At the hull minimizer ``x_conv`` with maximizing scenario ``c_conv`` the
    quantity ``c_conv @ (x_conv - LMO(c_conv))`` bounds the suboptimality, so
    ``value - gap`` is a valid lower bound on the optimum.
    """
    _check_method(config, Method.FW_CONVHULL)
    return _fixed_smoothing(instance, config, Method.FW_CONVHULL, convhull=True)


def _fixed_smoothing(instance, config, method, convhull):
    consts = instance.constants()
    if consts.M == 0:
        return _degenerate_result(instance, config, method, _Counter(instance))
    if config.mu_override is not None:
        mu, target = config.mu_override, None
    else:
        mu = default_mu(config.epsilon, consts.M)
        target = iteration_bound(config.epsilon, consts.D, consts.M) if consts.D > 0 else 0
    return _fw_loop(instance, config, FixedSchedule(mu), target, method, convhull)


def solve_afw(instance: ProblemInstance, config: SolverConfig) -> RunResult:
    """Frank-Wolfe with ``mu_t = 2 D / (M_max sqrt(t + 1))`` recomputed every step.

    Runs until ``D M_max / (2 sqrt(T)) <= eps`` or a budget is exhausted.
    """
    _check_method(config, Method.AFW)
    consts = instance.constants()
    if consts.M == 0:
        return _degenerate_result(instance, config, Method.AFW, _Counter(instance))
    if consts.D == 0:
        target = 0
        schedule = FixedSchedule(1.0)
    else:
        target = max(1, math.ceil((consts.D * consts.M_max / (2 * config.epsilon)) ** 2))
        schedule = AdaptiveSchedule(consts.D, consts.M_max)
    return _fw_loop(instance, config, schedule, target, Method.AFW)


def solve_consgen(instance: ProblemInstance, config: SolverConfig) -> RunResult:
    """Constraint generation on ``max_{c in U} min_{x in X'} c'x``.

    Each round solves the epigraph LP over the current vertex subset ``X'``
    and queries the LMO at the optimal scenario ``c*``; ``c* @ LMO(c*)`` is a
    valid lower bound on the optimum.  The cut-row duals give the convex
    weights of the current primal point, so its true robust value is logged
    every round.  The loop stops once the new vertex no longer cuts off
    ``c*`` by more than ``eps / 100``.
    """
    _check_method(config, Method.CONSGEN)
    uset = instance.uncertainty
    lmo = _Counter(instance)
    if instance.constants().M == 0:
        return _degenerate_result(instance, config, Method.CONSGEN, lmo)
    eps = config.epsilon
    vertices = ActiveVertexSet(instance.dimension)
    x0 = lmo(uset.center())
    vertices.add(x0)
    trace = SolverTrace()
    f_best = eval_f(uset, x0)
    x_best = x0.copy()
    trace.append(0, f_best, lmo.calls, dual_bound=None, f_best=f_best)
    dual: Optional[float] = None
    rounds = 0
    termination = None
    while True:
        if rounds >= config.max_iters or len(vertices) >= config.max_cut_rows:
            termination = Termination.ITER_BUDGET
            break
        if lmo.calls >= config.max_lmo_calls:
            termination = Termination.LMO_BUDGET
            break
        rounds += 1
        ep = epigraph_lp(vertices, uset, config.lp_tolerance)
        x_cur = ep.weights @ vertices.as_array()
        f_cur = eval_f(uset, x_cur)
        if f_cur < f_best:
            x_best, f_best = x_cur, f_cur
        x_new = lmo(ep.c_star)
        lower = float(ep.c_star @ x_new)
        dual = lower if dual is None else max(dual, lower)
        trace.append(rounds, f_cur, lmo.calls, dual_bound=dual, f_best=f_best)
        if lower >= ep.tau_star - 1e-2 * eps or x_new in vertices:
            termination = Termination.GAP_CLOSED
            break
        vertices.add(x_new)

    hull = convhull_minmax(vertices, uset, config.lp_tolerance)
    vertices.set_weights(hull.weights)
    if hull.value <= f_best:
        x_best, f_best = hull.x_conv, hull.value
    if termination is Termination.GAP_CLOSED and dual is not None and f_best - dual > eps:
        # cut check passed but the bounds disagree (numerical); report honestly
        termination = Termination.ITER_BUDGET
    return RunResult(x_best, f_best, dual, trace, termination, Method.CONSGEN,
                     rounds, lmo.calls, vertices)


_DISPATCH = {
    Method.FW: solve_fw,
    Method.AFW: solve_afw,
    Method.FW_CONVHULL: solve_fw_convhull,
    Method.CONSGEN: solve_consgen,
}


def solve(instance: ProblemInstance, config: SolverConfig) -> RunResult:
    """Run the method selected by ``config.method``."""
    return _DISPATCH[config.method](instance, config)
