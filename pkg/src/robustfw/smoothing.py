"""Smoothed robust objective and smoothing-parameter schedules.

For ``mu > 0`` and an anchor ``c0`` in ``U``::

    f_mu(x) = max_{c in U}  c'x - (mu / 2) ||c - c0||^2

The maximizer is the projection of ``c0 + x / mu`` onto ``U`` and equals the
gradient of ``f_mu``, which is ``1/mu``-Lipschitz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import as_point
from .uncertainty import DEFAULT_PROJECTION_TOL, UncertaintySet

__all__ = [
    "AdaptiveSchedule",
    "FixedSchedule",
    "SmoothedObjective",
    "eval_f",
    "eval_f_mu",
    "mu_at",
    "sandwich_bounds",
]


@dataclass(frozen=True, eq=False)
class SmoothedObjective:
    uset: UncertaintySet
    c0: np.ndarray
    mu: float
    tol: float = DEFAULT_PROJECTION_TOL

    def __post_init__(self):
        c0 = as_point(self.c0, self.uset.dimension, "c0")
        if not self.mu > 0:
            raise ValueError("mu must be > 0")
        if not self.uset.contains(c0, tol=max(self.tol, 1e-9) * (1 + np.abs(c0).max())):
            raise ValueError("anchor c0 must belong to the uncertainty set")
        object.__setattr__(self, "c0", c0)
        object.__setattr__(self, "mu", float(self.mu))

    @classmethod
    def centered(cls, uset: UncertaintySet, mu: float, tol=DEFAULT_PROJECTION_TOL):
        return cls(uset, uset.center(), mu, tol)

    @property
    def lipschitz(self) -> float:
        return 1.0 / self.mu

    def with_mu(self, mu: float) -> "SmoothedObjective":
        return SmoothedObjective(self.uset, self.c0, mu, self.tol)

    def __call__(self, x):
        return eval_f_mu(self, x)


@dataclass(frozen=True)
class FixedSchedule:
    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be > 0")


@dataclass(frozen=True)
class AdaptiveSchedule:
    """``mu_t = 2 D / (M_max sqrt(t + 1))``, for t = 0, 1, 2, ..."""

    D: float
    M_max: float

    def __post_init__(self):
        if not (self.D > 0 and self.M_max > 0):
            raise ValueError("adaptive schedule needs D > 0 and M_max > 0")


def eval_f(uset: UncertaintySet, x) -> float:
    """Robust objective ``max_{c in U} c'x``."""
    return uset.support_max(x)[0]


def eval_f_mu(obj: SmoothedObjective, x, mu: Optional[float] = None):
    """Return ``(f_mu(x), grad f_mu(x))``.

    ``mu`` overrides the objective's own parameter (used by adaptive schedules
    without rebuilding the objective).
    """
    mu = obj.mu if mu is None else float(mu)
    if not mu > 0:
        raise ValueError("mu must be > 0")
    x = as_point(x, obj.uset.dimension, "x")
    grad = obj.uset.project(obj.c0 + x / mu, obj.tol)
    diff = grad - obj.c0
    value = float(grad @ x - 0.5 * mu * (diff @ diff))
    return value, grad


def sandwich_bounds(obj: SmoothedObjective, x, M: float):
    """``(f_mu(x), f_mu(x) + mu M^2 / 2)``, an interval containing ``f(x)``."""
    lo, _ = eval_f_mu(obj, x)
    return lo, lo + 0.5 * obj.mu * M**2


def mu_at(schedule, t: int) -> float:
    """Smoothing parameter for 0-based iteration index ``t``."""
    if isinstance(schedule, FixedSchedule):
        return schedule.mu
    if isinstance(schedule, AdaptiveSchedule):
        if t < 0:
            raise ValueError("t must be >= 0")
        return 2.0 * schedule.D / (schedule.M_max * math.sqrt(t + 1))
    raise TypeError(f"unknown schedule {schedule!r}")
