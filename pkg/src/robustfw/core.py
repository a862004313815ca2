"""Shared domain types: problem instances, traces, solver configuration.

A robust problem ``min_{x in X} max_{c in U} c'x`` is described by a linear
minimization oracle (LMO) over ``X`` and an uncertainty set ``U``.  Every point
in decision or cost space is a dense float64 vector of length ``n``.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np

if TYPE_CHECKING:
    from .uncertainty import UncertaintySet

__all__ = [
    "DegenerateUncertaintyError",
    "GeometricConstants",
    "Method",
    "ProblemInstance",
    "SolverConfig",
    "SolverTrace",
    "Termination",
    "TraceRecord",
    "as_point",
    "default_mu",
    "iteration_bound",
]


class DegenerateUncertaintyError(ValueError):
    """Raised when the uncertainty set is a single point (M = 0)."""


def as_point(values, n: Optional[int] = None, name: str = "point") -> np.ndarray:
    """Return ``values`` as a finite 1-D float64 array, optionally of length ``n``."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-D vector, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"{name} has length {arr.shape[0]}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class GeometricConstants:
    """Diameter bounds entering the iteration and gap bounds.

    D bounds the feasible-set diameter, M the uncertainty-set diameter and
    M_max the largest norm of a member of the uncertainty set.
    """

    D: float
    M: float
    M_max: float

    def __post_init__(self):
        if min(self.D, self.M, self.M_max) < 0:
            raise ValueError("geometric constants must be nonnegative")


LMO = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ProblemInstance:
    """Feasible region (through its LMO) plus uncertainty set.

    ``lmo`` maps a cost vector to a minimizing extreme point of X.  ``diameter_x``
    must upper-bound the distance between any two LMO outputs.
    """

    dimension: int
    lmo: LMO
    uncertainty: "UncertaintySet"
    diameter_x: float
    name: str = "instance"

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.uncertainty.dimension != self.dimension:
            raise ValueError(
                f"uncertainty set has dimension {self.uncertainty.dimension}, "
                f"instance has {self.dimension}"
            )
        if not self.diameter_x >= 0:
            raise ValueError("diameter_x must be nonnegative")

    def constants(self) -> GeometricConstants:
        M, M_max = self.uncertainty.constants()
        return GeometricConstants(D=float(self.diameter_x), M=M, M_max=M_max)


class Method(str, enum.Enum):
    FW = "FW"
    AFW = "AFW"
    FW_CONVHULL = "FW_CONVHULL"
    CONSGEN = "CONSGEN"


class Termination(str, enum.Enum):
    EPSILON_REACHED = "EpsilonReached"
    ITER_BUDGET = "IterBudget"
    LMO_BUDGET = "LmoBudget"
    GAP_CLOSED = "GapClosed"


@dataclass(frozen=True)
class SolverConfig:
    method: Method = Method.FW
    epsilon: float = 0.1
    mu_override: Optional[float] = None
    max_iters: int = 10000
    max_lmo_calls: int = 2500
    conv_hull_period: int = 10
    lp_tolerance: float = 1e-9
    projection_tolerance: float = 1e-9
    seed: int = 0
    # consgen stops adding cuts beyond this many epigraph rows
    max_cut_rows: int = 2000

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if self.mu_override is not None and not self.mu_override > 0:
            raise ValueError("mu_override must be > 0")
        if self.max_iters < 1 or self.max_lmo_calls < 1 or self.max_cut_rows < 1:
            raise ValueError("budgets must be >= 1")
        if self.conv_hull_period < 1:
            raise ValueError("conv_hull_period must be >= 1")
        for name in ("lp_tolerance", "projection_tolerance"):
            tol = getattr(self, name)
            if not 0 < tol <= 1e-3:
                raise ValueError(f"{name} must lie in (0, 1e-3]")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    f_value: float
    f_mu_value: Optional[float]
    dual_bound: Optional[float]
    lmo_calls: int
    elapsed: float
    # best primal value seen so far (in-memory only, not part of the CSV)
    f_best: float = math.inf


@dataclass
class SolverTrace:
    """Per-iteration log owned by a single solver run."""

    records: list = field(default_factory=list)
    _start: float = field(default_factory=time.perf_counter, repr=False)

    def append(
        self,
        iteration: int,
        f_value: float,
        lmo_calls: int,
        f_mu_value: Optional[float] = None,
        dual_bound: Optional[float] = None,
        f_best: Optional[float] = None,
    ) -> TraceRecord:
        if self.records:
            last = self.records[-1]
            if iteration <= last.iteration:
                raise ValueError("trace iterations must be strictly increasing")
            if lmo_calls < last.lmo_calls:
                raise ValueError("trace lmo_calls must be nondecreasing")
        rec = TraceRecord(
            iteration=int(iteration),
            f_value=float(f_value),
            f_mu_value=None if f_mu_value is None else float(f_mu_value),
            dual_bound=None if dual_bound is None else float(dual_bound),
            lmo_calls=int(lmo_calls),
            elapsed=time.perf_counter() - self._start,
            f_best=float(f_value if f_best is None else f_best),
        )
        self.records.append(rec)
        return rec

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def column(self, name: str) -> np.ndarray:
        """Return one field across all records as an array (None -> nan)."""
        vals = [getattr(r, name) for r in self.records]
        return np.array([np.nan if v is None else v for v in vals], dtype=float)


def default_mu(epsilon: float, M: float) -> float:
    """Fixed smoothing parameter ``epsilon / M**2`` giving an epsilon-accurate model."""
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    if M < 0:
        raise ValueError("M must be nonnegative")
    if M == 0:
        raise DegenerateUncertaintyError(
            "degenerate uncertainty set: a singleton U makes the problem "
            "deterministic, call the LMO directly"
        )
    return epsilon / M**2


def iteration_bound(epsilon: float, D: float, M: float) -> int:
    """Number of smoothed Frank-Wolfe iterations ``ceil(4 D^2 M^2 / eps^2)``."""
    if not (epsilon > 0 and D > 0 and M > 0):
        raise ValueError("epsilon, D and M must all be > 0")
    value = 4.0 * D**2 * M**2 / epsilon**2
    # guard against 7200.000000000001 style round-up
    nearest = round(value)
    if nearest >= 1 and abs(value - nearest) <= 1e-9 * value:
        return int(nearest)
    return int(math.ceil(value))
