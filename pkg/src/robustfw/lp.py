"""Dense linear programming for the epigraph and convex-hull subproblems.

:func:`solve_lp` is a two-phase bounded-variable tableau simplex.  Pricing is
Dantzig's rule; after ``3 (m + N)`` consecutive degenerate pivots it switches
to Bland's rule for good.  The final basis is re-solved with a dense LU
factorization, and primal values and duals are taken from that solve rather
than from the accumulated tableau.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .uncertainty import BoxSet, BudgetedSet, ScenarioHullSet, UncertaintySet

__all__ = [
    "ConvexHullResult",
    "EpigraphResult",
    "LPError",
    "LinearProgram",
    "LpSolution",
    "LpStatus",
    "convhull_minmax",
    "epigraph_lp",
    "lp_residuals",
    "solve_lp",
]

LE, EQ, GE = "<=", "=", ">="


class LPError(RuntimeError):
    """The simplex loop exceeded its pivot budget or hit a numerical breakdown."""


class LpStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """``max objective @ x`` s.t. ``A[i] @ x (rel_i) rhs[i]``, ``lower <= x <= upper``."""

    objective: np.ndarray
    A: np.ndarray
    relations: Sequence[str]
    rhs: np.ndarray
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        N = len(c)
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, N)
        if A.ndim != 2 or A.shape[1] != N:
            raise ValueError(f"constraint matrix must have {N} columns, got {A.shape}")
        m = A.shape[0]
        rhs = np.asarray(self.rhs, dtype=float).ravel()
        rel = tuple(self.relations)
        if len(rhs) != m or len(rel) != m:
            raise ValueError("relations and rhs must match the number of rows")
        bad = set(rel) - {LE, EQ, GE}
        if bad:
            raise ValueError(f"unknown relations {bad}")
        lo = np.zeros(N) if self.lower is None else np.asarray(self.lower, float).ravel()
        hi = np.full(N, np.inf) if self.upper is None else np.asarray(self.upper, float).ravel()
        if len(lo) != N or len(hi) != N:
            raise ValueError("bounds must have one entry per variable")
        if np.any(lo > hi):
            raise ValueError("lower bound exceeds upper bound")
        if np.any(lo == np.inf) or np.any(hi == -np.inf):
            raise ValueError("bounds must leave a nonempty range")
        if not np.all(np.isfinite(c)) or not np.all(np.isfinite(A)) or not np.all(np.isfinite(rhs)):
            raise ValueError("objective, matrix and rhs must be finite")
        for name, val in (("objective", c), ("A", A), ("relations", rel), ("rhs", rhs),
                          ("lower", lo), ("upper", hi)):
            object.__setattr__(self, name, val)

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    @property
    def num_rows(self) -> int:
        return self.A.shape[0]


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray
    objective_value: float
    # shadow prices d(objective)/d(rhs); >= 0 on <= rows, <= 0 on >= rows
    duals: np.ndarray
    iterations: int = 0
    residuals: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


# ------------------------------------------------------------------- standard form


class _StandardForm:
    """``min c @ y`` s.t. ``A y = b``, ``0 <= y <= ub`` with ``b >= 0``."""

    def __init__(self, lp: LinearProgram):
        m, N = lp.num_rows, lp.num_vars
        cols, costs, ubs = [], [], []
        # original variable j = offset_j + sum_k sign_k * y[col_k]
        self.var_map = []
        shift = np.zeros(N)
        for j in range(N):
            lo, hi = lp.lower[j], lp.upper[j]
            a = lp.A[:, j]
            if np.isfinite(lo):
                shift[j] = lo
                self.var_map.append([(len(cols), 1.0)])
                cols.append(a)
                costs.append(-lp.objective[j])
                ubs.append(hi - lo)
            elif np.isfinite(hi):
                shift[j] = hi
                self.var_map.append([(len(cols), -1.0)])
                cols.append(-a)
                costs.append(lp.objective[j])
                ubs.append(np.inf)
            else:
                self.var_map.append([(len(cols), 1.0), (len(cols) + 1, -1.0)])
                cols.extend([a, -a])
                costs.extend([-lp.objective[j], lp.objective[j]])
                ubs.extend([np.inf, np.inf])
        self.shift = shift
        b = lp.rhs - lp.A @ shift
        self.num_structural = len(cols)

        self.row_flip = np.where(b < 0, -1.0, 1.0)
        b = b * self.row_flip
        basis = [-1] * m
        self.slack_of_row = [-1] * m
        for i, rel in enumerate(lp.relations):
            if rel == EQ:
                continue
            col = np.zeros(m)
            col[i] = (1.0 if rel == LE else -1.0) * self.row_flip[i]
            self.slack_of_row[i] = len(cols)
            if col[i] > 0:
                basis[i] = len(cols)
            cols.append(col)
            costs.append(0.0)
            ubs.append(np.inf)
        structural_and_slack = len(cols)
        self.artificial = []
        for i in range(m):
            if basis[i] < 0:
                col = np.zeros(m)
                col[i] = 1.0
                basis[i] = len(cols)
                self.artificial.append(len(cols))
                cols.append(col)
                costs.append(0.0)
                ubs.append(np.inf)
        self.num_real = structural_and_slack
        A_std = np.column_stack(cols) if cols else np.zeros((m, 0))
        A_std[:, : self.num_structural] *= self.row_flip[:, None]
        self.A = A_std
        self.b = b
        self.c = np.array(costs, dtype=float)
        self.ub = np.array(ubs, dtype=float)
        self.basis = np.array(basis, dtype=np.int64)

    def recover(self, y: np.ndarray) -> np.ndarray:
        x = self.shift.copy()
        for j, parts in enumerate(self.var_map):
            for col, sign in parts:
                x[j] += sign * y[col]
        return x


class _Tableau:
    def __init__(self, A, b, ub, basis, tol):
        m, N = A.shape
        self.m, self.N = m, N
        self.T = A.copy()  # B^{-1} A with B = I initially
        self.beta = b.copy()
        self.ub = ub.copy()
        self.basis = basis.copy()
        self.at_upper = np.zeros(N, dtype=bool)
        self.is_basic = np.zeros(N, dtype=bool)
        self.is_basic[self.basis] = True
        self.tol = tol
        self.piv_tol = 1e-11
        self.iterations = 0
        self.max_iterations = 50 * (m + N) + 1000
        self.bland = False

    def run(self, c):
        T, m = self.T, self.m
        degenerate = 0
        degenerate_limit = 3 * (m + self.N)
        opt_tol = self.tol * max(1.0, float(np.abs(c).max()) if len(c) else 1.0)
        while True:
            self.iterations += 1
            if self.iterations > self.max_iterations:
                raise LPError(
                    f"simplex pivot budget exceeded ({self.max_iterations} pivots, "
                    f"m={m}, N={self.N}, bland={self.bland})"
                )
            d = c - c[self.basis] @ T
            d[self.is_basic] = 0.0
            can_move = self.ub > 0
            eligible = can_move & (
                (~self.at_upper & (d < -opt_tol)) | (self.at_upper & (d > opt_tol))
            )
            cand = np.flatnonzero(eligible)
            if len(cand) == 0:
                return LpStatus.OPTIMAL
            if self.bland:
                j = int(cand[0])
            else:
                j = int(cand[np.argmax(np.abs(d[cand]))])
            sign = -1.0 if self.at_upper[j] else 1.0
            col = T[:, j] * sign

            t_best = self.ub[j]
            leave, leave_upper = -1, False
            ub_b = self.ub[self.basis]
            pos = col > self.piv_tol
            neg = (col < -self.piv_tol) & np.isfinite(ub_b)
            ratios = np.full(m, np.inf)
            ratios[pos] = np.maximum(self.beta[pos], 0.0) / col[pos]
            ratios[neg] = np.minimum(self.beta[neg] - ub_b[neg], 0.0) / col[neg]
            if m:
                r_min = ratios.min()
                if r_min < t_best:
                    ties = np.flatnonzero(ratios <= r_min + 1e-12 * (1 + r_min))
                    if self.bland:
                        r = int(ties[np.argmin(self.basis[ties])])
                    else:
                        r = int(ties[np.argmax(np.abs(col[ties]))])
                    leave, leave_upper, t_best = r, bool(neg[r]), ratios[r]
            if not np.isfinite(t_best):
                return LpStatus.UNBOUNDED

            self.beta -= t_best * col
            if t_best <= self.tol:
                degenerate += 1
                if degenerate > degenerate_limit:
                    self.bland = True
            else:
                degenerate = 0
            if leave < 0:
                self.at_upper[j] = not self.at_upper[j]
                continue
            entering_value = t_best if sign > 0 else self.ub[j] - t_best
            self._pivot(leave, j)
            out = self.basis[leave]
            self.is_basic[out] = False
            self.at_upper[out] = leave_upper
            self.basis[leave] = j
            self.is_basic[j] = True
            self.at_upper[j] = False
            self.beta[leave] = entering_value

    def _pivot(self, r, j):
        T = self.T
        piv = T[r, j]
        if abs(piv) < self.piv_tol:
            raise LPError(f"numerically singular pivot {piv:.3e}")
        T[r] /= piv
        factor = T[:, j].copy()
        factor[r] = 0.0
        T -= np.outer(factor, T[r])

    def swap_in(self, r, j):
        """Degenerate basis change keeping all variable values."""
        value = self.ub[j] if self.at_upper[j] else 0.0
        self._pivot(r, j)
        out = self.basis[r]
        self.is_basic[out] = False
        self.at_upper[out] = False
        self.basis[r] = j
        self.is_basic[j] = True
        self.at_upper[j] = False
        self.beta[r] = value


def solve_lp(lp: LinearProgram, tol: float = 1e-9) -> LpSolution:
    """Solve ``lp`` to optimality, infeasibility or unboundedness."""
    if not 0 < tol <= 1e-3:
        raise ValueError("tol must lie in (0, 1e-3]")
    sf = _StandardForm(lp)
    m = lp.num_rows
    tab = _Tableau(sf.A, sf.b, sf.ub, sf.basis, tol)
    feas_tol = tol * (1.0 + (float(np.abs(sf.b).max()) if m else 0.0))

    if sf.artificial:
        c1 = np.zeros(tab.N)
        c1[sf.artificial] = 1.0
        tab.run(c1)
        infeas = float(c1[tab.basis] @ tab.beta)
        if infeas > feas_tol:
            return LpSolution(LpStatus.INFEASIBLE, np.full(lp.num_vars, np.nan), np.nan,
                              np.full(m, np.nan), tab.iterations)
        art = set(sf.artificial)
        for r in range(m):
            if tab.basis[r] in art:
                row = np.abs(tab.T[r, : sf.num_real])
                row[tab.is_basic[: sf.num_real]] = 0.0
                j = int(np.argmax(row)) if len(row) else 0
                if len(row) and row[j] > 1e-9:
                    tab.swap_in(r, j)
        tab.ub[sf.artificial] = 0.0
        tab.at_upper[sf.artificial] = False
        tab.bland = False

    c2 = np.concatenate([sf.c, np.zeros(tab.N - len(sf.c))])
    status = tab.run(c2)
    if status is LpStatus.UNBOUNDED:
        return LpSolution(LpStatus.UNBOUNDED, np.full(lp.num_vars, np.nan), np.inf,
                          np.full(m, np.nan), tab.iterations)

    y = _refine(sf, tab)
    x = sf.recover(y[: sf.num_structural])
    # duals of the internal min problem: B^T pi = c_B
    B = sf.A[:, tab.basis]
    try:
        pi = np.linalg.solve(B.T, c2[tab.basis]) if m else np.zeros(0)
    except np.linalg.LinAlgError:
        pi = np.linalg.lstsq(B.T, c2[tab.basis], rcond=None)[0]
    duals = -pi * sf.row_flip
    sol = LpSolution(LpStatus.OPTIMAL, x, float(lp.objective @ x), duals, tab.iterations)
    sol.residuals = lp_residuals(lp, sol)
    return sol


def _refine(sf: _StandardForm, tab: _Tableau) -> np.ndarray:
    N = tab.N
    y = np.zeros(N)
    upper = tab.at_upper & ~tab.is_basic
    y[upper] = tab.ub[upper]
    y[tab.basis] = tab.beta
    if tab.m == 0:
        return y
    rhs = sf.b - sf.A[:, upper] @ tab.ub[upper]
    try:
        xb = np.linalg.solve(sf.A[:, tab.basis], rhs)
    except np.linalg.LinAlgError:
        return np.clip(y, 0, tab.ub)
    ub_b = tab.ub[tab.basis]
    old_viol = np.maximum(np.maximum(-tab.beta, tab.beta - ub_b), 0).max()
    new_viol = np.maximum(np.maximum(-xb, xb - ub_b), 0).max()
    if new_viol <= max(old_viol, 1e-9):
        y[tab.basis] = np.clip(xb, 0.0, ub_b)
    else:
        y[tab.basis] = np.clip(tab.beta, 0.0, ub_b)
    return y


def lp_residuals(lp: LinearProgram, sol: LpSolution) -> dict:
    """Primal/dual feasibility, complementary slackness and duality gap of ``sol``.

    All residuals are absolute; ``gap`` is ``dual objective - primal objective``.
    """
    x, y = sol.x, sol.duals
    Ax = lp.A @ x
    rel = np.array(lp.relations)
    slack = lp.rhs - Ax  # >= 0 on <= rows
    row_viol = np.where(rel == LE, np.maximum(-slack, 0),
                        np.where(rel == GE, np.maximum(slack, 0), np.abs(slack)))
    bound_viol = np.maximum(np.maximum(lp.lower - x, x - lp.upper), 0)
    primal = float(max(row_viol.max(initial=0), bound_viol.max(initial=0)))

    sign_viol = np.where(rel == LE, np.maximum(-y, 0),
                         np.where(rel == GE, np.maximum(y, 0), 0.0))
    r = lp.objective - lp.A.T @ y
    unbounded_dir = np.where(r > 0, np.where(np.isfinite(lp.upper), 0.0, r),
                             np.where(np.isfinite(lp.lower), 0.0, -r))
    dual = float(max(sign_viol.max(initial=0), unbounded_dir.max(initial=0)))

    row_cs = np.abs(y * slack)
    hi = np.where(np.isfinite(lp.upper), lp.upper, x)
    lo = np.where(np.isfinite(lp.lower), lp.lower, x)
    var_cs = np.where(r > 0, r * (hi - x), r * (lo - x))
    comp = float(max(row_cs.max(initial=0), np.abs(var_cs).max(initial=0)))
    dual_obj = float(lp.rhs @ y + np.sum(np.where(r > 0, r * hi, r * lo)))
    return {
        "primal": primal,
        "dual": dual,
        "complementary": comp,
        "gap": dual_obj - float(lp.objective @ x),
    }


# ------------------------------------------------------------ robust subproblems


class EpigraphResult(NamedTuple):
    c_star: np.ndarray
    tau_star: float
    # convex weights on the vertices (duals of the cut rows)
    weights: np.ndarray


class ConvexHullResult(NamedTuple):
    x_conv: np.ndarray
    weights: np.ndarray
    value: float
    # maximizing scenario at x_conv recovered from the LP duals
    c_star: np.ndarray


def _vertex_array(vertices) -> np.ndarray:
    if hasattr(vertices, "as_array"):
        vertices = vertices.as_array()
    V = np.asarray(vertices, dtype=float)
    if V.ndim == 1:
        V = V.reshape(1, -1)
    if V.ndim != 2 or V.shape[0] == 0:
        raise ValueError("need a nonempty set of vertices")
    return V


def _polyhedral(uset: UncertaintySet):
    if isinstance(uset, BudgetedSet):
        return uset.c_lower, uset.d, uset.gamma
    if isinstance(uset, BoxSet):
        return uset.lower, uset.upper - uset.lower, None
    raise TypeError(f"no LP encoding for {type(uset).__name__}")


def epigraph_lp(vertices, uset: UncertaintySet, tol: float = 1e-9) -> EpigraphResult:
    """``max tau`` s.t. ``tau <= c @ x_i`` for every vertex, ``c in U``."""
    V = _vertex_array(vertices)
    k, n = V.shape
    if n != uset.dimension:
        raise ValueError("vertex dimension does not match the uncertainty set")
    if isinstance(uset, ScenarioHullSet):
        C = uset.scenarios
        S = C.shape[0]
        # variables: w (S) >= 0, tau free
        obj = np.zeros(S + 1)
        obj[-1] = 1.0
        A = np.zeros((k + 1, S + 1))
        A[:k, :S] = -(V @ C.T)
        A[:k, -1] = 1.0
        A[k, :S] = 1.0
        rel = [LE] * k + [EQ]
        rhs = np.concatenate([np.zeros(k), [1.0]])
        lo = np.concatenate([np.zeros(S), [-np.inf]])
        hi = np.full(S + 1, np.inf)
        sol = _solve_checked(LinearProgram(obj, A, rel, rhs, lo, hi), tol)
        w = np.clip(sol.x[:S], 0, None)
        w /= w.sum()
        return EpigraphResult(w @ C, float(sol.x[-1]), _weights(sol.duals[:k]))

    cl, d, gamma = _polyhedral(uset)
    # variables: theta (n) in [0, 1], tau free
    obj = np.zeros(n + 1)
    obj[-1] = 1.0
    rows = [np.column_stack([-(V * d), np.ones(k)])]
    rhs = [V @ cl]
    rel = [LE] * k
    if gamma is not None:
        rows.append(np.concatenate([np.ones(n), [0.0]])[None, :])
        rhs.append([gamma])
        rel.append(LE)
    A = np.vstack(rows)
    lo = np.concatenate([np.zeros(n), [-np.inf]])
    hi = np.concatenate([np.ones(n), [np.inf]])
    sol = _solve_checked(LinearProgram(obj, A, rel, np.concatenate(rhs), lo, hi), tol)
    theta = np.clip(sol.x[:n], 0.0, 1.0)
    return EpigraphResult(cl + d * theta, float(sol.x[-1]), _weights(sol.duals[:k]))


def convhull_minmax(vertices, uset: UncertaintySet, tol: float = 1e-9) -> ConvexHullResult:
    """Minimize the robust objective over the convex hull of ``vertices``.

    The inner maximization is dualized so that a single LP in the hull weights
    remains.  For budgeted sets::

        min  cl @ V'a + gamma * lam + sum(pi)
        s.t. lam + pi_j >= d_j (V'a)_j,  sum(a) = 1,  a, lam, pi >= 0

    whose duals on the first block recover the maximizing ``theta``.
    """
    V = _vertex_array(vertices)
    k, n = V.shape
    if n != uset.dimension:
        raise ValueError("vertex dimension does not match the uncertainty set")
    if isinstance(uset, ScenarioHullSet):
        C = uset.scenarios
        S = C.shape[0]
        # variables: a (k) >= 0, tau free; maximize -tau
        obj = np.zeros(k + 1)
        obj[-1] = -1.0
        A = np.zeros((S + 1, k + 1))
        A[:S, :k] = C @ V.T
        A[:S, -1] = -1.0
        A[S, :k] = 1.0
        rel = [LE] * S + [EQ]
        rhs = np.concatenate([np.zeros(S), [1.0]])
        lo = np.concatenate([np.zeros(k), [-np.inf]])
        sol = _solve_checked(LinearProgram(obj, A, rel, rhs, lo), tol)
        alpha = _weights(sol.x[:k])
        c_star = _weights(sol.duals[:S]) @ C
    else:
        cl, d, gamma = _polyhedral(uset)
        has_budget = gamma is not None
        nb = 1 if has_budget else 0
        # variables: a (k), [lam], pi (n); maximize the negated dual objective
        obj = np.concatenate([-(V @ cl), [-gamma] if has_budget else [], -np.ones(n)])
        A = np.zeros((n + 1, k + nb + n))
        A[:n, :k] = (V * d).T
        if has_budget:
            A[:n, k] = -1.0
        A[:n, k + nb:] = -np.eye(n)
        A[n, :k] = 1.0
        rel = [LE] * n + [EQ]
        rhs = np.concatenate([np.zeros(n), [1.0]])
        sol = _solve_checked(LinearProgram(obj, A, rel, rhs), tol)
        alpha = _weights(sol.x[:k])
        theta = np.clip(sol.duals[:n], 0.0, 1.0)
        c_star = cl + d * theta
    x_conv = alpha @ V
    value = uset.support_max(x_conv)[0]
    return ConvexHullResult(x_conv, alpha, float(value), c_star)


def _weights(w: np.ndarray) -> np.ndarray:
    w = np.clip(np.asarray(w, dtype=float), 0.0, None)
    total = w.sum()
    if total <= 0:
        raise LPError("LP returned an empty set of convex weights")
    return w / total


def _solve_checked(lp: LinearProgram, tol: float) -> LpSolution:
    sol = solve_lp(lp, tol)
    if not sol.optimal:
        raise LPError(f"robust subproblem LP ended with status {sol.status.value}")
    return sol
