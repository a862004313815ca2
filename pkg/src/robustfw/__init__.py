"""Oracle-based solvers for objective-robust optimization.

Solve ``min_{x in X} max_{c in U} c'x`` when ``X`` is reachable only through a
linear minimization oracle and ``U`` through a Euclidean projection.
"""

from .core import (
    DegenerateUncertaintyError,
    GeometricConstants,
    Method,
    ProblemInstance,
    SolverConfig,
    SolverTrace,
    Termination,
    TraceRecord,
    default_mu,
    iteration_bound,
)
from .lp import (
    LinearProgram,
    LpSolution,
    LpStatus,
    convhull_minmax,
    epigraph_lp,
    solve_lp,
)
from .oracles import (
    GraphInstance,
    MSTOracle,
    TSPOracle,
    VertexListOracle,
    lmo_mst,
    lmo_tsp,
    lmo_vertex_list,
)
from .smoothing import (
    AdaptiveSchedule,
    FixedSchedule,
    SmoothedObjective,
    eval_f,
    eval_f_mu,
    mu_at,
    sandwich_bounds,
)
from .solvers import (
    ActiveVertexSet,
    RunResult,
    solve,
    solve_afw,
    solve_consgen,
    solve_fw,
    solve_fw_convhull,
)
from .uncertainty import (
    BoxSet,
    BudgetedSet,
    ScenarioHullSet,
    UncertaintySet,
    constants,
    project,
    support_max,
)

__version__ = "0.1.0"
