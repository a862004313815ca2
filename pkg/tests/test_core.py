import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from robustfw import (
    BudgetedSet,
    DegenerateUncertaintyError,
    GeometricConstants,
    ProblemInstance,
    SolverConfig,
    SolverTrace,
    VertexListOracle,
    default_mu,
    iteration_bound,
)
from robustfw.core import as_point


def test_default_mu_examples():
    assert default_mu(0.1, 2.0) == pytest.approx(0.025)
    assert default_mu(1.0, 1.0) == 1.0


def test_default_mu_budgeted_brute_force_diameter():
    # d = (1,1,1), Gamma = 3: the set is the unit cube, brute-force its diameter
    uset = BudgetedSet(np.zeros(3), np.ones(3), 3.0)
    corners = np.array([[a, b, c] for a in (0, 1) for b in (0, 1) for c in (0, 1)], float)
    M_brute = max(np.linalg.norm(p - q) for p in corners for q in corners)
    M, _ = uset.constants()
    assert M == pytest.approx(M_brute)
    assert default_mu(0.01, M) == pytest.approx(0.01 / 3)


def test_default_mu_degenerate():
    with pytest.raises(DegenerateUncertaintyError, match="degenerate uncertainty set"):
        default_mu(0.1, 0.0)
    with pytest.raises(ValueError):
        default_mu(0.0, 1.0)


def test_iteration_bound_examples():
    assert iteration_bound(1.0, 1.0, 1.0) == 4
    assert iteration_bound(0.5, 2.0, 1.0) == 64


def test_iteration_bound_toy_spanning_tree():
    # path-free toy: triangle graph, trees are the 3 two-edge subsets
    trees = np.array([[1, 1, 0], [1, 0, 1], [0, 1, 1]], float)
    D_brute = max(np.linalg.norm(a - b) for a in trees for b in trees)
    # D bound used for the theorem: sqrt(2k) with k = 3 ones over the 6 = 3 + 3 toy
    assert D_brute == pytest.approx(math.sqrt(2))
    assert iteration_bound(0.1, math.sqrt(6), math.sqrt(3)) == 7200


@given(st.floats(1e-3, 10), st.floats(1e-3, 10), st.floats(1e-3, 10))
def test_iteration_bound_is_ceiling(eps, D, M):
    T = iteration_bound(eps, D, M)
    exact = 4 * D**2 * M**2 / eps**2
    assert T >= exact * (1 - 1e-9)
    assert T - 1 < exact * (1 + 1e-9)


def test_as_point_rejects_nonfinite_and_wrong_shape():
    assert as_point(2.0).shape == (1,)
    with pytest.raises(ValueError):
        as_point([1.0, np.nan])
    with pytest.raises(ValueError):
        as_point([[1.0]])
    with pytest.raises(ValueError):
        as_point([1.0, 2.0], n=3)


def test_geometric_constants_nonnegative():
    with pytest.raises(ValueError):
        GeometricConstants(-1.0, 0.0, 0.0)


def test_problem_instance_dimension_mismatch():
    oracle = VertexListOracle(np.eye(2))
    with pytest.raises(ValueError):
        ProblemInstance(2, oracle, BudgetedSet(np.zeros(3), np.ones(3), 1.0), 1.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"epsilon": 0.0},
        {"mu_override": -1.0},
        {"max_iters": 0},
        {"max_lmo_calls": 0},
        {"conv_hull_period": 0},
        {"lp_tolerance": 1e-2},
        {"projection_tolerance": 0.0},
        {"seed": -1},
        {"method": "NOPE"},
    ],
)
def test_solver_config_validation(kwargs):
    with pytest.raises(ValueError):
        SolverConfig(**kwargs)


def test_trace_monotonicity_enforced():
    tr = SolverTrace()
    tr.append(0, 1.0, 1)
    tr.append(1, 0.5, 2, f_mu_value=0.4, dual_bound=0.1)
    with pytest.raises(ValueError):
        tr.append(1, 0.5, 3)
    with pytest.raises(ValueError):
        tr.append(2, 0.5, 1)
    assert list(tr.column("dual_bound")[1:]) == [0.1]
    assert np.isnan(tr.column("dual_bound")[0])
    assert tr[1].elapsed >= tr[0].elapsed


def test_constants_bound_sampled_pairs_and_lmo_outputs():
    rng = np.random.default_rng(0)
    uset = BudgetedSet(rng.uniform(0, 1, 6), rng.uniform(0.1, 1, 6), 2.5)
    M, M_max = uset.constants()
    assert M <= 2 * M_max + 1e-12
    C = uset.sample(rng, 1000)
    C2 = uset.sample(rng, 1000)
    assert np.all(np.linalg.norm(C - C2, axis=1) <= M + 1e-12)
    assert np.all(np.linalg.norm(C, axis=1) <= M_max + 1e-12)

    verts = rng.integers(0, 2, (40, 6)).astype(float)
    oracle = VertexListOracle(verts)
    D = oracle.diameter_bound()
    outs = np.array([oracle(rng.normal(size=6)) for _ in range(1000)])
    diffs = np.linalg.norm(outs[:, None] - outs[None], axis=2)
    assert diffs.max() <= D + 1e-12
