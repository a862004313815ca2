"""End-to-end acceptance checks.

Each test records a PASS/FAIL line that is echoed in the terminal summary.
Ground truth comes from the enumeration and grid oracles in ``_support`` and
from exhaustive vertex enumeration, never from the code under test.
"""

from pathlib import Path

import numpy as np
import pytest

from _support import (
    all_spanning_trees,
    all_tours,
    budgeted_projection_kkt,
    random_budgeted,
    random_connected_graph,
    random_scenarios,
    simplex_grid_projection,
    small_suite,
)
from robustfw import (
    BoxSet,
    BudgetedSet,
    GraphInstance,
    MSTOracle,
    ProblemInstance,
    ScenarioHullSet,
    SmoothedObjective,
    SolverConfig,
    Termination,
    convhull_minmax,
    epigraph_lp,
    eval_f,
    eval_f_mu,
    iteration_bound,
    lmo_mst,
    lmo_tsp,
    project,
    solve_afw,
    solve_consgen,
    solve_fw,
    solve_fw_convhull,
)
from robustfw.harness import (
    ExperimentSpec,
    brute_force_optimum,
    generate_instance,
    read_trace_csv,
    run_experiment,
    write_instance,
)
from robustfw.harness import trends
from robustfw.harness.cli import main


@pytest.fixture(scope="module")
def suite():
    """24 small instances (MST |V| <= 6, vertex lists <= 50 points) with exact f*."""
    return [(inst, brute_force_optimum(inst)[0]) for inst in small_suite(seed=2024, count=24)]


def _random_box(rng, n):
    lo = rng.uniform(-1, 1, n)
    return BoxSet(lo, lo + rng.uniform(0.1, 1.0, n))


SET_MAKERS = {
    "budgeted": lambda rng, n: random_budgeted(rng, n, d_range=(0.1, 1.0)),
    "box": _random_box,
    "scenarios": lambda rng, n: random_scenarios(rng, n),
}


# -------------------------------------------------------------------------- 1


def test_1_fixed_smoothing_bound(suite, acceptance):
    violations, runs = [], 0
    for inst, fstar in suite:
        c = inst.constants()
        for eps in (0.5, 0.1):
            T = iteration_bound(eps, c.D, c.M)
            res = solve_fw(inst, SolverConfig(method="FW", epsilon=eps, max_iters=T,
                                              max_lmo_calls=T + 1))
            runs += 1
            assert res.termination is Termination.EPSILON_REACHED and res.iterations == T
            if res.f_best - fstar > eps:
                violations.append((inst.name, eps, res.f_best - fstar))
    ok = acceptance(1, not violations,
                    f"{len(suite)} instances, {runs} runs, violations={len(violations)}")
    assert ok, violations


# -------------------------------------------------------------------------- 2


def test_2_adaptive_bound(suite, acceptance):
    violations, checked = [], 0
    for inst, fstar in suite:
        c = inst.constants()
        res = solve_afw(inst, SolverConfig(method="AFW", epsilon=0.1, max_iters=10**6,
                                           max_lmo_calls=10**6))
        t = res.trace.column("iteration")
        f = res.trace.column("f_value")
        logged = t >= 1
        bound = c.D * c.M_max / (2 * np.sqrt(t[logged]))
        gap = f[logged] - fstar
        checked += int(logged.sum())
        bad = np.flatnonzero(gap > bound + 1e-9)
        violations.extend((inst.name, int(t[logged][i])) for i in bad)
    ok = acceptance(2, not violations, f"{checked} logged iterates, violations={len(violations)}")
    assert ok, violations[:10]


# -------------------------------------------------------------------------- 3


def test_3_projection_oracles(acceptance):
    rng = np.random.default_rng(3)
    worst_b = 0.0
    for _ in range(500):
        n = int(rng.integers(1, 9))
        uset = BudgetedSet(rng.uniform(-2, 2, n), rng.uniform(0.05, 2, n),
                           float(rng.uniform(0, n)))
        z = uset.c_lower + rng.normal(scale=2.0, size=n) * uset.d
        ref = budgeted_projection_kkt(uset.c_lower, uset.d, uset.gamma, z)
        worst_b = max(worst_b, float(np.abs(project(uset, z) - ref).max()))
    worst_s = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 5))
        S = int(rng.integers(1, 4))
        C = rng.uniform(-2, 2, (S, n))
        z = rng.normal(scale=2.0, size=n)
        ref = simplex_grid_projection(C, z)
        worst_s = max(worst_s, float(np.abs(project(ScenarioHullSet(C), z) - ref).max()))
    ok = acceptance(3, worst_b <= 1e-8 and worst_s <= 1e-4,
                    f"budgeted max err {worst_b:.1e} (500 cases), "
                    f"scenario max err {worst_s:.1e} (100 cases)")
    assert ok


# -------------------------------------------------------------------------- 4


def test_4_gradient_finite_differences(acceptance):
    rng = np.random.default_rng(4)
    h = 1e-6
    worst = {}
    for kind, make in SET_MAKERS.items():
        worst[kind] = 0.0
        for _ in range(100):
            n = int(rng.integers(1, 7))
            uset = make(rng, n)
            obj = SmoothedObjective.centered(uset, float(rng.uniform(0.05, 2.0)))
            x = rng.normal(scale=2.0, size=n)
            _, g = eval_f_mu(obj, x)
            fd = np.empty(n)
            for j in range(n):
                e = np.zeros(n)
                e[j] = h
                fd[j] = (eval_f_mu(obj, x + e)[0] - eval_f_mu(obj, x - e)[0]) / (2 * h)
            err = np.linalg.norm(fd - g) / max(1.0, np.linalg.norm(g))
            worst[kind] = max(worst[kind], float(err))
    # no breakpoint neighbourhoods are excluded
    ok = acceptance(4, max(worst.values()) <= 1e-4,
                    "max rel err " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
    assert ok


# -------------------------------------------------------------------------- 5


def test_5_smoothing_sandwich(acceptance):
    rng = np.random.default_rng(5)
    violations = 0
    for kind, make in SET_MAKERS.items():
        for _ in range(500):
            n = int(rng.integers(1, 7))
            uset = make(rng, n)
            M, _ = uset.constants()
            mu = float(10 ** rng.uniform(-3, 1))
            obj = SmoothedObjective.centered(uset, mu)
            x = rng.normal(scale=float(10 ** rng.uniform(-1, 1)), size=n)
            f = eval_f(uset, x)
            fm, _ = eval_f_mu(obj, x)
            slack = 1e-9 * (1 + abs(f))
            if not (fm <= f + slack and f <= fm + mu * M**2 / 2 + slack):
                violations += 1
    ok = acceptance(5, violations == 0, f"1500 samples, violations={violations}")
    assert ok


# -------------------------------------------------------------------------- 6


def test_6_duality_and_equivalence(acceptance):
    rng = np.random.default_rng(6)
    worst_lp = 0.0
    for trial in range(100):
        n = int(rng.integers(2, 8))
        k = int(rng.integers(1, 12))
        V = rng.integers(0, 2, (k, n)).astype(float)
        uset = list(SET_MAKERS.values())[trial % 3](rng, n)
        ep = epigraph_lp(V, uset)
        ch = convhull_minmax(V, uset)
        worst_lp = max(worst_lp, abs(ep.tau_star - ch.value) / (1 + abs(ch.value)))

    instances = small_suite(seed=66, count=10)
    for i in range(10):
        g = random_connected_graph(rng, 6, 0.6)
        oracle = MSTOracle(g)
        instances.append(ProblemInstance(g.num_edges, oracle,
                                         random_budgeted(rng, g.num_edges, d_range=(0.5, 3.0)),
                                         oracle.diameter_bound(), f"wide{i}"))
    worst_alg, not_closed = 0.0, 0
    for inst in instances:
        a = solve_consgen(inst, SolverConfig(method="CONSGEN", epsilon=1e-7))
        b = solve_fw_convhull(inst, SolverConfig(method="FW_CONVHULL", epsilon=1e-7,
                                                 max_iters=20000, max_lmo_calls=20000))
        not_closed += (a.termination is not Termination.GAP_CLOSED) + (
            b.termination is not Termination.GAP_CLOSED)
        worst_alg = max(worst_alg, abs(a.f_best - b.f_best) / (1 + abs(a.f_best)))
    ok = acceptance(6, worst_lp <= 1e-6 and worst_alg <= 1e-6 and not_closed == 0,
                    f"LP duality max diff {worst_lp:.1e} (100 sets), CONSGEN vs FW_CONVHULL "
                    f"max diff {worst_alg:.1e} ({len(instances)} instances, "
                    f"not closed={not_closed})")
    assert ok


# -------------------------------------------------------------------------- 7


def test_7_lmo_exactness(acceptance):
    rng = np.random.default_rng(7)
    graphs, mismatches, checks = [], 0, 0
    for V in range(3, 8):
        graphs.append(GraphInstance.complete(V))
        for _ in range(2):
            graphs.append(random_connected_graph(rng, V, 0.4))
    for g in graphs:
        trees = all_spanning_trees(g)
        tours = all_tours(g) if g.is_complete() else None
        for _ in range(100):
            c = rng.normal(size=g.num_edges)
            checks += 1
            mismatches += c @ lmo_mst(g, c) > (trees @ c).min() + 1e-12
            if tours is not None:
                checks += 1
                mismatches += c @ lmo_tsp(g, c) > (tours @ c).min() + 1e-12
    ok = acceptance(7, mismatches == 0,
                    f"{len(graphs)} graphs with |V| <= 7, {checks} comparisons, "
                    f"mismatches={mismatches}")
    assert ok


# -------------------------------------------------------------------------- 8

TREND_SEEDS = 10
LARGE_GAMMA, SMALL_GAMMA = 0.3, 0.03
TARGET_EDGES = 300
REL_THRESHOLD = 1e-3


def _trend_instances(folder: Path):
    out = []
    for seed in range(TREND_SEEDS):
        V = 40 + 10 * (seed % 5)
        p = TARGET_EDGES / (V * (V - 1) / 2)
        n = generate_instance("mst", V, 0, seed, edge_prob=p).uncertainty.dimension
        names = {}
        for tag, frac in (("large", LARGE_GAMMA), ("small", SMALL_GAMMA)):
            inst = generate_instance("mst", V, round(frac * n, 3), seed, edge_prob=p)
            path = folder / f"{inst.name}.json"
            write_instance(inst, path)
            names[tag] = inst.name
        out.append((seed, V, n, names))
    return out


def test_8_desk_scale_trends(tmp_path, acceptance):
    cases = _trend_instances(tmp_path)
    paths = sorted(tmp_path.glob("*.json"))
    config = SolverConfig(epsilon=0.5, max_iters=10000, max_lmo_calls=2500)
    traces = tmp_path / "traces"
    report = run_experiment(ExperimentSpec(paths, ["FW", "CONSGEN"], traces, config, workers=1))
    assert report.ok

    lines, held_ab, held_c = [], 0, 0
    for seed, V, n, names in cases:
        fw = trends.load(traces, names["large"], "FW")
        cg = trends.load(traces, names["large"], "CONSGEN")
        thr = min(trends.final_best(fw), trends.final_best(cg)) * (1 + REL_THRESHOLD)
        g_fw, g_cg = trends.per_iteration_growth(fw), trends.per_iteration_growth(cg)
        a = g_cg >= 1.2 and 0.5 <= g_fw <= 2.0
        l_fw, l_cg = trends.lmo_calls_to_reach(fw, thr), trends.lmo_calls_to_reach(cg, thr)
        b = l_fw is not None and (l_cg is None or l_fw < l_cg)

        fw_s = trends.load(traces, names["small"], "FW")
        cg_s = trends.load(traces, names["small"], "CONSGEN")
        thr_s = min(trends.final_best(fw_s), trends.final_best(cg_s)) * (1 + REL_THRESHOLD)
        i_fw, i_cg = trends.iterations_to_reach(fw_s, thr_s), trends.iterations_to_reach(cg_s, thr_s)
        c = i_cg is not None and (i_fw is None or i_cg < i_fw)
        held_ab += a and b
        held_c += c
        lines.append(f"seed {seed} |V|={V} n={n}: (a) growth CONSGEN {g_cg:.2f} FW {g_fw:.2f} "
                     f"{'ok' if a else 'no'}; (b) LMO calls FW {l_fw} CONSGEN {l_cg} "
                     f"{'ok' if b else 'no'}; (c) iterations CONSGEN {i_cg} FW {i_fw} "
                     f"{'ok' if c else 'no'}")
    text = "\n".join(lines)
    (tmp_path / "trend_report.txt").write_text(text + "\n")
    print(text)
    frac = held_ab / TREND_SEEDS
    ok = acceptance(8, frac >= 0.7,
                    f"(a)+(b) hold on {held_ab}/{TREND_SEEDS} seeds (need 70%), "
                    f"(c) holds on {held_c}/{TREND_SEEDS}")
    assert ok, text


# -------------------------------------------------------------------------- 9


def _bench(out):
    argv = ["bench", "--kind", "mst", "--n", "8", "--gamma", "2", "--gamma", "5",
            "--seed", "0", "--seed", "1", "--method", "FW", "--method", "AFW",
            "--method", "FW_CONVHULL", "--method", "CONSGEN", "--max-iters", "60",
            "--workers", "2", "--out", str(out)]
    assert main(argv) == 0
    return {p.name: read_trace_csv(p, drop_timing=True) for p in sorted(out.glob("*.csv"))}


def test_9_bench_determinism(tmp_path, acceptance):
    a = _bench(tmp_path / "a")
    b = _bench(tmp_path / "b")
    ok = acceptance(9, a == b and len(a) == 17,
                    f"{len(a)} CSVs per run, identical modulo timing: {a == b}")
    assert ok
