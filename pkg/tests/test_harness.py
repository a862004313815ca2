import csv
import itertools
import json
import subprocess
import sys

import numpy as np
import pytest

from _support import all_spanning_trees, all_tours
from robustfw import BoxSet, BudgetedSet, GraphInstance, ProblemInstance, ScenarioHullSet
from robustfw import MSTOracle, SolverConfig, TSPOracle, VertexListOracle
from robustfw.harness import (
    TRACE_HEADER,
    ExperimentSpec,
    GeneratorParams,
    InstanceError,
    InstanceFile,
    brute_force_optimum,
    dumps_instance,
    enumerate_vertices,
    generate_instance,
    read_instance,
    read_trace_csv,
    run_experiment,
    write_instance,
)
from robustfw.harness.cli import main


def _bfs_connected(graph):
    adj = {v: set() for v in range(graph.num_vertices)}
    for u, v in graph.edges:
        adj[u].add(v)
        adj[v].add(u)
    seen, todo = {0}, [0]
    while todo:
        for w in adj[todo.pop()] - seen:
            seen.add(w)
            todo.append(w)
    return len(seen) == graph.num_vertices


# ------------------------------------------------------------- instance files


def test_generate_examples():
    inst = generate_instance("mst", 10, 5, 7)
    assert _bfs_connected(inst.graph)
    assert np.all(inst.uncertainty.d > 0)
    assert inst.uncertainty.gamma <= inst.uncertainty.dimension
    assert np.all((inst.uncertainty.c_lower >= 1) & (inst.uncertainty.c_lower <= 100))
    assert np.all(inst.uncertainty.d <= inst.uncertainty.c_lower)
    tsp = generate_instance("tsp", 8, 10, 1)
    assert tsp.graph.is_complete() and tsp.uncertainty.dimension == 28


def test_generate_is_byte_deterministic():
    for kind, n, g in (("mst", 12, 3.5), ("tsp", 6, 2), ("vertex_list", 7, 1.25)):
        a = dumps_instance(generate_instance(kind, n, g, 3))
        b = dumps_instance(generate_instance(kind, n, g, 3))
        assert a == b
        assert a != dumps_instance(generate_instance(kind, n, g, 4))


def test_generate_errors():
    with pytest.raises(ValueError):
        generate_instance("tsp", 17, 1, 0)
    with pytest.raises(ValueError):
        generate_instance("mst", 5, 1000, 0)
    with pytest.raises(ValueError):
        generate_instance("cube", 5, 1, 0)


@pytest.mark.parametrize("uset", [
    BudgetedSet([1.5, 2.0, 0.1], [0.25, 1.0, 3.0], 1.3),
    BoxSet([0.0, -1.0, 1.0 / 3.0], [1.0, 2.0, 0.5]),
    ScenarioHullSet([[0.1, 0.2, 0.3], [1.0, -2.0, 1e-17]]),
])
def test_round_trip(tmp_path, uset):
    inst = InstanceFile("mst", uset, GraphInstance.complete(3), name="rt",
                        constants={"D": 2.0, "M": 1.0, "M_max": 3.0})
    p = tmp_path / "a.json"
    write_instance(inst, p)
    back = read_instance(p)
    assert dumps_instance(back) == p.read_text()
    d1 = json.loads(p.read_text())["uncertainty"]
    for key, val in d1.items():
        if key != "type":
            got = getattr(back.uncertainty, "scenarios" if key == "scenarios" else key)
            assert np.array_equal(np.asarray(got, float),
                                  np.asarray(getattr(uset, key), float))


def test_read_rejects_bad_files(tmp_path):
    good = json.loads(dumps_instance(generate_instance("mst", 5, 1, 0)))
    cases = {
        "version": dict(good, version=99),
        "kind": dict(good, kind="cube"),
        "dim": dict(good, uncertainty=dict(good["uncertainty"], d=[1, 2])),
    }
    for name, data in cases.items():
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(data))
        with pytest.raises(InstanceError):
            read_instance(p)
    p = tmp_path / "junk.json"
    p.write_text("{not json")
    with pytest.raises(InstanceError):
        read_instance(p)
    with pytest.raises(InstanceError):
        read_instance(tmp_path / "missing.json")


# ---------------------------------------------------------------- brute force


def test_enumeration_counts():
    for V in (3, 4, 5):
        g = GraphInstance.complete(V)
        oracle = MSTOracle(g)
        uset = BoxSet(np.zeros(g.num_edges), np.ones(g.num_edges))
        trees = enumerate_vertices(ProblemInstance(g.num_edges, oracle, uset, 1.0))
        assert len(trees) == V ** (V - 2)  # Cayley
        assert {tuple(t) for t in trees} == {tuple(t) for t in all_spanning_trees(g)}
        tours = enumerate_vertices(ProblemInstance(g.num_edges, TSPOracle(g), uset, 1.0))
        assert {tuple(t) for t in tours} == {tuple(t) for t in all_tours(g)}
    g8 = GraphInstance.complete(8)
    big = ProblemInstance(28, MSTOracle(g8), BoxSet(np.zeros(28), np.ones(28)), 1.0)
    with pytest.raises(ValueError):
        enumerate_vertices(big)


def test_brute_force_examples():
    inst = ProblemInstance(1, VertexListOracle([[-1.0], [1.0]]), BoxSet([-1.0], [1.0]), 2.0)
    f, x = brute_force_optimum(inst)
    assert f == pytest.approx(0.0, abs=1e-12) and x[0] == pytest.approx(0.0, abs=1e-12)
    g = GraphInstance.complete(3)
    c = np.array([2.0, 1.0, 5.0])
    f, x = brute_force_optimum(ProblemInstance(3, MSTOracle(g), BoxSet(c, c), 2.0))
    assert f == min(c @ t for t in all_spanning_trees(g))


def test_brute_force_k4_budgeted_matches_grid():
    g = GraphInstance.complete(4)
    rng = np.random.default_rng(0)
    # d <= 0.05 at a theta step of 0.05 keeps the grid within 1e-2 of the optimum
    uset = BudgetedSet(rng.uniform(0, 1, 6), rng.uniform(0.01, 0.05, 6), 1.0)
    f, x = brute_force_optimum(ProblemInstance(6, MSTOracle(g), uset, 3.0))
    trees = all_spanning_trees(g)
    steps = 20
    pts = np.array([p for p in itertools.product(range(steps + 1), repeat=6)
                    if sum(p) <= steps], float) / steps
    C = uset.c_lower + pts * uset.d
    maxmin = (C @ trees.T).min(axis=1).max()
    assert maxmin <= f + 1e-9
    assert f == pytest.approx(maxmin, abs=1e-2)
    assert uset.support_max(x)[0] == pytest.approx(f)


# ----------------------------------------------------------------- experiments


def _spec(tmp_path, methods=("FW", "CONSGEN"), **kw):
    inst = [GeneratorParams("mst", 6, 2.0, 1)]
    return ExperimentSpec(inst, list(methods), tmp_path, **kw)


def test_experiment_file_contract(tmp_path):
    report = run_experiment(_spec(tmp_path, config=SolverConfig(max_iters=30)))
    assert report.ok and len(report.completed) == 2
    files = sorted(p.name for p in tmp_path.iterdir())
    assert files == ["mst_n6_g2_s1__CONSGEN.csv", "mst_n6_g2_s1__FW.csv", "summary.csv"]
    raw = (tmp_path / "mst_n6_g2_s1__FW.csv").read_text()
    assert raw.splitlines()[0] == ",".join(TRACE_HEADER)
    assert raw.endswith("\n")
    rows = read_trace_csv(tmp_path / "mst_n6_g2_s1__FW.csv")
    assert rows[0]["dual_bound"] == "" and len(rows) == 31
    with open(tmp_path / "summary.csv", newline="") as fh:
        summary = list(csv.DictReader(fh))
    assert {r["method"] for r in summary} == {"FW", "CONSGEN"}


def _numeric_content(folder):
    out = {}
    for p in sorted(folder.glob("*.csv")):
        rows = read_trace_csv(p, drop_timing=True)
        out[p.name] = rows
    return out


@pytest.mark.parametrize("workers", [1, 2])
def test_replay_determinism(tmp_path, workers):
    config = SolverConfig(max_iters=40, epsilon=0.05)
    methods = ("FW", "AFW", "FW_CONVHULL", "CONSGEN")
    a = run_experiment(_spec(tmp_path / "a", methods, config=config, workers=workers))
    b = run_experiment(_spec(tmp_path / "b", methods, config=config, workers=workers))
    assert a.ok and b.ok
    assert _numeric_content(tmp_path / "a") == _numeric_content(tmp_path / "b")


def test_bad_instance_keeps_partial_results(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    spec = ExperimentSpec([bad, GeneratorParams("mst", 5, 1.0, 0)], ["FW"], tmp_path / "out")
    report = run_experiment(spec)
    assert not report.ok and len(report.completed) == 1
    assert (tmp_path / "out" / "summary.csv").exists()


def test_spec_from_dict_expands_sweep():
    spec = ExperimentSpec.from_dict({
        "instances": [{"kind": "mst", "n": 20, "gamma": [3, 6, 9], "seed": [0, 1]}],
        "methods": ["FW", "CONSGEN"], "output": "x", "epsilon": 0.2})
    assert len(spec.instances) == 6 and spec.config.epsilon == 0.2
    with pytest.raises(ValueError):
        ExperimentSpec.from_dict({"instances": [], "methods": ["FW"]})


# ------------------------------------------------------------------------ CLI


def test_cli_gen_solve_bench(tmp_path, capsys):
    inst = tmp_path / "i.json"
    assert main(["gen", "--kind", "mst", "--n", "6", "--gamma", "2", "--seed", "3",
                 "--out", str(inst)]) == 0
    first = inst.read_text()
    assert main(["gen", "--kind", "mst", "--n", "6", "--gamma", "2", "--seed", "3",
                 "--out", str(inst)]) == 0
    assert inst.read_text() == first
    trace = tmp_path / "t.csv"
    assert main(["solve", "--instance", str(inst), "--method", "CONSGEN",
                 "--out", str(trace)]) == 0
    assert trace.read_text().startswith(",".join(TRACE_HEADER))
    line = capsys.readouterr().out.strip().splitlines()[-1]
    assert json.loads(line)["method"] == "CONSGEN"
    out = tmp_path / "bench"
    assert main(["bench", "--instance", str(inst), "--method", "FW", "--method", "AFW",
                 "--max-iters", "20", "--out", str(out)]) == 0
    assert len(list(out.glob("*.csv"))) == 3


def test_cli_exit_codes(tmp_path):
    assert main(["solve", "--instance", str(tmp_path / "nope.json")]) == 3
    assert main(["solve", "--bogus"]) == 2
    assert main(["gen", "--kind", "tsp", "--n", "20", "--gamma", "1"]) == 2
    assert main([]) == 2
    assert main(["solve", "--instance", str(tmp_path / "nope.json"), "--max-iters", "0"]) == 2


def test_cli_module_entry_point(tmp_path):
    out = tmp_path / "g.json"
    proc = subprocess.run([sys.executable, "-m", "robustfw", "gen", "--kind", "vertex_list",
                           "--n", "4", "--gamma", "1", "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert read_instance(out).kind == "vertex_list"
    proc = subprocess.run([sys.executable, "-m", "robustfw", "frobnicate"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
