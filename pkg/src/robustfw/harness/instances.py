"""Instance files: JSON schema, reading/writing, and the random generator.

Schema (version 1)::

    {"version": 1, "kind": "mst" | "tsp" | "vertex_list", "name": str,
     "graph": {"num_vertices": int, "edges": [[u, v], ...]},      # mst, tsp
     "vertices": [[...], ...],                                   # vertex_list
     "uncertainty": {"type": "box", "lower": [...], "upper": [...]}
                  | {"type": "budgeted", "c_lower": [...], "d": [...], "gamma": g}
                  | {"type": "scenarios", "scenarios": [[...], ...]},
     "constants": {"D": ., "M": ., "M_max": .},                 # optional
     "provenance": {...}}                                        # optional

Integral reals are written as JSON integers, all other reals as decimal
strings (shortest round-trip repr), so files are locale independent and
byte-stable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..core import ProblemInstance
from ..oracles import MAX_TSP_VERTICES, GraphInstance, MSTOracle, TSPOracle, VertexListOracle
from ..uncertainty import BoxSet, BudgetedSet, ScenarioHullSet, UncertaintySet

SCHEMA_VERSION = 1
KINDS = ("mst", "tsp", "vertex_list")


class InstanceError(ValueError):
    """Malformed or invalid instance file."""


@dataclass
class InstanceFile:
    kind: str
    uncertainty: UncertaintySet
    graph: Optional[GraphInstance] = None
    vertices: Optional[np.ndarray] = None
    name: str = "instance"
    constants: Optional[dict] = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InstanceError(f"unknown instance kind {self.kind!r}")
        if self.kind == "vertex_list":
            if self.vertices is None:
                raise InstanceError("vertex_list instance needs vertices")
        elif self.graph is None:
            raise InstanceError(f"{self.kind} instance needs a graph")

    def oracle(self):
        if self.kind == "mst":
            return MSTOracle(self.graph)
        if self.kind == "tsp":
            return TSPOracle(self.graph)
        return VertexListOracle(self.vertices)

    def to_problem(self) -> ProblemInstance:
        oracle = self.oracle()
        if self.constants and "D" in self.constants:
            D = float(self.constants["D"])
        else:
            D = oracle.diameter_bound()
        return ProblemInstance(oracle.dimension, oracle, self.uncertainty, D, self.name)


def _num(v: float):
    v = float(v)
    if not math.isfinite(v):
        raise InstanceError("non-finite number in instance")
    if v.is_integer() and abs(v) < 2**53:
        return int(v)
    return repr(v)


def _nums(values):
    return [_num(v) for v in np.asarray(values, dtype=float).ravel()]


def _parse_num(v) -> float:
    if isinstance(v, bool):
        raise InstanceError("booleans are not numbers")
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str):
        try:
            return float(v)
        except ValueError as exc:
            raise InstanceError(f"bad decimal string {v!r}") from exc
    raise InstanceError(f"expected a number, got {type(v).__name__}")


def _parse_vec(values) -> np.ndarray:
    if not isinstance(values, list):
        raise InstanceError("expected a list of numbers")
    return np.array([_parse_num(v) for v in values], dtype=float)


def uncertainty_to_dict(uset: UncertaintySet) -> dict:
    if isinstance(uset, BudgetedSet):
        return {"type": "budgeted", "c_lower": _nums(uset.c_lower), "d": _nums(uset.d),
                "gamma": _num(uset.gamma)}
    if isinstance(uset, BoxSet):
        return {"type": "box", "lower": _nums(uset.lower), "upper": _nums(uset.upper)}
    if isinstance(uset, ScenarioHullSet):
        return {"type": "scenarios", "scenarios": [_nums(s) for s in uset.scenarios]}
    raise InstanceError(f"cannot serialize {type(uset).__name__}")


def uncertainty_from_dict(data: dict) -> UncertaintySet:
    kind = data.get("type")
    try:
        if kind == "budgeted":
            return BudgetedSet(_parse_vec(data["c_lower"]), _parse_vec(data["d"]),
                               _parse_num(data["gamma"]))
        if kind == "box":
            return BoxSet(_parse_vec(data["lower"]), _parse_vec(data["upper"]))
        if kind == "scenarios":
            return ScenarioHullSet(np.array([_parse_vec(s) for s in data["scenarios"]]))
    except KeyError as exc:
        raise InstanceError(f"uncertainty set missing field {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, InstanceError):
            raise
        raise InstanceError(str(exc)) from exc
    raise InstanceError(f"unknown uncertainty type {kind!r}")


def instance_to_dict(inst: InstanceFile) -> dict:
    out = {"version": SCHEMA_VERSION, "kind": inst.kind, "name": inst.name}
    if inst.graph is not None:
        out["graph"] = {"num_vertices": inst.graph.num_vertices,
                        "edges": [[u, v] for u, v in inst.graph.edges]}
    if inst.vertices is not None:
        out["vertices"] = [_nums(v) for v in np.atleast_2d(inst.vertices)]
    out["uncertainty"] = uncertainty_to_dict(inst.uncertainty)
    if inst.constants:
        out["constants"] = {k: _num(v) for k, v in inst.constants.items()}
    if inst.provenance:
        out["provenance"] = inst.provenance
    return out


def instance_from_dict(data: dict) -> InstanceFile:
    if not isinstance(data, dict):
        raise InstanceError("instance must be a JSON object")
    if data.get("version") != SCHEMA_VERSION:
        raise InstanceError(f"unsupported schema version {data.get('version')!r}")
    kind = data.get("kind")
    if kind not in KINDS:
        raise InstanceError(f"unknown instance kind {kind!r}")
    if "uncertainty" not in data:
        raise InstanceError("instance has no uncertainty set")
    graph = vertices = None
    try:
        if kind in ("mst", "tsp"):
            g = data["graph"]
            graph = GraphInstance(int(g["num_vertices"]), tuple(tuple(e) for e in g["edges"]))
        else:
            vertices = np.array([_parse_vec(v) for v in data["vertices"]])
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"malformed feasible-region data: {exc}") from exc
    except ValueError as exc:
        raise InstanceError(str(exc)) from exc
    uset = uncertainty_from_dict(data["uncertainty"])
    constants = None
    if "constants" in data:
        constants = {k: _parse_num(v) for k, v in data["constants"].items()}
    inst = InstanceFile(kind, uset, graph, vertices, str(data.get("name", "instance")),
                        constants, dict(data.get("provenance", {})))
    dim = graph.num_edges if graph is not None else vertices.shape[1]
    if uset.dimension != dim:
        raise InstanceError(
            f"uncertainty dimension {uset.dimension} does not match decision dimension {dim}"
        )
    if kind == "tsp":
        try:
            TSPOracle(graph)
        except ValueError as exc:
            raise InstanceError(str(exc)) from exc
    return inst


def dumps_instance(inst: InstanceFile) -> str:
    return json.dumps(instance_to_dict(inst), separators=(",", ":")) + "\n"


def write_instance(inst: InstanceFile, path) -> None:
    Path(path).write_text(dumps_instance(inst), encoding="utf-8")


def read_instance(path) -> InstanceFile:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InstanceError(f"cannot read instance {path}: {exc}") from exc
    return instance_from_dict(data)


# ------------------------------------------------------------------ generation


def default_edge_probability(num_vertices: int) -> float:
    """Expected degree 12, so ``|E|`` is about ``6 |V|`` on sparse graphs."""
    if num_vertices <= 1:
        return 1.0
    return min(1.0, 12.0 / (num_vertices - 1))


def _random_connected_graph(rng, V, p, max_tries=1000):
    pairs = [(u, v) for u in range(V) for v in range(u + 1, V)]
    for _ in range(max_tries):
        keep = rng.random(len(pairs)) < p
        edges = tuple(e for e, k in zip(pairs, keep) if k)
        try:
            return GraphInstance(V, edges)
        except ValueError:
            continue
    raise InstanceError(f"no connected graph after {max_tries} draws (p={p})")


def generate_instance(kind: str, n: int, gamma: float, seed: int,
                      edge_prob: Optional[float] = None) -> InstanceFile:
    """Random budgeted-uncertainty instance, deterministic in ``seed``.

    ``n`` is the number of graph vertices for ``mst``/``tsp`` and the space
    dimension for ``vertex_list``.  Nominal costs are uniform integers in
    ``[1, 100]`` and deviations uniform integers in ``[1, c_lower_j]``.
    MST graphs are Erdos-Renyi with edge probability ``edge_prob`` (default
    :func:`default_edge_probability`), redrawn until connected; TSP graphs are
    complete.  Vertex lists hold ``min(4 n, 2^n)`` distinct random 0/1 points.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown instance kind {kind!r}")
    n = int(n)
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    rng = np.random.default_rng(seed)
    provenance = {"generator": "robustfw.generate_instance", "kind": kind, "n": n,
                  "gamma": _num(gamma), "seed": int(seed)}
    graph = vertices = None
    if kind == "mst":
        if n < 2:
            raise ValueError("mst instances need at least 2 vertices")
        p = default_edge_probability(n) if edge_prob is None else float(edge_prob)
        if not 0 < p <= 1:
            raise ValueError("edge probability must lie in (0, 1]")
        provenance["edge_prob"] = _num(p)
        graph = _random_connected_graph(rng, n, p)
        dim = graph.num_edges
    elif kind == "tsp":
        if not 3 <= n <= MAX_TSP_VERTICES:
            raise ValueError(f"tsp instances need 3 <= n <= {MAX_TSP_VERTICES}")
        graph = GraphInstance.complete(n)
        dim = graph.num_edges
    else:
        if not 1 <= n <= 20:
            raise ValueError("vertex_list instances need 1 <= n <= 20")
        count = min(4 * n, 2**n)
        codes = rng.choice(2**n, size=count, replace=False)
        vertices = ((codes[:, None] >> np.arange(n)[None, :]) & 1).astype(float)
        dim = n
    if not 0 <= gamma <= dim:
        raise ValueError(f"gamma must lie in [0, {dim}]")
    c_lower = rng.integers(1, 101, size=dim).astype(float)
    d = np.array([rng.integers(1, int(c) + 1) for c in c_lower], dtype=float)
    uset = BudgetedSet(c_lower, d, gamma)
    name = f"{kind}_n{n}_g{_num(gamma)}_s{seed}".replace(".", "p")
    return InstanceFile(kind, uset, graph, vertices, name, None, provenance)
