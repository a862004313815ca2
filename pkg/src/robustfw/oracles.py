"""Linear minimization oracles over combinatorial feasible regions.

Each oracle is a callable ``lmo(cost) -> vertex`` returning a minimizer of
``cost @ v`` over the extreme points of ``X``.  Costs are arbitrary reals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import as_point

__all__ = [
    "GraphInstance",
    "MSTOracle",
    "TSPOracle",
    "VertexListOracle",
    "lmo_mst",
    "lmo_tsp",
    "lmo_vertex_list",
]

MAX_TSP_VERTICES = 16


class UnionFind:
    __slots__ = ("parent", "rank")

    def __init__(self, n):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, a):
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


@dataclass(frozen=True, eq=False)
class GraphInstance:
    """Simple connected undirected graph; decision variables index ``edges``."""

    num_vertices: int
    edges: tuple

    def __post_init__(self):
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        V = int(self.num_vertices)
        if V < 1:
            raise ValueError("graph needs at least one vertex")
        seen = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < V and 0 <= v < V):
                raise ValueError(f"edge ({u}, {v}) references a missing vertex")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
        uf = UnionFind(V)
        components = V
        for u, v in edges:
            if uf.union(u, v):
                components -= 1
        if components != 1:
            raise ValueError("graph is disconnected")
        object.__setattr__(self, "num_vertices", V)
        object.__setattr__(self, "edges", edges)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @classmethod
    def complete(cls, num_vertices: int) -> "GraphInstance":
        V = num_vertices
        return cls(V, tuple((u, v) for u in range(V) for v in range(u + 1, V)))

    def is_complete(self) -> bool:
        V = self.num_vertices
        return self.num_edges == V * (V - 1) // 2


def _binary_diameter(k: int, n: int) -> float:
    # two 0/1 vectors with k ones each differ in at most min(2k, n) coordinates
    return math.sqrt(min(2 * k, n))


class MSTOracle:
    """Kruskal's algorithm; ties broken by edge index."""

    is_binary = True

    def __init__(self, graph: GraphInstance):
        self.graph = graph
        self.dimension = graph.num_edges
        self.cardinality = graph.num_vertices - 1

    def __call__(self, cost):
        return lmo_mst(self.graph, cost)

    def diameter_bound(self) -> float:
        return _binary_diameter(self.cardinality, self.dimension)


class TSPOracle:
    """Exact Held-Karp dynamic program over subsets (complete graphs, |V| <= 16)."""

    is_binary = True

    def __init__(self, graph: GraphInstance):
        if not graph.is_complete():
            raise ValueError("TSP oracle requires a complete graph")
        if graph.num_vertices > MAX_TSP_VERTICES:
            raise ValueError("instance too large for exact oracle")
        if graph.num_vertices < 3:
            raise ValueError("a tour needs at least 3 vertices")
        self.graph = graph
        self.dimension = graph.num_edges
        self.cardinality = graph.num_vertices

    def __call__(self, cost):
        return lmo_tsp(self.graph, cost)

    def diameter_bound(self) -> float:
        return _binary_diameter(self.cardinality, self.dimension)


class VertexListOracle:
    """Explicit list of extreme points; the first minimizer wins ties."""

    def __init__(self, vertices):
        V = np.asarray(vertices, dtype=float)
        if V.ndim == 1:
            V = V.reshape(-1, 1)
        if V.ndim != 2 or V.shape[0] == 0:
            raise ValueError("vertex list must be a nonempty list of equal-length points")
        if not np.all(np.isfinite(V)):
            raise ValueError("vertices must be finite")
        self.vertices = V
        self.dimension = V.shape[1]
        self.is_binary = bool(np.all((V == 0) | (V == 1)))

    def __call__(self, cost):
        return lmo_vertex_list(self, cost)

    def diameter_bound(self) -> float:
        V = self.vertices
        if len(V) <= 2000:
            sq = np.sum(V**2, axis=1)
            dist2 = sq[:, None] + sq[None, :] - 2 * V @ V.T
            exact = float(np.sqrt(max(dist2.max(), 0.0)))
            # rounding in the Gram trick can undershoot slightly
            return exact * (1 + 1e-12) + 1e-12
        return 2.0 * float(np.linalg.norm(V - V[0], axis=1).max())


def lmo_mst(graph: GraphInstance, cost) -> np.ndarray:
    """0/1 incidence vector of a minimum-cost spanning tree."""
    cost = as_point(cost, graph.num_edges, "cost")
    order = np.argsort(cost, kind="stable")
    uf = UnionFind(graph.num_vertices)
    x = np.zeros(graph.num_edges)
    need = graph.num_vertices - 1
    edges = graph.edges
    for e in order:
        if need == 0:
            break
        u, v = edges[e]
        if uf.union(u, v):
            x[e] = 1.0
            need -= 1
    return x


def _cost_matrix(graph: GraphInstance, cost) -> np.ndarray:
    V = graph.num_vertices
    W = np.full((V, V), np.inf)
    for e, (u, v) in enumerate(graph.edges):
        W[u, v] = W[v, u] = cost[e]
    return W


def _popcount_layers(m: int):
    masks = np.arange(1 << m)
    counts = np.zeros(1 << m, dtype=np.int64)
    for b in range(m):
        counts += (masks >> b) & 1
    return [masks[counts == s] for s in range(m + 1)]


def lmo_tsp(graph: GraphInstance, cost) -> np.ndarray:
    """0/1 edge-incidence vector of a minimum-cost Hamiltonian cycle."""
    if graph.num_vertices > MAX_TSP_VERTICES:
        raise ValueError("instance too large for exact oracle")
    if not graph.is_complete():
        raise ValueError("TSP oracle requires a complete graph")
    cost = as_point(cost, graph.num_edges, "cost")
    V = graph.num_vertices
    if V < 3:
        raise ValueError("a tour needs at least 3 vertices")
    W = _cost_matrix(graph, cost)
    m = V - 1  # vertex j + 1 is bit j; the tour starts and ends at vertex 0
    inner = W[1:, 1:]
    dp = np.full((1 << m, m), np.inf)
    parent = np.full((1 << m, m), -1, dtype=np.int64)
    for j in range(m):
        dp[1 << j, j] = W[0, j + 1]
    bits = 1 << np.arange(m)
    layers = _popcount_layers(m)
    for size in range(1, m):
        L = layers[size]
        # vals[i, j, k]: reach k from mask L[i] ending at j
        vals = dp[L][:, :, None] + inner[None, :, :]
        best_j = np.argmin(vals, axis=1)  # first index on ties
        best = np.take_along_axis(vals, best_j[:, None, :], axis=1)[:, 0, :]
        free = (L[:, None] & bits[None, :]) == 0
        rows, ks = np.nonzero(free)
        new_masks = L[rows] | bits[ks]
        dp[new_masks, ks] = best[rows, ks]
        parent[new_masks, ks] = best_j[rows, ks]
    full = (1 << m) - 1
    closing = dp[full] + W[1:, 0]
    last = int(np.argmin(closing))
    tour = [0]
    mask, j = full, last
    while j != -1:
        tour.append(j + 1)
        prev = int(parent[mask, j])
        mask ^= 1 << j
        j = prev
    index = {}
    for e, (u, v) in enumerate(graph.edges):
        index[(u, v)] = index[(v, u)] = e
    x = np.zeros(graph.num_edges)
    for a, b in zip(tour, tour[1:] + [0]):
        x[index[(a, b)]] = 1.0
    return x


def lmo_vertex_list(oracle: VertexListOracle, cost) -> np.ndarray:
    cost = as_point(cost, oracle.dimension, "cost")
    return oracle.vertices[int(np.argmin(oracle.vertices @ cost))].copy()
