"""Exhaustive ground truth for small instances."""

from __future__ import annotations

import itertools

import numpy as np

from ..core import ProblemInstance
from ..lp import convhull_minmax
from ..oracles import GraphInstance, MSTOracle, TSPOracle, UnionFind, VertexListOracle

MAX_ENUM_GRAPH_VERTICES = 7
MAX_ENUM_VERTEX_LIST = 10_000


def enumerate_spanning_trees(graph: GraphInstance) -> np.ndarray:
    """All spanning-tree incidence vectors, one per row."""
    V, E = graph.num_vertices, graph.num_edges
    trees = []
    for subset in itertools.combinations(range(E), V - 1):
        uf = UnionFind(V)
        if all(uf.union(*graph.edges[e]) for e in subset):
            x = np.zeros(E)
            x[list(subset)] = 1.0
            trees.append(x)
    return np.array(trees)


def enumerate_tours(graph: GraphInstance) -> np.ndarray:
    """All Hamiltonian cycles of a complete graph (each once, ignoring direction)."""
    V = graph.num_vertices
    index = {}
    for e, (u, v) in enumerate(graph.edges):
        index[(u, v)] = index[(v, u)] = e
    tours = []
    for perm in itertools.permutations(range(1, V)):
        if perm[0] > perm[-1]:
            continue
        x = np.zeros(graph.num_edges)
        order = (0,) + perm
        for a, b in zip(order, order[1:] + (0,)):
            x[index[(a, b)]] = 1.0
        tours.append(x)
    return np.array(tours)


def enumerate_vertices(instance: ProblemInstance) -> np.ndarray:
    oracle = instance.lmo
    if isinstance(oracle, VertexListOracle):
        if len(oracle.vertices) > MAX_ENUM_VERTEX_LIST:
            raise ValueError("vertex list too large to enumerate")
        return oracle.vertices.copy()
    if isinstance(oracle, (MSTOracle, TSPOracle)):
        if oracle.graph.num_vertices > MAX_ENUM_GRAPH_VERTICES:
            raise ValueError("graph too large to enumerate")
        if isinstance(oracle, MSTOracle):
            return enumerate_spanning_trees(oracle.graph)
        return enumerate_tours(oracle.graph)
    raise ValueError(f"cannot enumerate the feasible region of {type(oracle).__name__}")


def brute_force_optimum(instance: ProblemInstance, tol: float = 1e-9):
    """``(f_star, x_star)`` from the hull minimization over every vertex of X."""
    V = enumerate_vertices(instance)
    res = convhull_minmax(V, instance.uncertainty, tol)
    return res.value, res.x_conv
