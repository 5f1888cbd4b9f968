"""Slow, obviously-correct reference implementations used as test oracles."""

from __future__ import annotations

import itertools

import numpy as np
from scipy.spatial import cKDTree

from botnet_rgg.graph import Graph


def random_graph(n: int, p: float, rng: np.random.Generator) -> Graph:
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    return Graph.from_edges(n, np.column_stack([iu[keep], ju[keep]]))


def adjacency_matrix(g: Graph) -> np.ndarray:
    a = np.zeros((g.n, g.n), dtype=bool)
    e = g.edges()
    a[e[:, 0], e[:, 1]] = True
    a[e[:, 1], e[:, 0]] = True
    return a


def floyd_warshall(g: Graph) -> np.ndarray:
    a = adjacency_matrix(g)
    dist = np.where(a, 1.0, np.inf)
    np.fill_diagonal(dist, 0.0)
    for k in range(g.n):
        dist = np.minimum(dist, dist[:, [k]] + dist[[k], :])
    return dist


def brute_average_distance(g: Graph) -> tuple[int, int]:
    """(connected unordered pairs, sum of their distances)."""
    dist = floyd_warshall(g)
    iu, ju = np.triu_indices(g.n, 1)
    dd = dist[iu, ju]
    finite = np.isfinite(dd)
    return int(finite.sum()), int(dd[finite].sum())


def brute_mis_size(a: np.ndarray) -> int:
    """Largest independent set by trying every subset, largest first."""
    t = len(a)
    for size in range(t, 0, -1):
        for sub in itertools.combinations(range(t), size):
            if not a[np.ix_(sub, sub)].any():
                return size
    return 0


def brute_clustering(g: Graph) -> tuple[int, int]:
    """Closed and total ordered triples (i; j, k) with j != k both adjacent to i."""
    a = adjacency_matrix(g)
    closed = total = 0
    for i in range(g.n):
        for j in range(g.n):
            for k in range(g.n):
                if j != k and a[i, j] and a[i, k]:
                    total += 1
                    closed += bool(a[j, k])
    return closed, total


def torus_edges_kdtree(locations: np.ndarray, r: float) -> set[tuple[int, int]]:
    tree = cKDTree(locations, boxsize=1.0)
    return set(tree.query_pairs(r))
