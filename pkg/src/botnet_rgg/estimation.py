"""Estimate the embedding dimension, edge probability and connection radius
from an observed graph."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from functools import lru_cache

import numba
import numpy as np

from botnet_rgg.geometry import radius_for_probability
from botnet_rgg.graph import Graph
from botnet_rgg.numerics import DomainError, regularized_incomplete_beta

DEFAULT_D_MAX = 64


class NoWedgesError(ValueError):
    """The graph has no path of length two, so clustering is undefined."""


@lru_cache(maxsize=None)
def analytic_clustering(d: int) -> float:
    """Null-model clustering coefficient in dimension ``d``.

    ``P(Beta((d+1)/2, 1/2) <= 3/4) + P(Beta((d+1)/2, (d+1)/2) <= 1/4)``.
    """
    if int(d) != d or d < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {d}")
    a = (d + 1) / 2
    return regularized_incomplete_beta(a, 0.5, 0.75) + regularized_incomplete_beta(a, a, 0.25)


@numba.njit(cache=True)
def _triangles_and_wedges(indptr, indices):
    # each triangle counted once via its edges (u < v) and common neighbours w > v
    n = len(indptr) - 1
    tri = 0
    wedges = 0
    for u in range(n):
        du = indptr[u + 1] - indptr[u]
        wedges += du * (du - 1) // 2
        for a in range(indptr[u], indptr[u + 1]):
            v = indices[a]
            if v <= u:
                continue
            i = a + 1
            j = indptr[v]
            iend = indptr[u + 1]
            jend = indptr[v + 1]
            while i < iend and j < jend:
                x = indices[i]
                y = indices[j]
                if x == y:
                    if x > v:
                        tri += 1
                    i += 1
                    j += 1
                elif x < y:
                    i += 1
                else:
                    j += 1
    return tri, wedges


def triangle_and_wedge_counts(g: Graph) -> tuple[int, int]:
    """Number of triangles and of unordered wedges (paths of length two)."""
    tri, wedges = _triangles_and_wedges(g.indptr, g.indices)
    return int(tri), int(wedges)


def empirical_clustering(g: Graph) -> float:
    """Fraction of ordered wedges ``(i; j, k)`` whose endpoints are adjacent.

    Equals ``6 * triangles / sum_i deg_i (deg_i - 1)``.
    """
    tri, wedges = triangle_and_wedge_counts(g)
    if wedges == 0:
        raise NoWedgesError("graph has no wedges")
    return 3.0 * tri / wedges


def clustering_table(d_max: int = DEFAULT_D_MAX) -> np.ndarray:
    """``analytic_clustering(d)`` for ``d = 2..d_max`` (index 0 is ``d = 2``)."""
    return np.array([analytic_clustering(d) for d in range(2, d_max + 1)])


def nearest_dimension(c_hat: float, d_max: int = DEFAULT_D_MAX) -> tuple[int, bool]:
    """Dimension whose analytic clustering is closest to ``c_hat``.

    Ties go to the smaller dimension; the flag reports whether one occurred.
    """
    if d_max < 2:
        raise ValueError("d_max must be >= 2")
    gaps = np.abs(clustering_table(d_max) - c_hat)
    best = int(np.argmin(gaps))
    tied = int(np.sum(gaps == gaps[best])) > 1
    return best + 2, tied


def estimate_dimension(g: Graph, d_max: int = DEFAULT_D_MAX) -> int:
    return nearest_dimension(empirical_clustering(g), d_max)[0]


def estimate_edge_probability(g: Graph) -> float:
    """Edge density ``m / (n choose 2)``."""
    if g.n < 2:
        raise ValueError("need at least two vertices")
    return g.m / (g.n * (g.n - 1) / 2)


def estimate_radius(g: Graph, d_hat: int) -> float:
    return radius_for_probability(estimate_edge_probability(g), d_hat)


@dataclass(frozen=True)
class EstimationReport:
    c_hat: float
    d_hat: int
    p_hat: float
    r_hat: float | None
    triangle_count: int
    wedge_count: int
    d_tie: bool = False
    r_error: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def estimate_parameters(g: Graph, d_max: int = DEFAULT_D_MAX) -> EstimationReport:
    """Clustering-based dimension, density-based edge probability and the
    radius implied by both. ``r_hat`` is ``None`` (with ``r_error`` set) when
    the density admits no radius at ``d_hat``."""
    tri, wedges = triangle_and_wedge_counts(g)
    if wedges == 0:
        raise NoWedgesError("graph has no wedges")
    c_hat = 3.0 * tri / wedges
    d_hat, tied = nearest_dimension(c_hat, d_max)
    p_hat = estimate_edge_probability(g)
    try:
        r_hat, r_error = radius_for_probability(p_hat, d_hat), None
    except DomainError as exc:
        r_hat, r_error = None, str(exc)
    return EstimationReport(c_hat, d_hat, p_hat, r_hat, tri, wedges, tied, r_error)

