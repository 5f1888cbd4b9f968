import json

import numpy as np
import pytest

from botnet_rgg.estimation import (
    NoWedgesError,
    analytic_clustering,
    clustering_table,
    empirical_clustering,
    estimate_dimension,
    estimate_edge_probability,
    estimate_parameters,
    estimate_radius,
    nearest_dimension,
    triangle_and_wedge_counts,
)
from botnet_rgg.graph import Graph
from botnet_rgg.numerics import DomainError
from botnet_rgg.samplers import ModelParams, derive_rng, sample_null
from tests.oracles import brute_clustering, random_graph

# frozen from independent quadrature of the two beta probabilities
C2 = 0.586503328433656
C3 = 0.46875
C4 = 0.3797549926504839


def complete(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


@pytest.mark.parametrize("d, expected", [(2, C2), (3, C3), (4, C4)])
def test_analytic_clustering_values(d, expected):
    assert analytic_clustering(d) == pytest.approx(expected, rel=1e-12)


def test_analytic_clustering_strictly_decreasing():
    table = clustering_table(64)
    assert len(table) == 63
    assert np.all(np.diff(table) < 0)
    assert np.all((table > 0) & (table < 1))
    assert analytic_clustering(64) < analytic_clustering(2)
    with pytest.raises(DomainError):
        analytic_clustering(1)


def test_empirical_clustering_examples():
    assert empirical_clustering(complete(4)) == 1.0
    assert empirical_clustering(Graph.from_edges(6, [(0, i) for i in range(1, 6)])) == 0.0
    paw = Graph.from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)])
    closed, total = brute_clustering(paw)
    assert empirical_clustering(paw) == closed / total == 0.6
    with pytest.raises(NoWedgesError):
        empirical_clustering(Graph.from_edges(4, [(0, 1), (2, 3)]))


def test_empirical_clustering_matches_triple_enumeration():
    rng = np.random.default_rng(13)
    checked = 0
    while checked < 60:
        n = int(rng.integers(3, 31))
        g = random_graph(n, rng.uniform(0.05, 0.8), rng)
        closed, total = brute_clustering(g)
        if total == 0:
            continue
        tri, wedges = triangle_and_wedge_counts(g)
        assert (6 * tri, 2 * wedges) == (closed, total)
        assert empirical_clustering(g) == pytest.approx(closed / total, rel=1e-15)
        checked += 1


def test_nearest_dimension():
    assert nearest_dimension(C3) == (3, False)
    assert nearest_dimension(1.0) == (2, False)
    assert nearest_dimension(0.0)[0] == 64
    assert nearest_dimension(0.0, d_max=10)[0] == 10


def test_estimate_dimension_on_complete_graph():
    assert estimate_dimension(complete(5)) == 2


def test_edge_probability_examples():
    assert estimate_edge_probability(complete(6)) == 1.0
    assert estimate_edge_probability(Graph.from_edges(5, [])) == 0.0
    assert estimate_edge_probability(Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])) == 0.5


def test_estimate_radius_domain():
    with pytest.raises(DomainError):
        estimate_radius(Graph.from_edges(5, []), 2)


def test_report_flags_missing_radius():
    rep = estimate_parameters(complete(5))
    assert rep.d_hat == 2 and rep.p_hat == 1.0
    assert rep.r_hat is None and rep.r_error
    obj = json.loads(rep.to_json())
    assert obj["triangle_count"] == 10 and obj["wedge_count"] == 30


def test_radius_estimate_concentrates_on_null_samples():
    params = ModelParams.from_density(10_000, 2, avg_degree=10)
    ok = 0
    for i in range(100):
        g = sample_null(params, derive_rng(6, "radius", i)).graph
        rep = estimate_parameters(g)
        ok += rep.d_hat == 2 and 0.98 <= rep.r_hat / params.r <= 1.02
    assert ok >= 95
