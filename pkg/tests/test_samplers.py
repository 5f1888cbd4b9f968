import io
import math

import numpy as np
import pytest

from botnet_rgg.geometry import RadiusTooLargeError, probability_for_radius, torus_distances_from
from botnet_rgg.samplers import (
    InvalidParamsError,
    ModelParams,
    derive_rng,
    geometric_edges,
    read_botnet,
    read_locations,
    sample_alternative,
    sample_null,
    write_botnet,
    write_locations,
)
from tests.oracles import torus_edges_kdtree


def test_model_params_density_forms():
    a = ModelParams.from_density(1000, 2, avg_degree=10)
    assert a.p == 0.01 and a.avg_degree == pytest.approx(10)
    b = ModelParams.from_density(1000, 2, r=a.r)
    assert b.p == pytest.approx(a.p, rel=1e-12)
    c = ModelParams.from_density(1000, 2, p=0.01, k=5)
    assert c.k == 5 and c.with_k(0).k == 0


def test_model_params_validation():
    with pytest.raises(RadiusTooLargeError):
        ModelParams.from_density(2, 2, r=0.5 * math.sqrt(2) * 1.01)
    with pytest.raises(RadiusTooLargeError):
        ModelParams(100, 2, 0.9)
    with pytest.raises(InvalidParamsError):
        ModelParams(1, 2, 0.1)
    with pytest.raises(InvalidParamsError):
        ModelParams(10, 2, 0.1, k=11)
    with pytest.raises(InvalidParamsError):
        ModelParams.from_density(10, 2, p=0.1, r=0.1)


def test_derive_rng_streams():
    a = derive_rng(1, "x", 3).random(4)
    assert np.array_equal(a, derive_rng(1, "x", 3).random(4))
    assert not np.array_equal(a, derive_rng(1, "x", 4).random(4))
    assert not np.array_equal(a, derive_rng(1, "y", 3).random(4))
    assert not np.array_equal(a, derive_rng(2, "x", 3).random(4))


@pytest.mark.parametrize("d, n, r", [(2, 800, 0.03), (3, 600, 0.08), (5, 400, 0.2), (7, 300, 0.3), (2, 50, 0.5)])
def test_geometric_edges_match_kdtree(d, n, r):
    x = np.random.default_rng(d * n).random((n, d))
    ours = {tuple(e) for e in geometric_edges(x, r).tolist()}
    assert ours == torus_edges_kdtree(x, r)


def test_null_sample_determinism_and_geometry():
    params = ModelParams.from_density(1000, 2, avg_degree=10)
    s1 = sample_null(params, 42)
    s2 = sample_null(params, 42)
    assert s1.graph == s2.graph and np.array_equal(s1.locations, s2.locations)
    assert s1.botnet == frozenset()
    assert sample_null(params, 43).graph != s1.graph
    # every pair is an edge exactly when the torus distance is at most r
    for i in range(0, 1000, 97):
        near = set(np.flatnonzero(torus_distances_from(s1.locations[i], s1.locations) <= params.r)) - {i}
        assert near == set(s1.graph.neighbors(i).tolist())


def test_null_edge_count_within_four_sd():
    params = ModelParams.from_density(1000, 2, avg_degree=10)
    pairs = 1000 * 999 / 2
    m = sample_null(params, 7).graph.m
    # pair indicators are pairwise independent, so the binomial variance applies
    assert abs(m - pairs * params.p) <= 4 * math.sqrt(pairs * params.p * (1 - params.p))


def test_null_edge_density_over_replicates():
    params = ModelParams.from_density(500, 3, avg_degree=8)
    ms = [sample_null(params, derive_rng(5, "density", i)).graph.m for i in range(200)]
    expected = 500 * 499 / 2 * params.p
    assert abs(np.mean(ms) - expected) <= 4 * np.std(ms) / math.sqrt(len(ms))


def test_alternative_structure():
    params = ModelParams.from_density(1000, 3, avg_degree=10, k=10)
    s = sample_alternative(params, 9)
    assert len(s.botnet) == 10
    bot = s.botnet_array()
    keep = np.setdiff1d(np.arange(1000), bot)
    sub, ids = s.graph.induced_subgraph(keep)
    ref = {(int(ids[i]), int(ids[j])) for i, j in sub.edges().tolist()}
    geo = {e for e in torus_edges_kdtree(s.locations, params.r) if e[0] not in s.botnet and e[1] not in s.botnet}
    assert ref == geo
    assert s.graph == sample_alternative(params, 9).graph


def test_alternative_botnet_degree_binomial():
    params = ModelParams.from_density(1000, 2, avg_degree=10, k=1)
    degs = []
    for i in range(1000):
        s = sample_alternative(params, derive_rng(3, "botdeg", i))
        degs.append(s.graph.degree(next(iter(s.botnet))))
    mean = (1000 - 1) * params.p
    se = math.sqrt(mean * (1 - params.p) / 1000)
    assert abs(np.mean(degs) - mean) <= 4 * se


def test_alternative_edge_count_matches_null():
    params = ModelParams.from_density(600, 2, avg_degree=10, k=30)
    alt = [sample_alternative(params, derive_rng(1, "alt", i)).graph.m for i in range(150)]
    null = [sample_null(params.with_k(0), derive_rng(1, "null", i)).graph.m for i in range(150)]
    se = math.sqrt(np.var(alt) / 150 + np.var(null) / 150)
    assert abs(np.mean(alt) - np.mean(null)) <= 4 * se


def test_all_botnet_is_erdos_renyi():
    params = ModelParams(300, 2, 0.05, k=300)
    ms = [sample_alternative(params, derive_rng(0, "er", i)).graph.m for i in range(100)]
    pairs = 300 * 299 / 2
    assert abs(np.mean(ms) - pairs * 0.05) <= 4 * math.sqrt(pairs * 0.05 * 0.95 / 100)


def test_alternative_requires_botnet():
    with pytest.raises(InvalidParamsError):
        sample_alternative(ModelParams(100, 2, 0.01, k=0), 0)


def test_locations_and_botnet_files_round_trip():
    s = sample_alternative(ModelParams.from_density(50, 3, avg_degree=4, k=3), 1)
    buf = io.StringIO()
    write_locations(s.locations, buf)
    assert np.array_equal(read_locations(io.StringIO(buf.getvalue())), s.locations)
    buf = io.StringIO()
    write_botnet(s.botnet, buf)
    assert read_botnet(io.StringIO(buf.getvalue())) == s.botnet


def test_probability_matches_empirical_pair_rate():
    # location-level check that the ball volume formula is right on the torus
    rng = np.random.default_rng(4)
    d, r = 4, 0.3
    x, y = rng.random((2, 200_000, d))
    diff = np.abs(x - y)
    dist = np.sqrt((np.minimum(diff, 1 - diff) ** 2).sum(axis=1))
    p = probability_for_radius(r, d)
    assert abs((dist <= r).mean() - p) <= 4 * math.sqrt(p * (1 - p) / 200_000)
