"""Isolated-star and average-distance tests for the presence of a botnet,
plus Monte Carlo calibration of their rejection thresholds."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Literal, Sequence

import numba
import numpy as np

from botnet_rgg.geometry import kissing_number
from botnet_rgg.graph import Graph, average_graph_distance
from botnet_rgg.parallel import ordered_map
from botnet_rgg.samplers import InvalidParamsError, ModelParams, derive_rng, sample_null

DEFAULT_EXACT_CAP = 32
MAX_EXACT_CAP = 64
DEFAULT_EPSILON = 0.1

StarMethod = Literal["exact", "greedy", "auto"]
STATISTICS = ("max_star", "avg_distance")

_METHOD_CODES = {"auto": 0, "greedy": 1, "exact": 2}


class ExactCapExceededError(ValueError):
    """Vertex degree above the cap for exact independent-set search."""


@numba.njit(cache=True)
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return np.int64((x * np.uint64(0x0101010101010101)) >> np.uint64(56))


@numba.njit(cache=True)
def _mis_bb(full, adj, t):
    # depth-first branch and bound over candidate bitmasks, explicit stack
    one = np.uint64(1)
    zero = np.uint64(0)
    stack_cand = np.empty(2 * 64 + 2, dtype=np.uint64)
    stack_size = np.empty(2 * 64 + 2, dtype=np.int64)
    stack_cand[0] = full
    stack_size[0] = 0
    top = 1
    best = 0
    while top > 0:
        top -= 1
        cand = stack_cand[top]
        size = stack_size[top]
        vmax = -1
        while cand != zero:
            if size + _popcount(cand) <= best:
                break
            # a vertex of residual degree <= 1 belongs to some maximum independent set
            pick = -1
            vmax = -1
            dmax = -1
            for a in range(t):
                bit = one << np.uint64(a)
                if cand & bit:
                    deg = _popcount(adj[a] & cand)
                    if deg <= 1:
                        pick = a
                        break
                    if deg > dmax:
                        dmax = deg
                        vmax = a
            if pick < 0:
                break
            cand &= ~(adj[pick] | (one << np.uint64(pick)))
            size += 1
            vmax = -1
        if cand == zero:
            best = max(best, size)
            continue
        if vmax < 0:
            continue  # pruned by the bound
        # branch on the highest-degree vertex: exclude (pushed first), include
        bit = one << np.uint64(vmax)
        stack_cand[top] = cand & ~bit
        stack_size[top] = size
        stack_cand[top + 1] = cand & ~(adj[vmax] | bit)
        stack_size[top + 1] = size + 1
        top += 2
    return best


@numba.njit(cache=True)
def _local_masks(indptr, indices, v, pos, adj):
    # adjacency bitmasks of the subgraph induced by N(v), local ids in sorted order
    lo = indptr[v]
    t = indptr[v + 1] - lo
    for a in range(t):
        pos[indices[lo + a]] = a
    for a in range(t):
        u = indices[lo + a]
        m = np.uint64(0)
        for k in range(indptr[u], indptr[u + 1]):
            b = pos[indices[k]]
            if b >= 0:
                m |= np.uint64(1) << np.uint64(b)
        adj[a] = m
    for a in range(t):
        pos[indices[lo + a]] = -1
    return t


@numba.njit(cache=True)
def _greedy_mis(indptr, indices, v, pos, local, resid, alive):
    # repeatedly take the live neighbour of least residual degree (lowest id on ties)
    lo = indptr[v]
    t = indptr[v + 1] - lo
    for a in range(t):
        pos[indices[lo + a]] = a
    for a in range(t):
        for b in range(t):
            local[a, b] = False
    for a in range(t):
        u = indices[lo + a]
        for k in range(indptr[u], indptr[u + 1]):
            b = pos[indices[k]]
            if b >= 0:
                local[a, b] = True
    for a in range(t):
        pos[indices[lo + a]] = -1
        alive[a] = True
        c = 0
        for b in range(t):
            if local[a, b]:
                c += 1
        resid[a] = c
    remaining = t
    size = 0
    while remaining > 0:
        best = -1
        for a in range(t):
            if alive[a] and (best < 0 or resid[a] < resid[best]):
                best = a
        size += 1
        # remove best and its live neighbours, then refresh residual degrees
        alive[best] = False
        remaining -= 1
        for b in range(t):
            if alive[b] and local[best, b]:
                alive[b] = False
                remaining -= 1
                for c in range(t):
                    if alive[c] and local[b, c]:
                        resid[c] -= 1
    return size


@numba.njit(cache=True)
def _star_sizes(indptr, indices, vertices, method, cap):
    # method: 0 auto (exact up to cap, else greedy), 1 greedy, 2 exact
    n = len(indptr) - 1
    maxdeg = 0
    for v in vertices:
        maxdeg = max(maxdeg, indptr[v + 1] - indptr[v])
    pos = np.full(n, -1, dtype=np.int64)
    adj = np.zeros(64, dtype=np.uint64)
    local = np.zeros((maxdeg, maxdeg), dtype=np.bool_)
    resid = np.zeros(maxdeg, dtype=np.int64)
    alive = np.zeros(maxdeg, dtype=np.bool_)
    sizes = np.zeros(len(vertices), dtype=np.int64)
    greedy = np.zeros(len(vertices), dtype=np.bool_)
    for i in range(len(vertices)):
        v = vertices[i]
        deg = indptr[v + 1] - indptr[v]
        if deg == 0:
            continue
        if method == 1 or (method == 0 and deg > cap):
            sizes[i] = _greedy_mis(indptr, indices, v, pos, local, resid, alive)
            greedy[i] = True
        else:
            t = _local_masks(indptr, indices, v, pos, adj)
            full = np.uint64(0xFFFFFFFFFFFFFFFF) if t == 64 else (np.uint64(1) << np.uint64(t)) - np.uint64(1)
            sizes[i] = _mis_bb(full, adj, t)
    return sizes, greedy


@dataclass(frozen=True)
class IsolatedStarProfile:
    per_vertex_star_size: np.ndarray
    max_star: int
    method: str
    greedy_mask: np.ndarray

    @property
    def greedy_count(self) -> int:
        return int(self.greedy_mask.sum())


def _check_cap(cap: int) -> int:
    if not 0 <= cap <= MAX_EXACT_CAP:
        raise ValueError(f"exact cap must lie in [0, {MAX_EXACT_CAP}], got {cap}")
    return int(cap)


def isolated_star_profile(g: Graph, method: StarMethod = "auto", cap: int = DEFAULT_EXACT_CAP) -> IsolatedStarProfile:
    """Isolated star size of every vertex.

    ``exact`` solves maximum independent set on each neighbourhood (degree
    must not exceed ``cap``); ``greedy`` gives the min-degree lower bound;
    ``auto`` is exact up to ``cap`` and greedy above it.
    """
    cap = _check_cap(cap)
    if method not in _METHOD_CODES:
        raise ValueError(f"unknown star method {method!r}")
    if method == "exact" and g.n and g.degree().max(initial=0) > cap:
        v = int(np.argmax(g.degree()))
        raise ExactCapExceededError(f"vertex {v} has degree {g.degree(v)} > exact cap {cap}")
    sizes, greedy = _star_sizes(g.indptr, g.indices, np.arange(g.n, dtype=np.int64), _METHOD_CODES[method], cap)
    return IsolatedStarProfile(sizes, int(sizes.max(initial=0)), method, greedy)


def isolated_star_size(g: Graph, v: int, method: StarMethod = "exact", cap: int = DEFAULT_EXACT_CAP) -> int:
    """Size of the largest independent set among the neighbours of ``v``."""
    cap = _check_cap(cap)
    if not 0 <= v < g.n:
        raise IndexError(f"vertex {v} out of range")
    if method == "exact" and g.degree(v) > cap:
        raise ExactCapExceededError(f"degree {g.degree(v)} of vertex {v} exceeds exact cap {cap}")
    sizes, _ = _star_sizes(g.indptr, g.indices, np.array([v], dtype=np.int64), _METHOD_CODES[method], cap)
    return int(sizes[0])


@dataclass(frozen=True)
class TestVerdict:
    statistic: float
    threshold: float
    reject: bool
    threshold_source: Literal["analytic", "monte_carlo"]
    notes: dict[str, Any] = field(default_factory=dict)

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict[str, Any]:
        return {
            "statistic": self.statistic,
            "threshold": self.threshold,
            "reject": self.reject,
            "threshold_source": self.threshold_source,
            "notes": self.notes,
        }


def isolated_star_test(
    g: Graph,
    d: int,
    *,
    method: StarMethod = "auto",
    cap: int = DEFAULT_EXACT_CAP,
    threshold: float | None = None,
    profile: IsolatedStarProfile | None = None,
) -> TestVerdict:
    """Reject when the largest isolated star exceeds the kissing number of ``d``.

    A calibrated ``threshold`` replaces the kissing number when given.
    """
    if d < 2:
        raise ValueError("dimension must be >= 2")
    if profile is None:
        profile = isolated_star_profile(g, method, cap)
    source = "analytic" if threshold is None else "monte_carlo"
    thr = float(kissing_number(d)) if threshold is None else float(threshold)
    stat = profile.max_star
    notes = {"method": profile.method, "greedy_vertices": profile.greedy_count, "d": int(d)}
    return TestVerdict(float(stat), thr, stat > thr, source, notes)


def distance_threshold(d: int, r: float, epsilon: float = DEFAULT_EPSILON) -> float:
    """``(1 - epsilon) * d / (2 (d + 1)) / r``."""
    if not 0.0 < r <= 0.5:
        raise ValueError(f"radius must lie in (0, 1/2], got {r}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    return (1.0 - epsilon) * d / (2.0 * (d + 1)) / r


def average_distance_test(
    g: Graph,
    d: int,
    r: float | None = None,
    epsilon: float = DEFAULT_EPSILON,
    *,
    threshold: float | None = None,
    average: float | None = None,
    all_connected: bool | None = None,
    sample_pairs: int | None = None,
    rng: np.random.Generator | None = None,
) -> TestVerdict:
    """Reject when the average graph distance falls below the null lower bound.

    Pass a calibrated ``threshold`` instead of ``r`` for the Monte Carlo
    variant. A precomputed statistic can be supplied via ``average``.
    """
    if threshold is None:
        if r is None:
            raise ValueError("either r or a calibrated threshold is required")
        thr, source = distance_threshold(d, r, epsilon), "analytic"
    else:
        thr, source = float(threshold), "monte_carlo"
    if average is None:
        summary = average_graph_distance(g, sample_pairs=sample_pairs, rng=rng)
        average, all_connected = summary.average, summary.all_connected
    notes = {"all_connected": bool(all_connected), "d": int(d)}
    if threshold is None:
        notes.update(r=float(r), epsilon=float(epsilon))
    return TestVerdict(float(average), thr, average < thr, source, notes)


def order_statistic_rank(q: float, replicates: int) -> int:
    """1-based rank ``ceil(q * R)`` (clamped to ``[1, R]``)."""
    return min(replicates, max(1, math.ceil(q * replicates - 1e-9)))


@dataclass
class CalibrationTable:
    """Empirical null distribution of one statistic with quantile lookup."""

    stat: str
    n: int
    d: int
    p: float
    replicates: int
    alpha_to_threshold: dict[float, float] = field(default_factory=dict)
    sorted_samples: list[float] | None = None
    star_method: str | None = None

    def __post_init__(self):
        if self.stat not in STATISTICS:
            raise ValueError(f"unknown statistic {self.stat!r}")

    @classmethod
    def from_samples(cls, stat: str, params: ModelParams, samples: Sequence[float], alphas: Sequence[float], **kw) -> "CalibrationTable":
        table = cls(stat, params.n, params.d, params.p, len(samples), sorted_samples=sorted(float(s) for s in samples), **kw)
        for a in alphas:
            table.alpha_to_threshold[float(a)] = table.quantile_threshold(a)
        return table

    def quantile_threshold(self, alpha: float) -> float:
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
        if self.sorted_samples is None:
            raise ValueError("no samples stored; only tabulated alphas are available")
        q = 1.0 - alpha if self.stat == "max_star" else alpha
        return self.sorted_samples[order_statistic_rank(q, len(self.sorted_samples)) - 1]

    def threshold(self, alpha: float) -> float:
        alpha = float(alpha)
        if alpha in self.alpha_to_threshold:
            return self.alpha_to_threshold[alpha]
        return self.quantile_threshold(alpha)

    def rejects(self, statistic: float, alpha: float) -> bool:
        thr = self.threshold(alpha)
        return statistic > thr if self.stat == "max_star" else statistic < thr

    def to_dict(self, include_samples: bool = True) -> dict[str, Any]:
        out = {
            "stat": self.stat,
            "n": self.n,
            "d": self.d,
            "p": self.p,
            "replicates": self.replicates,
            "alpha_to_threshold": {repr(a): t for a, t in sorted(self.alpha_to_threshold.items())},
        }
        if self.star_method is not None:
            out["star_method"] = self.star_method
        if include_samples and self.sorted_samples is not None:
            out["sorted_samples"] = self.sorted_samples
        return out

    def to_json(self, include_samples: bool = True) -> str:
        return json.dumps(self.to_dict(include_samples), indent=2)

    @classmethod
    def from_dict(cls, obj: dict[str, Any]) -> "CalibrationTable":
        return cls(
            stat=obj["stat"],
            n=int(obj["n"]),
            d=int(obj["d"]),
            p=float(obj["p"]),
            replicates=int(obj["replicates"]),
            alpha_to_threshold={float(a): float(t) for a, t in obj.get("alpha_to_threshold", {}).items()},
            sorted_samples=obj.get("sorted_samples"),
            star_method=obj.get("star_method"),
        )

    @classmethod
    def from_json(cls, text: str) -> "CalibrationTable":
        return cls.from_dict(json.loads(text))


def graph_statistics(
    g: Graph,
    stats: Sequence[str] = STATISTICS,
    *,
    star_method: StarMethod = "greedy",
    cap: int = DEFAULT_EXACT_CAP,
) -> dict[str, float]:
    out: dict[str, float] = {}
    if "max_star" in stats:
        out["max_star"] = float(isolated_star_profile(g, star_method, cap).max_star)
    if "avg_distance" in stats:
        summary = average_graph_distance(g)
        out["avg_distance"] = summary.average
        out["all_connected"] = float(summary.all_connected)
    return out


def _null_statistics(replicate: int, *, params, seed, stats, star_method, cap, purpose) -> dict[str, float]:
    s = sample_null(params, derive_rng(seed, purpose, replicate))
    return graph_statistics(s.graph, stats, star_method=star_method, cap=cap)


def calibrate(
    params: ModelParams,
    replicates: int,
    alphas: Sequence[float],
    seed: int,
    *,
    stats: Sequence[str] = STATISTICS,
    star_method: StarMethod = "greedy",
    cap: int = DEFAULT_EXACT_CAP,
    workers: int | None = None,
    purpose: str = "calibration",
) -> dict[str, CalibrationTable]:
    """Null distributions of several statistics from one set of null samples."""
    if params.k != 0:
        raise InvalidParamsError("calibration samples the null model; k must be 0")
    if replicates < 1:
        raise InvalidParamsError("replicates must be >= 1")
    for s in stats:
        if s not in STATISTICS:
            raise ValueError(f"unknown statistic {s!r}")
    fn = partial(_null_statistics, params=params, seed=seed, stats=tuple(stats), star_method=star_method, cap=cap, purpose=purpose)
    rows = ordered_map(fn, range(replicates), workers)
    return {
        s: CalibrationTable.from_samples(
            s, params, [row[s] for row in rows], alphas, star_method=star_method if s == "max_star" else None
        )
        for s in stats
    }


def monte_carlo_threshold(
    stat_name: str,
    params: ModelParams,
    replicates: int,
    alpha: float,
    seed: int,
    *,
    star_method: StarMethod = "greedy",
    cap: int = DEFAULT_EXACT_CAP,
    workers: int | None = None,
) -> CalibrationTable:
    """Calibrate one statistic on ``replicates`` null samples.

    The threshold is the order statistic of rank ``ceil((1 - alpha) R)`` for
    ``max_star`` (reject above) and ``ceil(alpha R)`` for ``avg_distance``
    (reject below).
    """
    if replicates < 100:
        raise InvalidParamsError("Monte Carlo calibration needs at least 100 replicates")
    if not 0.0 < alpha < 1.0:
        raise InvalidParamsError(f"alpha must lie in (0, 1), got {alpha}")
    tables = calibrate(params, replicates, [alpha], seed, stats=[stat_name], star_method=star_method, cap=cap, workers=workers)
    return tables[stat_name]
