"""Samplers for the null model (random geometric graph on the torus) and the
alternative model (the same graph with ``k`` planted botnet vertices).

Randomness comes from numpy's Philox counter-based generator. Independent
streams are derived from a master seed plus an integer key path via
``numpy.random.SeedSequence(seed, spawn_key=key)``, so every replicate of an
experiment has a stream that does not depend on execution order.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import Iterable

import numba
import numpy as np

from botnet_rgg.geometry import RadiusTooLargeError, probability_for_radius, radius_for_probability
from botnet_rgg.graph import Graph


class InvalidParamsError(ValueError):
    """Model parameters outside their valid ranges."""


def purpose_code(purpose: str) -> int:
    """Stable integer tag for a named stream purpose."""
    return zlib.crc32(purpose.encode("utf-8"))


def derive_rng(seed: int, *key: int | str) -> np.random.Generator:
    """Philox generator for the stream identified by ``(seed, *key)``."""
    spawn_key = tuple(purpose_code(k) if isinstance(k, str) else int(k) for k in key)
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=spawn_key)
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class ModelParams:
    """``n`` vertices in dimension ``d`` with edge probability ``p`` and ``k`` botnet vertices.

    Build from whichever density is at hand with :meth:`from_density`.
    """

    n: int
    d: int
    p: float
    k: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise InvalidParamsError(f"n must be an integer >= 2, got {self.n}")
        if int(self.d) != self.d or self.d < 2:
            raise InvalidParamsError(f"d must be an integer >= 2, got {self.d}")
        if int(self.k) != self.k or not 0 <= self.k <= self.n:
            raise InvalidParamsError(f"k must be an integer in [0, n], got {self.k}")
        if not 0.0 < self.p < 1.0:
            raise InvalidParamsError(f"p must lie in (0, 1), got {self.p}")
        # raises RadiusTooLargeError when the ball would exceed radius 1/2
        radius_for_probability(self.p, self.d)

    @classmethod
    def from_density(
        cls,
        n: int,
        d: int,
        *,
        k: int = 0,
        p: float | None = None,
        r: float | None = None,
        avg_degree: float | None = None,
    ) -> "ModelParams":
        given = [x is not None for x in (p, r, avg_degree)]
        if sum(given) != 1:
            raise InvalidParamsError("give exactly one of p, r, avg_degree")
        if avg_degree is not None:
            p = avg_degree / n
        elif r is not None:
            if r > 0.5:
                raise RadiusTooLargeError(f"radius {r} exceeds 1/2")
            if not r > 0:
                raise InvalidParamsError(f"radius must be positive, got {r}")
            p = probability_for_radius(r, d)
        return cls(int(n), int(d), float(p), int(k))

    @property
    def r(self) -> float:
        return radius_for_probability(self.p, self.d)

    @property
    def avg_degree(self) -> float:
        return self.n * self.p

    def with_k(self, k: int) -> "ModelParams":
        return ModelParams(self.n, self.d, self.p, k)


@dataclass(frozen=True)
class SampleOutput:
    graph: Graph
    locations: np.ndarray
    botnet: frozenset[int]
    params: ModelParams

    def botnet_array(self) -> np.ndarray:
        return np.array(sorted(self.botnet), dtype=np.int64)


@numba.njit(cache=True)
def _within(x, i, j, r2):
    s = 0.0
    for t in range(x.shape[1]):
        a = abs(x[i, t] - x[j, t])
        a = min(a, 1.0 - a)
        s += a * a
    return s <= r2


@numba.njit(cache=True)
def _edges_brute(x, r2, buf):
    # returns the number of edges found, or -1 when buf overflows
    n = x.shape[0]
    cap = buf.shape[0]
    count = 0
    for i in range(n):
        for j in range(i + 1, n):
            if _within(x, i, j, r2):
                if count == cap:
                    return -1
                buf[count, 0] = i
                buf[count, 1] = j
                count += 1
    return count


@numba.njit(cache=True)
def _edges_grid(x, r2, cells, buf):
    n, d = x.shape
    ncell = cells**d
    cell_of = np.empty(n, dtype=np.int64)
    coord = np.empty((n, d), dtype=np.int64)
    for i in range(n):
        lin = 0
        for t in range(d - 1, -1, -1):
            c = int(x[i, t] * cells)
            if c >= cells:
                c = cells - 1
            coord[i, t] = c
            lin = lin * cells + c
        cell_of[i] = lin
    order = np.argsort(cell_of, kind="mergesort")
    start = np.zeros(ncell + 1, dtype=np.int64)
    for i in range(n):
        start[cell_of[i] + 1] += 1
    for c in range(ncell):
        start[c + 1] += start[c]

    noff = 3**d
    cap = buf.shape[0]
    count = 0
    for i in range(n):
        for o in range(noff):
            rem = o
            lin = 0
            mult = 1
            for t in range(d):
                step = rem % 3 - 1
                rem //= 3
                lin += ((coord[i, t] + step) % cells) * mult
                mult *= cells
            for q in range(start[lin], start[lin + 1]):
                j = order[q]
                if j > i and _within(x, i, j, r2):
                    if count == cap:
                        return -1
                    buf[count, 0] = i
                    buf[count, 1] = j
                    count += 1
    return count


def geometric_edges(locations: np.ndarray, r: float) -> np.ndarray:
    """All pairs ``i < j`` with torus distance at most ``r``, sorted.

    Uses a cell grid of side ``>= r`` when that prunes anything, otherwise a
    direct pairwise scan.
    """
    x = np.ascontiguousarray(locations, dtype=np.float64)
    n, d = x.shape
    p = probability_for_radius(r, d) if r <= 0.5 else 1.0
    capacity = int(1.5 * p * n * n / 2) + 64
    r2 = r * r
    cells = int(math.floor(1.0 / r))
    # keep the grid no larger than ~4 cells per point
    cells = min(cells, max(1, int((4 * n) ** (1.0 / d))))
    use_grid = cells >= 3 and 3**d < cells**d
    while True:
        buf = np.empty((capacity, 2), dtype=np.int64)
        count = _edges_grid(x, r2, cells, buf) if use_grid else _edges_brute(x, r2, buf)
        if count >= 0:
            break
        capacity *= 2
    e = buf[:count]
    if use_grid:
        e = e[np.lexsort((e[:, 1], e[:, 0]))]
    return e


def sample_locations(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    return rng.random((n, d))


def sample_null(params: ModelParams, seed: int | np.random.Generator) -> SampleOutput:
    """Random geometric graph: uniform torus locations, edge iff distance <= r."""
    if params.k != 0:
        raise InvalidParamsError("null sampler requires k = 0")
    rng = seed if isinstance(seed, np.random.Generator) else derive_rng(seed)
    x = sample_locations(params.n, params.d, rng)
    edges = geometric_edges(x, params.r)
    return SampleOutput(Graph.from_edges(params.n, edges, validate=False), x, frozenset(), params)


def sample_alternative(params: ModelParams, seed: int | np.random.Generator) -> SampleOutput:
    """Geometric graph on ``V \\ B`` plus botnet ``B`` of size ``k`` wired at random.

    Every pair touching the botnet, botnet-botnet pairs included, is an edge
    independently with probability ``p``. Botnet vertices still receive
    locations, which are ignored for their edges.
    """
    if params.k < 1:
        raise InvalidParamsError("alternative sampler requires k >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else derive_rng(seed)
    n, p = params.n, params.p
    x = sample_locations(n, params.d, rng)
    botnet = np.sort(rng.choice(n, size=params.k, replace=False))
    in_botnet = np.zeros(n, dtype=bool)
    in_botnet[botnet] = True

    geo = geometric_edges(x, params.r)
    keep = ~(in_botnet[geo[:, 0]] | in_botnet[geo[:, 1]])
    parts = [geo[keep]]
    vertices = np.arange(n)
    for b in botnet:
        hit = rng.random(n) < p
        # each botnet-botnet pair is drawn once, by its smaller endpoint
        hit &= ~in_botnet | (vertices > b)
        nb = np.flatnonzero(hit)
        parts.append(np.column_stack([np.full(len(nb), b), nb]))
    edges = np.concatenate(parts).astype(np.int64)
    graph = Graph.from_edges(n, edges, validate=False)
    return SampleOutput(graph, x, frozenset(int(b) for b in botnet), params)


def sample(params: ModelParams, seed: int | np.random.Generator) -> SampleOutput:
    return sample_null(params, seed) if params.k == 0 else sample_alternative(params, seed)


def write_locations(locations: np.ndarray, stream) -> None:
    """Line ``i`` holds the ``d`` coordinates of vertex ``i``."""
    np.savetxt(stream, np.asarray(locations), fmt="%.17g", delimiter=" ", newline="\n")


def read_locations(stream) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(stream, dtype=float, ndmin=2))


def write_botnet(botnet: Iterable[int], stream) -> None:
    for v in sorted(botnet):
        stream.write(f"{int(v)}\n")


def read_botnet(stream) -> frozenset[int]:
    return frozenset(int(line) for line in stream if line.strip() and not line.startswith("#"))
