"""Immutable simple graphs in CSR form, BFS distances, connectivity, the
average graph distance statistic and edge-list (de)serialization."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import BinaryIO, Iterable, TextIO

import numba
import numpy as np

UNREACHABLE = -1


class NoConnectedPairsError(ValueError):
    """The graph has no pair of vertices joined by a path."""


class EdgeListError(ValueError):
    """Base class for edge-list parse errors; carries the offending line number."""

    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class MalformedHeaderError(EdgeListError):
    pass


class MalformedLineError(EdgeListError):
    pass


class VertexOutOfRangeError(EdgeListError):
    pass


class DuplicateEdgeError(EdgeListError):
    pass


class SelfLoopError(EdgeListError):
    pass


class EdgeCountMismatchError(EdgeListError):
    pass


class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    Adjacency is stored as CSR arrays (``indptr``, ``indices``) with sorted
    neighbour lists. Both arrays are read-only after construction.
    """

    __slots__ = ("n", "indptr", "indices", "_edges")

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray):
        self.n = int(n)
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int32)
        self.indptr.flags.writeable = False
        self.indices.flags.writeable = False
        self._edges = None

    @classmethod
    def from_edges(cls, n: int, edges, *, validate: bool = True) -> "Graph":
        """Build from an ``(m, 2)`` array-like of vertex pairs."""
        n = int(n)
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if validate and len(e):
            if e.min() < 0 or e.max() >= n:
                raise ValueError("edge endpoint out of range")
            if np.any(e[:, 0] == e[:, 1]):
                raise ValueError("self-loops are not allowed")
        lo = np.minimum(e[:, 0], e[:, 1])
        hi = np.maximum(e[:, 0], e[:, 1])
        if validate and len(e):
            key = lo * n + hi
            if len(np.unique(key)) != len(key):
                raise ValueError("duplicate edges are not allowed")
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return cls(n, indptr, dst[order])

    @property
    def m(self) -> int:
        return len(self.indices) // 2

    def degree(self, v: int | None = None):
        deg = np.diff(self.indptr)
        return deg if v is None else int(deg[v])

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < len(nb) and nb[i] == v)

    def edges(self) -> np.ndarray:
        """Edge array with ``u < v``, lexicographically sorted."""
        if self._edges is None:
            src = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
            mask = src < self.indices
            self._edges = np.column_stack([src[mask], self.indices[mask].astype(np.int64)])
            self._edges.flags.writeable = False
        return self._edges

    def induced_subgraph(self, vertices) -> tuple["Graph", np.ndarray]:
        """Induced subgraph, relabelled densely; also returns the old ids."""
        keep = np.unique(np.asarray(list(vertices), dtype=np.int64))
        relabel = np.full(self.n, -1, dtype=np.int64)
        relabel[keep] = np.arange(len(keep))
        e = self.edges()
        mask = (relabel[e[:, 0]] >= 0) & (relabel[e[:, 1]] >= 0)
        return Graph.from_edges(len(keep), relabel[e[mask]], validate=False), keep

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def __hash__(self):
        return hash((self.n, self.indices.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class DistanceSummary:
    connected_pair_count: int
    distance_sum: int
    average: float
    all_connected: bool
    sampled: bool = False


@numba.njit(cache=True)
def _bfs(indptr, indices, source, dist, queue):
    dist[:] = -1
    dist[source] = 0
    queue[0] = source
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u] + 1
        for k in range(indptr[u], indptr[u + 1]):
            w = indices[k]
            if dist[w] < 0:
                dist[w] = du
                queue[tail] = w
                tail += 1
    return tail


@numba.njit(cache=True)
def _distance_totals(indptr, indices, sources):
    # sums over ordered pairs (s, t), t != s reachable from s
    n = len(indptr) - 1
    dist = np.empty(n, dtype=np.int32)
    queue = np.empty(n, dtype=np.int32)
    pairs = 0
    total = 0
    for s in sources:
        reached = _bfs(indptr, indices, s, dist, queue)
        pairs += reached - 1
        for i in range(1, reached):
            total += dist[queue[i]]
    return pairs, total


@numba.njit(cache=True)
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)


@numba.njit(cache=True)
def _distance_totals_bitparallel(indptr, indices, order):
    # 64 BFS runs at once, one bit per source; sources taken in `order`
    n = len(indptr) - 1
    zero = np.uint64(0)
    visited = np.zeros(n, dtype=np.uint64)
    frontier = np.zeros(n, dtype=np.uint64)
    nxt = np.zeros(n, dtype=np.uint64)
    cur = np.empty(n, dtype=np.int64)
    touched = np.empty(n, dtype=np.int64)
    pairs = 0
    total = 0
    for b0 in range(0, n, 64):
        b1 = min(n, b0 + 64)
        visited[:] = zero
        ncur = 0
        for b in range(b0, b1):
            s = order[b]
            bit = np.uint64(1) << np.uint64(b - b0)
            visited[s] = bit
            frontier[s] = bit
            cur[ncur] = s
            ncur += 1
        level = 0
        while ncur > 0:
            level += 1
            ntouched = 0
            for a in range(ncur):
                u = cur[a]
                f = frontier[u]
                frontier[u] = zero
                for k in range(indptr[u], indptr[u + 1]):
                    w = indices[k]
                    if nxt[w] == zero:
                        touched[ntouched] = w
                        ntouched += 1
                    nxt[w] |= f
            ncur = 0
            for a in range(ntouched):
                w = touched[a]
                new = nxt[w] & ~visited[w]
                nxt[w] = zero
                if new != zero:
                    visited[w] |= new
                    frontier[w] = new
                    cnt = _popcount(new)
                    pairs += cnt
                    total += cnt * level
                    cur[ncur] = w
                    ncur += 1
    return pairs, total


@numba.njit(cache=True)
def _bfs_order(indptr, indices):
    # vertices in BFS visiting order, component by component
    n = len(indptr) - 1
    seen = np.zeros(n, dtype=np.bool_)
    order = np.empty(n, dtype=np.int64)
    tail = 0
    head = 0
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        order[tail] = s
        tail += 1
        while head < tail:
            u = order[head]
            head += 1
            for k in range(indptr[u], indptr[u + 1]):
                w = indices[k]
                if not seen[w]:
                    seen[w] = True
                    order[tail] = w
                    tail += 1
    return order


@numba.njit(cache=True)
def _sampled_pair_distances(indptr, indices, src, dst):
    # src sorted; one BFS per distinct source
    n = len(indptr) - 1
    dist = np.empty(n, dtype=np.int32)
    queue = np.empty(n, dtype=np.int32)
    out = np.empty(len(src), dtype=np.int32)
    last = -1
    for i in range(len(src)):
        if src[i] != last:
            _bfs(indptr, indices, src[i], dist, queue)
            last = src[i]
        out[i] = dist[dst[i]]
    return out


@numba.njit(cache=True)
def _component_size(indptr, indices, mask, start):
    n = len(indptr) - 1
    seen = np.zeros(n, dtype=np.bool_)
    queue = np.empty(n, dtype=np.int64)
    queue[0] = start
    seen[start] = True
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        for k in range(indptr[u], indptr[u + 1]):
            w = indices[k]
            if mask[w] and not seen[w]:
                seen[w] = True
                queue[tail] = w
                tail += 1
    return tail


def bfs_distances(g: Graph, source: int) -> np.ndarray:
    """Hop distances from ``source``; unreachable vertices get ``UNREACHABLE`` (-1)."""
    if not 0 <= source < g.n:
        raise IndexError(f"source {source} out of range for n={g.n}")
    dist = np.empty(g.n, dtype=np.int32)
    queue = np.empty(g.n, dtype=np.int32)
    _bfs(g.indptr, g.indices, int(source), dist, queue)
    return dist


def _pair_index_to_ij(idx: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # inverse of the row-major enumeration of pairs i < j
    idx = np.asarray(idx, dtype=np.int64)

    def row_start(i):
        return i * n - i * (i + 1) // 2

    b = 2 * n - 1
    i = np.floor((b - np.sqrt(b * b - 8.0 * idx)) / 2).astype(np.int64)
    # floating-point rounding can land one row off at boundaries
    i -= idx < row_start(i)
    i += idx >= row_start(i + 1)
    return i, idx - row_start(i) + i + 1


def average_graph_distance(
    g: Graph, *, sample_pairs: int | None = None, rng: np.random.Generator | None = None
) -> DistanceSummary:
    """Mean hop distance over unordered vertex pairs joined by a path.

    Exact by default (one BFS per vertex). With ``sample_pairs`` set, the mean
    is taken over that many uniformly drawn distinct pairs instead; ``rng`` is
    then required.
    """
    if g.n < 2:
        raise ValueError("average graph distance needs at least two vertices")
    total_pairs = g.n * (g.n - 1) // 2
    if sample_pairs is None or sample_pairs >= total_pairs:
        # nearby sources share BFS levels, so batch them in BFS order
        order = _bfs_order(g.indptr, g.indices)
        ordered_pairs, ordered_sum = _distance_totals_bitparallel(g.indptr, g.indices, order)
        pairs, dsum = int(ordered_pairs) // 2, int(ordered_sum) // 2
        sampled = False
        all_connected = pairs == total_pairs
    else:
        if rng is None:
            raise ValueError("pair sampling needs an explicit rng")
        idx = np.sort(rng.choice(total_pairs, size=int(sample_pairs), replace=False))
        src, dst = _pair_index_to_ij(idx, g.n)
        dists = _sampled_pair_distances(g.indptr, g.indices, src, dst)
        reach = dists >= 0
        pairs, dsum = int(reach.sum()), int(dists[reach].sum())
        sampled = True
        all_connected = is_connected(g)
    if pairs == 0:
        raise NoConnectedPairsError("no pair of vertices is connected")
    return DistanceSummary(pairs, dsum, dsum / pairs, all_connected, sampled)


def is_connected(g: Graph, vertex_subset: Iterable[int] | None = None) -> bool:
    """Whether the subgraph induced by ``vertex_subset`` (default: all) is connected."""
    if vertex_subset is None:
        mask = np.ones(g.n, dtype=np.bool_)
    else:
        mask = np.zeros(g.n, dtype=np.bool_)
        mask[np.fromiter(vertex_subset, dtype=np.int64)] = True
    members = np.flatnonzero(mask)
    if len(members) == 0:
        raise ValueError("vertex subset must be nonempty")
    return int(_component_size(g.indptr, g.indices, mask, members[0])) == len(members)


def _lines(stream) -> Iterable[str]:
    if isinstance(stream, (io.TextIOBase, TextIO)) or hasattr(stream, "encoding"):
        yield from stream
    else:
        for raw in stream:
            yield raw.decode("utf-8") if isinstance(raw, bytes) else raw


def read_edge_list(stream: BinaryIO | TextIO) -> Graph:
    """Parse the ``n m`` header followed by ``m`` lines ``u v``; ``#`` lines are comments."""
    header = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    lineno = 0
    n = m = 0
    for lineno, line in enumerate(_lines(stream), 1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        parts = text.split()
        if header is None:
            try:
                if len(parts) != 2:
                    raise ValueError
                n, m = int(parts[0]), int(parts[1])
                if n < 0 or m < 0:
                    raise ValueError
            except ValueError:
                raise MalformedHeaderError(f"expected header 'n m', got {text!r}", lineno) from None
            header = (n, m)
            continue
        try:
            if len(parts) != 2:
                raise ValueError
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise MalformedLineError(f"expected edge 'u v', got {text!r}", lineno) from None
        if u == v:
            raise SelfLoopError(f"self-loop at vertex {u}", lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise VertexOutOfRangeError(f"vertex id out of range [0, {n}) in {text!r}", lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DuplicateEdgeError(f"duplicate edge {key}", lineno)
        seen.add(key)
        edges.append(key)
        if len(edges) > m:
            raise EdgeCountMismatchError(f"more than the declared {m} edges", lineno)
    if header is None:
        raise MalformedHeaderError("missing header", lineno + 1)
    if len(edges) != m:
        raise EdgeCountMismatchError(f"header declares {m} edges, found {len(edges)}", lineno + 1)
    return Graph.from_edges(n, np.array(edges, dtype=np.int64).reshape(-1, 2), validate=False)


def write_edge_list(g: Graph, stream) -> None:
    """Write ``g`` in edge-list format (LF endings). Accepts text or binary streams."""
    buf = io.StringIO()
    buf.write(f"{g.n} {g.m}\n")
    e = g.edges()
    if len(e):
        np.savetxt(buf, e, fmt="%d", delimiter=" ", newline="\n")
    data = buf.getvalue()
    if isinstance(stream, io.TextIOBase) or hasattr(stream, "encoding"):
        stream.write(data)
    else:
        stream.write(data.encode("utf-8"))
