"""Geometric model: point sets, transmission radii and communication graphs.

Nodes are identified by their dense index ``0..n-1`` in a :class:`PointSet`.
Edges are unordered pairs stored as ``(i, j)`` with ``i < j``.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as _cc

from .errors import ModelError

Edge = tuple[int, int]

# Relative tolerance for radii that are not exact copies of a distance.
RADIUS_RTOL = 1e-9


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def normalize_edge(u: int, v: int) -> Edge:
    u, v = int(u), int(v)
    if u == v:
        raise ModelError(f"self-loop on node {u}")
    return (u, v) if u < v else (v, u)


def distance(p: Sequence[float], q: Sequence[float]) -> float:
    """Euclidean distance between two points of equal dimension."""
    if len(p) != len(q):
        raise ModelError(f"dimension mismatch: {len(p)} vs {len(q)}")
    return math.sqrt(sum((float(a) - float(b)) ** 2 for a, b in zip(p, q)))


class PointSet:
    """Immutable set of ``n >= 1`` points in R^d.

    A flat sequence of numbers is read as ``n`` points on a line (d = 1).
    """

    def __init__(self, coords):
        arr = np.array(coords, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ModelError(f"expected an (n, d) coordinate array with n >= 1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ModelError("coordinates must be finite")
        self.coords = _frozen(arr)

    def __len__(self) -> int:
        return self.coords.shape[0]

    def __getitem__(self, i: int) -> tuple[float, ...]:
        return tuple(float(x) for x in self.coords[i])

    def __repr__(self) -> str:
        return f"PointSet(n={self.n}, d={self.dim})"

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    @cached_property
    def distances(self) -> np.ndarray:
        """Full pairwise distance matrix; exactly symmetric with a zero diagonal."""
        diff = self.coords[:, None, :] - self.coords[None, :, :]
        return _frozen(np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)))

    def dist(self, i: int, j: int) -> float:
        return float(self.distances[i, j])

    def edge_key(self, i: int, j: int) -> tuple[float, int, int]:
        """Total order on node pairs: (length, smaller id, larger id).

        Used wherever edge lengths are compared so that coincident lengths
        are resolved the same way every time.
        """
        a, b = (i, j) if i < j else (j, i)
        return (float(self.distances[a, b]), int(a), int(b))

    def has_distinct_distances(self) -> bool:
        iu = np.triu_indices(self.n, k=1)
        vals = self.distances[iu]
        return np.unique(vals).size == vals.size

    def scaled(self, alpha: float) -> PointSet:
        return PointSet(self.coords * alpha)

    def subset(self, ids: Sequence[int]) -> PointSet:
        return PointSet(self.coords[np.asarray(ids, dtype=int)])


def _radius_array(points: PointSet, radii) -> np.ndarray:
    n = points.n
    if isinstance(radii, Mapping):
        missing = [i for i in range(n) if i not in radii]
        if missing:
            raise ModelError(f"no radius for node(s) {missing[:5]}")
        arr = np.array([radii[i] for i in range(n)], dtype=float)
    else:
        arr = np.array(radii, dtype=float).reshape(-1)
        if arr.size != n:
            raise ModelError(f"expected {n} radii, got {arr.size}")
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise ModelError("radii must be non-negative")
    return arr


class CommGraph:
    """Communication graph determined by a point set and its radii.

    Node ``q`` covers node ``p`` when ``dist(q, p) <= r(q)``; an edge joins
    ``p`` and ``q`` when each covers the other. Nothing besides the points and
    radii is stored, so the edge set cannot drift from its definition.
    """

    def __init__(self, points: PointSet, radii):
        self.points = points
        self.radii = _frozen(_radius_array(points, radii))

    def __repr__(self) -> str:
        return f"CommGraph(n={self.n}, edges={self.num_edges})"

    @property
    def n(self) -> int:
        return self.points.n

    @cached_property
    def coverage(self) -> np.ndarray:
        """``coverage[q, p]`` is true when q's transmission reaches p (q != p)."""
        cov = self.points.distances <= self.radii[:, None]
        np.fill_diagonal(cov, False)
        return _frozen(cov)

    @cached_property
    def adjacency(self) -> np.ndarray:
        cov = self.coverage
        return _frozen(cov & cov.T)

    @cached_property
    def hop_ranks(self) -> np.ndarray:
        """Dense rank of each edge length; non-edges get the largest int32.

        Equal lengths share a rank, so strict comparisons between ranks agree
        exactly with strict comparisons between the lengths themselves.
        """
        ii, jj = np.nonzero(np.triu(self.adjacency, k=1))
        _, rank = np.unique(self.points.distances[ii, jj], return_inverse=True)
        out = np.full((self.n, self.n), np.iinfo(np.int32).max, dtype=np.int32)
        out[ii, jj] = rank
        out[jj, ii] = rank
        return _frozen(out)

    @cached_property
    def edges(self) -> tuple[Edge, ...]:
        ii, jj = np.nonzero(np.triu(self.adjacency, k=1))
        return tuple((int(i), int(j)) for i, j in zip(ii, jj))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def neighbours(self, u: int) -> np.ndarray:
        return np.flatnonzero(self.adjacency[u])

    def has_edge(self, u: int, v: int) -> bool:
        return u != v and bool(self.adjacency[u, v])

    def scaled(self, alpha: float) -> CommGraph:
        return CommGraph(self.points.scaled(alpha), self.radii * alpha)

    def to_embedded(self) -> EmbeddedGraph:
        return EmbeddedGraph(self.points, self.edges)


@dataclass(frozen=True)
class EmbeddedGraph:
    """An explicit geometric graph, before radii are assigned."""

    points: PointSet
    edges: frozenset

    def __init__(self, points: PointSet, edges: Iterable[tuple[int, int]] = ()):
        n = points.n
        norm = set()
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ModelError(f"edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
            e = normalize_edge(u, v)
            if e in norm:
                raise ModelError(f"duplicate edge {e}")
            norm.add(e)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "edges", frozenset(norm))

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.points.n, dtype=int)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def total_length(self) -> float:
        return sum(self.points.dist(u, v) for u, v in self.edges)


def build_comm_graph(points: PointSet, radii) -> CommGraph:
    return CommGraph(points, radii)


def closure(graph: EmbeddedGraph) -> CommGraph:
    """Edge-minimal communication graph containing ``graph``.

    Each node's radius is the length of its longest incident edge, copied
    straight from the distance matrix so primitive-edge tests stay exact.
    """
    points = graph.points
    deg = graph.degrees()
    isolated = np.flatnonzero(deg == 0)
    if isolated.size:
        raise ModelError(f"node(s) {isolated[:5].tolist()} have no incident edge; radius undefined")
    D = points.distances
    radii = np.zeros(points.n)
    for u, v in graph.edges:
        d = D[u, v]
        if d > radii[u]:
            radii[u] = d
        if d > radii[v]:
            radii[v] = d
    return CommGraph(points, radii)


def _check_node(G: CommGraph, p: int) -> int:
    if not (0 <= int(p) < G.n):
        raise ModelError(f"unknown node {p}")
    return int(p)


def _check_edge(G: CommGraph, e) -> Edge:
    u, v = normalize_edge(*e)
    _check_node(G, u)
    _check_node(G, v)
    if not G.adjacency[u, v]:
        raise ModelError(f"{(u, v)} is not an edge of the graph")
    return u, v


def interference_counts(G: CommGraph) -> np.ndarray:
    """Interference at every node: how many other nodes cover it."""
    return G.coverage.sum(axis=0)


def interference_at(G: CommGraph, p: int) -> int:
    p = _check_node(G, p)
    return int(G.coverage[:, p].sum())


def max_interference(G: CommGraph) -> int:
    return int(interference_counts(G).max())


def is_primitive(G: CommGraph, e) -> bool:
    u, v = _check_edge(G, e)
    r = min(G.radii[u], G.radii[v])
    d = G.points.distances[u, v]
    return bool(r == d or math.isclose(r, d, rel_tol=RADIUS_RTOL, abs_tol=0.0))


def _bridged(adjacency: np.ndarray, D: np.ndarray, u: int, v: int) -> bool:
    t = D[u, v]
    from_u = adjacency[u] & (D[u] < t)
    to_v = adjacency[v] & (D[v] < t)
    if np.any(from_u & to_v):
        return True
    block = np.ix_(from_u, to_v)
    return bool(np.any(adjacency[block] & (D[block] < t)))


def is_bridged(G: CommGraph, e) -> bool:
    """True if a path of at most three edges of G, each strictly shorter
    than ``e``, joins the endpoints of ``e``."""
    u, v = _check_edge(G, e)
    return _bridged(G.adjacency, G.points.distances, u, v)


def primitive_edges(G: CommGraph) -> list[Edge]:
    return [e for e in G.edges if is_primitive(G, e)]


def in_T(G: CommGraph) -> bool:
    """Membership test: no primitive edge of G is bridged."""
    A, D = G.adjacency, G.points.distances
    return not any(_bridged(A, D, u, v) for u, v in primitive_edges(G))


def connected_components(G: CommGraph) -> list[frozenset]:
    """Components as frozensets, ordered by smallest member."""
    count, labels = _cc(csr_matrix(G.adjacency), directed=False)
    groups: dict[int, set] = {}
    for node, lab in enumerate(labels):
        groups.setdefault(int(lab), set()).add(node)
    return sorted((frozenset(g) for g in groups.values()), key=min)


def is_connected(G: CommGraph) -> bool:
    if G.n == 1:
        return True
    count, _ = _cc(csr_matrix(G.adjacency), directed=False)
    return count == 1


def edge_length_extremes(G: CommGraph) -> tuple[float, float]:
    if not G.edges:
        raise ModelError("graph has no edges")
    D = G.points.distances
    lengths = D[np.triu(G.adjacency, k=1)]
    return float(lengths.min()), float(lengths.max())
