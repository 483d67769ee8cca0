"""Candidate topologies: Euclidean MST, unit disc graph, Gabriel graph within range."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstructionError
from .model import CommGraph, EmbeddedGraph, PointSet


@dataclass(frozen=True, order=True)
class WeightedEdge:
    # Field order gives the (length, smaller id, larger id) sort order.
    length: float
    u: int
    v: int

    @property
    def endpoints(self) -> tuple[int, int]:
        return (self.u, self.v)


def sorted_edges(points: PointSet) -> list[WeightedEdge]:
    """All pairs in ascending (length, u, v) order."""
    iu, iv = np.triu_indices(points.n, k=1)
    lengths = points.distances[iu, iv]
    order = np.lexsort((iv, iu, lengths))
    return [WeightedEdge(float(lengths[k]), int(iu[k]), int(iv[k])) for k in order]


class _DisjointSets:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


def euclidean_mst(points: PointSet) -> EmbeddedGraph:
    """Kruskal over the complete Euclidean graph.

    Pairs are scanned in (length, u, v) order, which makes the tree unique
    even when some pairwise distances coincide.
    """
    n = points.n
    if n < 2:
        raise ConstructionError("a spanning tree needs at least two points")
    iu, iv = np.triu_indices(n, k=1)
    lengths = points.distances[iu, iv]
    order = np.lexsort((iv, iu, lengths))
    sets = _DisjointSets(n)
    tree = []
    for k in order:
        u, v = int(iu[k]), int(iv[k])
        if sets.union(u, v):
            tree.append((u, v))
            if len(tree) == n - 1:
                break
    return EmbeddedGraph(points, tree)


def unit_disc_graph(points: PointSet, r: float) -> CommGraph:
    if not r > 0:
        raise ConstructionError(f"radius must be positive, got {r}")
    return CommGraph(points, np.full(points.n, float(r)))


def gabriel_udg(points: PointSet, r: float) -> EmbeddedGraph:
    """Gabriel graph restricted to pairs at most ``r`` apart.

    A pair survives when no third point lies strictly inside the disc having
    the pair as diameter. Such a witness is closer than ``dist(u, v) <= r`` to
    both endpoints, so only range neighbours of ``u`` need to be checked.
    """
    if not r > 0:
        raise ConstructionError(f"radius must be positive, got {r}")
    D = points.distances
    D2 = D * D
    in_range = D <= r
    np.fill_diagonal(in_range, False)
    edges = []
    for u in range(points.n):
        nbrs = np.flatnonzero(in_range[u])
        later = nbrs[nbrs > u]
        if later.size == 0:
            continue
        # w is strictly inside the diametral disc of uv iff |wu|^2 + |wv|^2 < |uv|^2
        blocked = D2[u].take(nbrs)[None, :] + D2.take(later, axis=0).take(nbrs, axis=1) < D2[u].take(later)[:, None]
        blocked[later[:, None] == nbrs[None, :]] = False
        for v, hit in zip(later, blocked.any(axis=1)):
            if not hit:
                edges.append((u, int(v)))
    return EmbeddedGraph(points, edges)
