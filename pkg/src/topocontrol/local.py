"""Two-local radius reduction over a maximum-power communication graph.

The protocol runs in three synchronous phases:

1. every node learns positions and maximum radii of its 2-hop neighbourhood
   in ``G_max`` (simulated by :func:`two_hop_view`);
2. every node shrinks its radius while its furthest in-range neighbour is
   bridged in ``G_max`` (:func:`reduce_radius`);
3. every node, after one exchange of phase-2 radii, shrinks its radius to its
   furthest bidirectional neighbour (:func:`remove_asymmetric`).

A node's phase-2 computation reads only its own view, so results do not
depend on the order in which nodes are processed.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ModelError
from .model import CommGraph


@dataclass(frozen=True)
class LocalView:
    """What node ``center`` knows after the data acquisition phase.

    ``ids`` are the global ids of every node within two hops of the center in
    ``G_max`` (center included). Only rows and columns of ``graph`` indexed by
    ``ids`` are ever read.
    """

    center: int
    ids: np.ndarray
    graph: CommGraph = field(repr=False)

    @cached_property
    def _index(self) -> dict[int, int]:
        return {int(g): i for i, g in enumerate(self.ids)}

    def __contains__(self, node: int) -> bool:
        return int(node) in self._index

    def __len__(self) -> int:
        return len(self.ids)

    @cached_property
    def positions(self) -> dict[int, tuple[float, ...]]:
        pts = self.graph.points
        return {int(g): pts[int(g)] for g in self.ids}

    @cached_property
    def max_radii(self) -> dict[int, float]:
        return {int(g): float(self.graph.radii[g]) for g in self.ids}

    @cached_property
    def adjacency(self) -> np.ndarray:
        """``G_max`` restricted to the view, indexed like ``ids``."""
        return self.graph.adjacency[np.ix_(self.ids, self.ids)]

    @cached_property
    def center_neighbours(self) -> np.ndarray:
        return self.graph.neighbours(self.center)

    def neighbours(self, node: int) -> list[int]:
        """Neighbours of ``node`` that are part of the view."""
        row = self.adjacency[self._local(node)]
        return [int(g) for g in self.ids[row]]

    def dist(self, a: int, b: int) -> float:
        self._local(a)
        self._local(b)
        return float(self.graph.points.distances[a, b])

    def _local(self, node: int) -> int:
        try:
            return self._index[int(node)]
        except KeyError:
            raise ModelError(f"node {node} is not in the view of node {self.center}") from None


def two_hop_view(G_max: CommGraph, u: int) -> LocalView:
    if not (0 <= int(u) < G_max.n):
        raise ModelError(f"unknown node {u}")
    u = int(u)
    nbrs = G_max.neighbours(u)
    reach = G_max.adjacency[nbrs].any(axis=0) if nbrs.size else np.zeros(G_max.n, dtype=bool)
    reach = reach.copy()
    reach[nbrs] = True
    reach[u] = True
    ids = np.flatnonzero(reach)
    ids.setflags(write=False)
    return LocalView(u, ids, G_max)


def bridged_local(view: LocalView, a: int, b: int) -> bool:
    """Bridging test run by node ``a`` on its view, checking 2- and 3-edge paths."""
    if b not in view:
        raise ModelError(f"node {b} is not in the view of node {view.center}")
    if a not in view:
        raise ModelError(f"node {a} is not in the view of node {view.center}")
    d = view.dist
    dab = d(a, b)
    adj_b = set(view.neighbours(b))
    for v in view.neighbours(a):
        dav = d(a, v)
        if max(dav, d(v, b)) < dab and v in adj_b:
            return True
        for w in view.neighbours(v):
            if max(dav, d(v, w), d(w, b)) < dab and w in adj_b:
                return True
    return False


def _bridged_mask(view: LocalView) -> np.ndarray:
    """Bridged flag for each entry of ``view.center_neighbours``.

    Works on edge-length ranks rather than lengths; see ``CommGraph.hop_ranks``.
    """
    R = view.graph.hop_ranks
    u = view.center
    nbrs = view.center_neighbours
    ids = view.ids
    row = R[u]
    hop = R.take(nbrs, axis=0).take(ids, axis=1)  # (k, m), non-edges are int32 max
    d_u = row.take(nbrs)
    # smallest possible longest edge over walks u-v-x, then over walks of one or two edges
    upto_two = np.maximum(d_u[:, None], hop).min(axis=0)
    np.minimum(upto_two, row.take(ids), out=upto_two)
    # ... extended by one more edge x-f
    upto_three = np.maximum(upto_two[None, :], hop).min(axis=1)
    return upto_three < d_u


def bridged_neighbours(view: LocalView) -> dict[int, bool]:
    """Bridging status of every edge between the center and its neighbours.

    Vectorised form of :func:`bridged_local`: an edge ``{u, f}`` is bridged
    exactly when some walk of at most three ``G_max`` edges from ``u`` to
    ``f`` has all its edges shorter than ``dist(u, f)``. The smallest
    possible longest-edge over such walks is computed for all ``f`` at once.
    """
    nbrs = view.center_neighbours
    if nbrs.size == 0:
        return {}
    return {int(f): bool(b) for f, b in zip(nbrs, _bridged_mask(view))}


def _reduce(view: LocalView) -> tuple[float, int]:
    """Phase-2 loop; returns the reduced radius and the number of reductions.

    Neighbours are ranked in descending (length, id, id) order, so "the
    furthest neighbour strictly within r'" is the entry after the one that
    currently defines r'. Before any reduction r' is the maximum radius,
    which lies above every neighbour.
    """
    u = view.center
    r = float(view.graph.radii[u])
    nbrs = view.center_neighbours
    if nbrs.size == 0:
        return r, 0
    d_u = view.graph.points.distances[u, nbrs]
    rank = np.lexsort((np.maximum(nbrs, u), np.minimum(nbrs, u), d_u))[::-1]
    bridged = _bridged_mask(view)[rank].tolist()
    lengths = d_u[rank].tolist()
    f = 0  # position in rank of the current furthest neighbour; None once exhausted
    limit = -1  # position of the neighbour defining r'; -1 stands for r_max
    reductions = 0
    while f is not None and bridged[f]:
        reductions += 1
        nxt = limit + 1
        if nxt < len(lengths):
            f = limit = nxt
            r = lengths[nxt]
        else:
            f = None
            r = 0.0
    return r, reductions


def reduce_radius(view: LocalView) -> float:
    return _reduce(view)[0]


def remove_asymmetric(
    u: int,
    r_self: float,
    neighbour_radii: Mapping[int, float],
    view: LocalView,
) -> float:
    """Shrink ``r_self`` to the furthest neighbour reachable in both directions.

    Returns 0.0 when no ``G_max`` neighbour is reachable both ways.
    """
    best = 0.0
    for v in view.neighbours(u):
        d = view.dist(u, v)
        if d <= min(r_self, neighbour_radii[v]) and d > best:
            best = d
    return best


def _remove_asymmetric_all(G_max: CommGraph, reduced: np.ndarray) -> np.ndarray:
    D = G_max.points.distances
    both = G_max.adjacency & (D <= reduced[:, None]) & (D <= reduced[None, :])
    return np.where(both, D, 0.0).max(axis=1)


def reduced_radii(G_max: CommGraph, order: Iterable[int] | None = None) -> np.ndarray:
    """Phases 1 and 2: the radius every node settles on before phase 3."""
    nodes = range(G_max.n) if order is None else [int(u) for u in order]
    out = np.array(G_max.radii, dtype=float)
    for u in nodes:
        out[u] = reduce_radius(two_hop_view(G_max, u))
    return out


def run_protocol(G_max: CommGraph, order: Iterable[int] | None = None) -> CommGraph:
    """Run all three phases and return ``G_min``."""
    phase_two = reduced_radii(G_max, order)
    final = _remove_asymmetric_all(G_max, phase_two)
    return CommGraph(G_max.points, final)
