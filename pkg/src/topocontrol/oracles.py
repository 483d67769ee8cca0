"""Brute-force reference implementations used to check the fast code paths.

Everything here works on plain coordinate tuples and radius lists, with
naive loops, and deliberately shares no graph code with :mod:`.model`.
Functions that take a graph ``G`` only read its raw points and radii.
"""

from __future__ import annotations

import itertools
import math

from .errors import OracleError


def _raw(G):
    """(coords, radii) from a CommGraph-like object or a (coords, radii) pair."""
    if isinstance(G, tuple):
        coords, radii = G
    else:
        coords, radii = G.points, G.radii
    if hasattr(coords, "coords"):
        coords = coords.coords
    if hasattr(coords, "tolist"):
        coords = coords.tolist()
    if hasattr(radii, "tolist"):
        radii = radii.tolist()
    coords =[tuple(float(x) for x in (c if hasattr(c, "__len__") else (c,))) for c in coords]
    return coords, [float(r) for r in radii]


def _dist(p, q) -> float:
    total = 0.0
    for a, b in zip(p, q):
        total += (a - b) * (a - b)
    return math.sqrt(total)


def naive_edges(coords, radii) -> set[tuple[int, int]]:
    n = len(coords)
    out = set()
    for i in range(n):
        for j in range(i + 1, n):
            d = _dist(coords[i], coords[j])
            if d <= radii[i] and d <= radii[j]:
                out.add((i, j))
    return out


def naive_interference(points, radii, p: int) -> int:
    coords, radii = _raw((points, radii))
    count = 0
    for q in range(len(coords)):
        if q != p and _dist(coords[q], coords[p]) <= radii[q]:
            count += 1
    return count


def naive_connected(n: int, edges) -> bool:
    if n <= 1:
        return True
    adj = {i: [] for i in range(n)}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = {0}
    stack = [0]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == n


def naive_components(n: int, edges) -> list[frozenset]:
    adj = {i: [] for i in range(n)}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen: set[int] = set()
    comps = []
    for s in range(n):
        if s in seen:
            continue
        comp = {s}
        stack = [s]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in comp:
                    comp.add(y)
                    stack.append(y)
        seen |= comp
        comps.append(frozenset(comp))
    return comps


def simple_paths(edges, a: int, b: int, max_len: int = 3):
    """Every simple path from a to b using at most ``max_len`` edges."""
    adj: dict[int, set] = {}
    for u, v in edges:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)

    def extend(path):
        last = path[-1]
        if last == b:
            yield list(path)
            return
        if len(path) - 1 == max_len:
            return
        for nxt in sorted(adj.get(last, ())):
            if nxt not in path:
                path.append(nxt)
                yield from extend(path)
                path.pop()

    yield from extend([a])


def exhaustive_bridged(G, e) -> bool:
    coords, radii = _raw(G)
    edges = naive_edges(coords, radii)
    a, b = e
    if (min(a, b), max(a, b)) not in edges:
        raise OracleError(f"{e} is not an edge")
    target = _dist(coords[a], coords[b])
    for path in simple_paths(edges, a, b, 3):
        if all(_dist(coords[x], coords[y]) < target for x, y in zip(path, path[1:])):
            return True
    return False


def candidate_lattice(points) -> list[list[float]]:
    """Per node: sorted distinct distances to the other nodes."""
    coords, _ = _raw((points, []))
    return [
        sorted({_dist(coords[i], coords[j]) for j in range(len(coords)) if j != i})
        for i in range(len(coords))
    ]


def round_down_to_lattice(lattice, radii) -> list[float]:
    """Largest lattice value not above each radius (0.0 if none)."""
    out = []
    for cands, r in zip(lattice, radii):
        below = [c for c in cands if c <= r]
        out.append(max(below) if below else 0.0)
    return out


def coverage_sets(coords, radii) -> list[frozenset]:
    """For each node, the set of other nodes its transmission reaches."""
    n = len(coords)
    return [frozenset(j for j in range(n) if j != i and _dist(coords[i], coords[j]) <= radii[i]) for i in range(n)]


def brute_force_opt(points) -> int:
    """Minimum over connected radius assignments of the maximum interference.

    Radii are drawn from the candidate lattice, which loses nothing: rounding
    any radius down to the largest lattice value below it changes neither
    edges nor coverage.
    """
    coords, _ = _raw((points, []))
    n = len(coords)
    if not 2 <= n <= 6:
        raise OracleError(f"exhaustive search supports 2 <= n <= 6, got {n}")
    lattice = candidate_lattice(coords)
    best = None
    for radii in itertools.product(*lattice):
        edges = naive_edges(coords, radii)
        if len(edges) < n - 1 or not naive_connected(n, edges):
            continue
        worst = max(naive_interference(coords, radii, p) for p in range(n))
        if best is None or worst < best:
            best = worst
    return best


def prufer_trees(n: int):
    """All labelled trees on n nodes, as edge lists, via Prufer sequences."""
    if n < 2:
        return
    if n == 2:
        yield [(0, 1)]
        return
    for seq in itertools.product(range(n), repeat=n - 2):
        degree = [1] * n
        for x in seq:
            degree[x] += 1
        edges = []
        for x in seq:
            leaf = min(i for i in range(n) if degree[i] == 1)
            edges.append((min(leaf, x), max(leaf, x)))
            degree[leaf] -= 1
            degree[x] -= 1
        u, v = (i for i in range(n) if degree[i] == 1)
        edges.append((u, v))
        yield edges


def brute_force_mst_weight(points) -> float:
    coords, _ = _raw((points, []))
    return min(sum(_dist(coords[u], coords[v]) for u, v in tree) for tree in prufer_trees(len(coords)))
