"""Randomised cross-checks of the fast code paths against the oracles."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from . import oracles
from .construct import euclidean_mst, unit_disc_graph
from .local import run_protocol
from .model import CommGraph, PointSet, closure, in_T, interference_at, is_bridged, is_connected, max_interference


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def random_graph(rng: np.random.Generator, n_max: int, dim: int = 2) -> CommGraph:
    n = int(rng.integers(1, n_max + 1))
    points = PointSet(rng.uniform(0.0, 1.0, size=(n, dim)))
    radii = rng.uniform(0.0, 1.2, size=n)
    return CommGraph(points, radii)


def check_interference(rng, instances: int = 500, n_max: int = 8) -> CheckResult:
    mismatches = 0
    for _ in range(instances):
        G = random_graph(rng, n_max)
        coords, radii = G.points.coords.tolist(), G.radii.tolist()
        for p in range(G.n):
            if interference_at(G, p) != oracles.naive_interference(coords, radii, p):
                mismatches += 1
    return CheckResult("interference", mismatches == 0, f"{instances} instances, {mismatches} mismatches")


def check_bridged(rng, instances: int = 500, n_max: int = 8) -> CheckResult:
    mismatches = edges = 0
    for _ in range(instances):
        G = random_graph(rng, n_max)
        for e in G.edges:
            edges += 1
            if is_bridged(G, e) != oracles.exhaustive_bridged(G, e):
                mismatches += 1
    return CheckResult("bridged", mismatches == 0, f"{instances} instances, {edges} edges, {mismatches} mismatches")


def check_opt_bound(rng, instances: int = 100, n_max: int = 5) -> CheckResult:
    """The protocol can never beat the exhaustive optimum; count equalities."""
    violations = equal = evaluated = 0
    while evaluated < instances:
        n = int(rng.integers(2, n_max + 1))
        points = PointSet(rng.uniform(0.0, 1.0, size=(n, 2)))
        G_max = unit_disc_graph(points, float(rng.uniform(0.3, 1.5)))
        if not is_connected(G_max):
            continue
        evaluated += 1
        got = max_interference(run_protocol(G_max))
        best = oracles.brute_force_opt(points)
        violations += got < best
        equal += got == best
    return CheckResult(
        "opt-bound",
        violations == 0 and equal > 0,
        f"{instances} instances, {violations} below optimum, {equal} equal to optimum",
    )


def check_mst(rng, instances: int = 200, n_max: int = 6) -> CheckResult:
    bad = 0
    for _ in range(instances):
        n = int(rng.integers(2, n_max + 1))
        points = PointSet(rng.uniform(0.0, 1.0, size=(n, 2)))
        tree = euclidean_mst(points)
        if tree.total_length() > oracles.brute_force_mst_weight(points) + 1e-12 or not in_T(closure(tree)):
            bad += 1
    return CheckResult("mst", bad == 0, f"{instances} instances, {bad} failures")


CHECKS: dict[str, Callable] = {
    "interference": check_interference,
    "bridged": check_bridged,
    "opt-bound": check_opt_bound,
    "mst": check_mst,
}


def run_oracle_suite(seed: int = 0, scale: float = 1.0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    results = []
    for name, check in CHECKS.items():
        default = check.__defaults__[0]
        results.append(check(rng, max(1, int(default * scale))))
    return results
