"""Node placement, mobility models and trace ingestion.

Walk and waypoint states hold one row per node and are advanced for all
nodes at once; a whole trajectory draws from a single ``numpy`` Generator.
"""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from .errors import IngestionError, ModelError
from .model import PointSet

DEFAULT_SPEED = (0.2, 10.0)
DEFAULT_PAUSE = 10.0


@dataclass(frozen=True)
class Region:
    extents: tuple[float, ...] = (1000.0, 1000.0)

    def __post_init__(self):
        ext = tuple(float(e) for e in self.extents)
        if not ext or any(not e > 0 for e in ext):
            raise ModelError(f"region extents must be positive, got {self.extents}")
        object.__setattr__(self, "extents", ext)

    @property
    def dim(self) -> int:
        return len(self.extents)

    @property
    def center(self) -> np.ndarray:
        return np.asarray(self.extents) / 2.0

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(0.0, 1.0, size=(n, self.dim)) * np.asarray(self.extents)

    def contains(self, xy: np.ndarray) -> np.ndarray:
        xy = np.atleast_2d(xy)
        return np.all((xy >= 0.0) & (xy <= np.asarray(self.extents)), axis=1)

    @classmethod
    def parse(cls, text: str) -> Region:
        """Parse ``"1000x1000"`` style extents."""
        try:
            return cls(tuple(float(p) for p in text.lower().split("x")))
        except ValueError:
            raise ModelError(f"bad region {text!r}; expected e.g. 1000x1000") from None


@dataclass(frozen=True)
class DistributionSpec:
    """A point distribution and, when known, its density bound.

    For a density bounded by ``density_bound`` on a unit-volume domain, the
    minimum pairwise distance of ``n`` samples exceeds ``n ** -exponent``
    with probability at least ``1 - 1/n``.
    """

    kind: str = "uniform"
    density_bound: float | None = 1.0
    dim: int = 2

    @property
    def exponent(self) -> float | None:
        if self.density_bound is None:
            return None
        return class_d_exponent(self.density_bound, self.dim)


def class_d_exponent(density_bound: float, dim: int) -> float:
    if density_bound < 1:
        raise ModelError("a density on a unit-volume domain is bounded by at least 1")
    return 1.0 + (math.log2(density_bound) + 2.0) / dim


def place_uniform(n: int, region: Region, seed) -> PointSet:
    if n < 1:
        raise ModelError("need at least one node")
    rng = np.random.default_rng(seed)
    return PointSet(region.sample(rng, n))


def min_pairwise_distance(points: PointSet) -> float:
    if points.n < 2:
        raise ModelError("need at least two points")
    dist, _ = cKDTree(points.coords).query(points.coords, k=2)
    return float(dist[:, 1].min())


# ---------------------------------------------------------------------------
# random walk


@dataclass(frozen=True)
class WalkState:
    position: np.ndarray  # (n, 2)
    speed: np.ndarray  # (n,)
    direction: np.ndarray  # (n,) radians
    region: Region = field(default_factory=Region)
    speed_range: tuple[float, float] = DEFAULT_SPEED

    @property
    def n(self) -> int:
        return self.position.shape[0]


def init_walk(n: int, region: Region, rng: np.random.Generator, speed_range=DEFAULT_SPEED) -> WalkState:
    if region.dim != 2:
        raise ModelError("the random walk model is two-dimensional")
    pos = region.sample(rng, n)
    speed = rng.uniform(speed_range[0], speed_range[1], size=n)
    direction = rng.uniform(0.0, 2.0 * math.pi, size=n)
    return WalkState(pos, speed, direction, region, tuple(speed_range))


def walk_step(state: WalkState, dt: float, interval_elapsed: bool, rng: np.random.Generator) -> WalkState:
    """Advance every node by ``dt`` seconds.

    A node whose move would leave the region turns around (direction + pi)
    and moves the full step the other way; if that still leaves the region
    it stops at the boundary.
    """
    if not dt > 0:
        raise ModelError("dt must be positive")
    speed, direction = state.speed, state.direction
    if interval_elapsed:
        lo, hi = state.speed_range
        speed = rng.uniform(lo, hi, size=state.n)
        direction = rng.uniform(0.0, 2.0 * math.pi, size=state.n)
    step = (speed * dt)[:, None]
    heading = np.column_stack((np.cos(direction), np.sin(direction)))
    proposed = state.position + step * heading
    out = ~state.region.contains(proposed)
    if np.any(out):
        direction = direction.copy()
        direction[out] = np.mod(direction[out] + math.pi, 2.0 * math.pi)
        back = state.position[out] - step[out] * heading[out]
        proposed[out] = np.clip(back, 0.0, np.asarray(state.region.extents))
    return replace(state, position=proposed, speed=speed, direction=direction)


# ---------------------------------------------------------------------------
# random waypoint


@dataclass(frozen=True)
class WaypointState:
    position: np.ndarray  # (n, d)
    destination: np.ndarray  # (n, d)
    speed: np.ndarray  # (n,)
    pause: np.ndarray  # (n,) seconds of pause left
    moving: np.ndarray  # (n,) bool
    region: Region = field(default_factory=Region)
    speed_range: tuple[float, float] = DEFAULT_SPEED
    pause_max: float = DEFAULT_PAUSE

    @property
    def n(self) -> int:
        return self.position.shape[0]


def init_waypoint(
    n: int,
    region: Region,
    rng: np.random.Generator,
    speed_range=DEFAULT_SPEED,
    pause_max: float = DEFAULT_PAUSE,
) -> WaypointState:
    pos = region.sample(rng, n)
    dest = region.sample(rng, n)
    speed = rng.uniform(speed_range[0], speed_range[1], size=n)
    return WaypointState(
        pos, dest, speed, np.zeros(n), np.ones(n, dtype=bool), region, tuple(speed_range), float(pause_max)
    )


def waypoint_step(state: WaypointState, dt: float, rng: np.random.Generator) -> WaypointState:
    if not dt > 0:
        raise ModelError("dt must be positive")
    pos = state.position.copy()
    dest = state.destination.copy()
    speed = state.speed.copy()
    pause = state.pause.copy()
    moving = state.moving.copy()

    paused = ~moving
    if np.any(paused):
        pause[paused] = np.maximum(pause[paused] - dt, 0.0)
        resume = paused & (pause <= 0.0)
        k = int(resume.sum())
        if k:
            lo, hi = state.speed_range
            dest[resume] = state.region.sample(rng, k)
            speed[resume] = rng.uniform(lo, hi, size=k)
            moving[resume] = True

    active = state.moving  # nodes that resumed this step start moving next step
    if np.any(active):
        delta = dest[active] - pos[active]
        remaining = np.sqrt((delta**2).sum(axis=1))
        reach = speed[active] * dt
        arrive = remaining <= reach
        frac = np.where(arrive, 1.0, reach / np.where(remaining > 0, remaining, 1.0))
        moved = pos[active] + delta * frac[:, None]
        moved[arrive] = dest[active][arrive]
        pos[active] = moved
        idx = np.flatnonzero(active)[arrive]
        if idx.size:
            pause[idx] = rng.uniform(0.0, state.pause_max, size=idx.size)
            moving[idx] = False
    return replace(state, position=pos, destination=dest, speed=speed, pause=pause, moving=moving)


# ---------------------------------------------------------------------------
# traces


@dataclass(frozen=True)
class TraceSnapshot:
    """Positions of every node seen at one timestamp.

    ``positions`` is keyed by dense node ids; ``labels`` maps those back to
    the ids used in the trace file.
    """

    timestamp: float
    positions: dict[int, tuple[float, ...]]
    labels: dict[int, int]

    def ids(self) -> list[int]:
        return sorted(self.positions)


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_trace(lines: Iterable[str]) -> list[TraceSnapshot]:
    """Parse ``node_id,t_seconds,x_m,y_m`` records into per-timestamp snapshots.

    An optional header line is skipped. When a node has several records at
    the same timestamp the last one wins. Node ids are remapped to
    ``0..m-1`` in ascending order of their original value.
    """
    records: list[tuple[int, float, float, float]] = []
    last_t: dict[int, float] = {}
    first = True
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip().lstrip("\ufeff")
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        if first and fields and not _is_number(fields[0]):
            first = False
            continue
        first = False
        if len(fields) != 4:
            raise IngestionError(f"expected 4 fields, got {len(fields)}", line=lineno)
        try:
            node = int(fields[0])
            t, x, y = (float(f) for f in fields[1:])
        except ValueError:
            raise IngestionError(f"cannot parse {line!r}", line=lineno) from None
        if node < 0 or not all(math.isfinite(v) for v in (t, x, y)):
            raise IngestionError(f"invalid values in {line!r}", line=lineno)
        if node in last_t and t < last_t[node]:
            raise IngestionError(f"timestamp {t} for node {node} goes backwards", line=lineno)
        last_t[node] = t
        records.append((node, t, x, y))

    dense = {orig: i for i, orig in enumerate(sorted(last_t))}
    labels = {i: orig for orig, i in dense.items()}
    by_time: dict[float, dict[int, tuple[float, float]]] = {}
    for node, t, x, y in records:
        by_time.setdefault(t, {})[dense[node]] = (x, y)
    return [
        TraceSnapshot(t, dict(sorted(pos.items())), {i: labels[i] for i in sorted(pos)})
        for t, pos in sorted(by_time.items())
    ]
