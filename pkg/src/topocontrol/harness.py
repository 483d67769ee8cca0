"""Experiment engine: parameter sweeps, per-trial measurements and analysis.

Every trial is seeded from ``(seed, n, trial)`` (static placement) or
``(seed, model, n)`` (one mobile trajectory per ``n``), so results do not
depend on execution order. The same placement is reused for every ``r_max``
and every algorithm, which makes records directly comparable in pairs.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .construct import euclidean_mst, gabriel_udg, unit_disc_graph
from .errors import AnalysisError, ConfigError
from .local import run_protocol
from .mobility import (
    DEFAULT_PAUSE,
    DEFAULT_SPEED,
    Region,
    init_walk,
    init_waypoint,
    load_trace,
    walk_step,
    waypoint_step,
)
from .model import CommGraph, PointSet, closure, edge_length_extremes, interference_counts, is_connected

log = logging.getLogger(__name__)

ALGORITHMS = ("udg", "gabriel", "mst", "lrr")
MODELS = ("static", "walk", "waypoint", "trace")
CSV_COLUMNS = (
    "n",
    "rmax",
    "model",
    "algo",
    "trial",
    "connected",
    "max_interference",
    "mean_interference",
    "dmin",
    "dmax",
    "wall_ms",
)
# a cell is analysed only if at least this share of its G_max instances is connected
MIN_CONNECTED_FRACTION = 0.5
STEP_SECONDS = 1.0
_MODEL_CODE = {m: i for i, m in enumerate(MODELS)}


@dataclass
class ExperimentConfig:
    n_start: int = 50
    n_stop: int = 1000
    n_step: int = 50
    rmax: tuple[float, ...] = (100.0, 200.0, 300.0)
    trials: int = 100
    model: str = "static"
    algorithms: tuple[str, ...] = ALGORITHMS
    seed: int = 0
    region: Region = field(default_factory=Region)
    snapshot_interval: float = 1.0
    burn_in: float = 10_000.0
    trace_file: str | None = None
    speed_range: tuple[float, float] = DEFAULT_SPEED
    pause_max: float = DEFAULT_PAUSE
    timing: bool = False

    def __post_init__(self):
        self.rmax = tuple(float(r) for r in self.rmax)
        self.algorithms = tuple(self.algorithms)
        if self.n_start < 1 or self.n_step < 1 or self.n_stop < self.n_start:
            raise ConfigError(f"empty n-range {self.n_start}..{self.n_stop} step {self.n_step}")
        if not self.rmax or any(not r > 0 for r in self.rmax):
            raise ConfigError("rmax must be a non-empty list of positive radii")
        if self.trials < 1:
            raise ConfigError("trials must be positive")
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; choose from {', '.join(MODELS)}")
        if not self.algorithms:
            raise ConfigError("no algorithms requested")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ConfigError(f"unknown algorithm(s) {bad}; choose from {', '.join(ALGORITHMS)}")
        if self.model == "trace" and not self.trace_file:
            raise ConfigError("the trace model needs a trace file")
        if self.model in ("walk", "waypoint"):
            for name in ("snapshot_interval", "burn_in"):
                val = getattr(self, name)
                if val < 0 or val != int(val):
                    raise ConfigError(f"{name} must be a whole number of seconds")
            if self.snapshot_interval < 1:
                raise ConfigError("snapshot_interval must be at least one second")
        lo, hi = self.speed_range
        if not 0 <= lo <= hi:
            raise ConfigError(f"bad speed range {self.speed_range}")

    @property
    def n_values(self) -> list[int]:
        return list(range(self.n_start, self.n_stop + 1, self.n_step))


@dataclass
class TrialRecord:
    n: int
    rmax: float
    model: str
    algo: str
    trial: int
    connected: bool
    max_interference: int | None = None
    mean_interference: float | None = None
    dmin: float | None = None
    dmax: float | None = None
    wall_ms: float | None = None


def _seed(*parts: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(p) for p in parts]))


def build_topology(algo: str, points: PointSet, r_max: float, G_max: CommGraph | None = None) -> CommGraph:
    """The communication graph produced by one algorithm on one placement."""
    if points.n == 1:
        return CommGraph(points, [0.0])
    if algo == "udg":
        return G_max if G_max is not None else unit_disc_graph(points, r_max)
    if algo == "gabriel":
        return closure(gabriel_udg(points, r_max))
    if algo == "mst":
        return closure(euclidean_mst(points))
    if algo == "lrr":
        return run_protocol(G_max if G_max is not None else unit_disc_graph(points, r_max))
    raise ConfigError(f"unknown algorithm {algo!r}")


def evaluate_instance(
    points: PointSet,
    r_max: float,
    algorithms: Sequence[str],
    *,
    model: str = "static",
    trial: int = 0,
    timing: bool = False,
) -> list[TrialRecord]:
    """Measure every algorithm on one placement.

    When ``G_max`` is disconnected no topology is built and the records carry
    only the connectivity flag.
    """
    G_max = unit_disc_graph(points, r_max)
    connected = is_connected(G_max)
    out = []
    for algo in algorithms:
        rec = TrialRecord(points.n, float(r_max), model, algo, trial, connected)
        if connected:
            start = time.perf_counter()
            topo = build_topology(algo, points, r_max, G_max)
            counts = interference_counts(topo)
            elapsed = (time.perf_counter() - start) * 1000.0
            rec.max_interference = int(counts.max())
            rec.mean_interference = float(counts.mean())
            if topo.num_edges:
                rec.dmin, rec.dmax = edge_length_extremes(topo)
            if timing:
                rec.wall_ms = elapsed
        out.append(rec)
    return out


def _canonical(records: list[TrialRecord], algorithms: Sequence[str]) -> list[TrialRecord]:
    rank = {a: i for i, a in enumerate(algorithms)}
    return sorted(records, key=lambda r: (r.n, r.rmax, _MODEL_CODE[r.model], r.trial, rank[r.algo]))


def mobile_snapshots(config: ExperimentConfig, n: int):
    """Yield ``(index, PointSet)`` snapshots of one seeded trajectory.

    The first snapshot is taken after ``burn_in`` seconds, the rest every
    ``snapshot_interval`` seconds.
    """
    rng = _seed(config.seed, _MODEL_CODE[config.model], n)
    if config.model == "walk":
        state = init_walk(n, config.region, rng, config.speed_range)

        def advance(s):
            return walk_step(s, STEP_SECONDS, True, rng)

    elif config.model == "waypoint":
        state = init_waypoint(n, config.region, rng, config.speed_range, config.pause_max)

        def advance(s):
            return waypoint_step(s, STEP_SECONDS, rng)

    else:
        raise ConfigError(f"{config.model!r} is not a mobility model")
    for _ in range(int(config.burn_in)):
        state = advance(state)
    for k in range(config.trials):
        if k:
            for _ in range(int(config.snapshot_interval)):
                state = advance(state)
        yield k, PointSet(state.position)


def run_experiment(config: ExperimentConfig) -> list[TrialRecord]:
    if config.model == "trace":
        return run_trace_eval(config)
    records: list[TrialRecord] = []
    for n in config.n_values:
        if config.model == "static":
            placements = (
                (t, PointSet(config.region.sample(_seed(config.seed, n, t), n))) for t in range(config.trials)
            )
        else:
            placements = mobile_snapshots(config, n)
        for trial, points in placements:
            for r_max in config.rmax:
                records.extend(
                    evaluate_instance(
                        points, r_max, config.algorithms, model=config.model, trial=trial, timing=config.timing
                    )
                )
        log.info("n=%d done", n)
    return _canonical(records, config.algorithms)


def run_trace_eval(config: ExperimentConfig, snapshots=None) -> list[TrialRecord]:
    """Evaluate algorithms on random subsets of the nodes in each trace snapshot.

    At most ``config.trials`` snapshots are used, in time order.
    """
    if snapshots is None:
        with open(config.trace_file, encoding="utf-8", newline="") as fh:
            snapshots = load_trace(fh)
    snapshots = list(snapshots)[: config.trials]
    records: list[TrialRecord] = []
    for n in config.n_values:
        for idx, snap in enumerate(snapshots):
            ids = snap.ids()
            if len(ids) < n:
                raise ConfigError(f"snapshot at t={snap.timestamp} has {len(ids)} nodes, fewer than n={n}")
            chosen = sorted(_seed(config.seed, n, idx).choice(ids, size=n, replace=False).tolist())
            points = PointSet([snap.positions[i] for i in chosen])
            for r_max in config.rmax:
                records.extend(
                    evaluate_instance(points, r_max, config.algorithms, model="trace", trial=idx, timing=config.timing)
                )
    return _canonical(records, config.algorithms)


# ---------------------------------------------------------------------------
# CSV


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_csv(records: Iterable[TrialRecord], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        row = []
        for name in CSV_COLUMNS:
            value = getattr(rec, name)
            if name == "wall_ms" and value is not None:
                row.append(f"{value:.3f}")
            else:
                row.append(_fmt(value))
        writer.writerow(row)


def records_to_csv(records: Iterable[TrialRecord]) -> str:
    buf = io.StringIO()
    write_csv(records, buf)
    return buf.getvalue()


def read_csv(fh) -> list[TrialRecord]:
    reader = csv.DictReader(fh)
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise AnalysisError(f"unexpected CSV header {reader.fieldnames}")

    def opt(text, cast):
        return None if text == "" else cast(text)

    out = []
    for row in reader:
        out.append(
            TrialRecord(
                n=int(row["n"]),
                rmax=float(row["rmax"]),
                model=row["model"],
                algo=row["algo"],
                trial=int(row["trial"]),
                connected=row["connected"] == "1",
                max_interference=opt(row["max_interference"], int),
                mean_interference=opt(row["mean_interference"], float),
                dmin=opt(row["dmin"], float),
                dmax=opt(row["dmax"], float),
                wall_ms=opt(row["wall_ms"], float),
            )
        )
    return out


# ---------------------------------------------------------------------------
# analysis


@dataclass
class CellStats:
    n: int
    trials: int
    connected: int
    mean_max_interference: float | None

    @property
    def connected_fraction(self) -> float:
        return self.connected / self.trials if self.trials else 0.0

    @property
    def usable(self) -> bool:
        return self.connected > 0 and self.connected_fraction >= MIN_CONNECTED_FRACTION


def cell_stats(
    records: Iterable[TrialRecord], algorithm: str, r_max: float, model: str | None = None
) -> dict[int, CellStats]:
    """Per-n connectivity and mean maximum interference for one algorithm."""
    groups: dict[int, list[TrialRecord]] = defaultdict(list)
    for rec in records:
        if rec.algo == algorithm and rec.rmax == float(r_max) and (model is None or rec.model == model):
            groups[rec.n].append(rec)
    if model is None:
        models = {rec.model for recs in groups.values() for rec in recs}
        if len(models) > 1:
            raise AnalysisError(f"records mix models {sorted(models)}; pick one")
    out = {}
    for n, recs in sorted(groups.items()):
        vals = [r.max_interference for r in recs if r.connected and r.max_interference is not None]
        out[n] = CellStats(n, len(recs), len(vals), float(np.mean(vals)) if vals else None)
    return out


def _r_squared(y: np.ndarray, fitted: np.ndarray) -> float:
    ss_res = float(((y - fitted) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return 1.0 - ss_res / ss_tot


@dataclass
class FitReport:
    """Least-squares fit ``mean max interference ~ a * ln(n) + b``."""

    a: float
    b: float
    r_squared: float
    means: dict[int, float]
    excluded: list[int]
    linear_r_squared: float

    def predict(self, n: float) -> float:
        return self.a * math.log(n) + self.b


def fit_log(records: Iterable[TrialRecord], algorithm: str, r_max: float, model: str | None = None) -> FitReport:
    stats = cell_stats(records, algorithm, r_max, model)
    used = {n: s.mean_max_interference for n, s in stats.items() if s.usable}
    excluded = [n for n, s in stats.items() if not s.usable]
    if len(used) < 3:
        raise AnalysisError(f"need at least 3 usable n-cells for {algorithm} at rmax={r_max}, have {len(used)}")
    ns = np.array(sorted(used), dtype=float)
    y = np.array([used[int(n)] for n in ns])
    a, b = np.polyfit(np.log(ns), y, 1)
    lin = np.polyfit(ns, y, 1)
    return FitReport(
        a=float(a),
        b=float(b),
        r_squared=_r_squared(y, a * np.log(ns) + b),
        means={int(n): float(v) for n, v in zip(ns, y)},
        excluded=excluded,
        linear_r_squared=_r_squared(y, np.polyval(lin, ns)),
    )


@dataclass
class ComparisonRow:
    model: str
    rmax: float
    n: int
    trials: int
    paired: int
    means: dict[str, float]
    leq_rate: dict[tuple[str, str], float]
    tie_rate: dict[tuple[str, str], float]

    @property
    def connected_fraction(self) -> float:
        return self.paired / self.trials if self.trials else 0.0

    @property
    def ordering(self) -> list[str]:
        return sorted(self.means, key=lambda a: (self.means[a], a))


def compare_topologies(records: Iterable[TrialRecord]) -> list[ComparisonRow]:
    """Paired per-trial comparison of algorithms on identical placements."""
    groups: dict[tuple, dict[int, dict[str, TrialRecord]]] = defaultdict(lambda: defaultdict(dict))
    for rec in records:
        groups[(rec.model, rec.rmax, rec.n)][rec.trial][rec.algo] = rec
    rows = []
    for (model, rmax, n), trials in sorted(groups.items(), key=lambda kv: (_MODEL_CODE.get(kv[0][0], 99), kv[0][1:])):
        algos = sorted({a for by_algo in trials.values() for a in by_algo}, key=lambda a: ALGORITHMS.index(a))
        if len(algos) < 2:
            raise AnalysisError(f"cell n={n} rmax={rmax} {model}: need at least two algorithms")
        values: dict[str, list[int]] = {a: [] for a in algos}
        for trial, by_algo in sorted(trials.items()):
            if set(by_algo) != set(algos):
                raise AnalysisError(f"cell n={n} rmax={rmax} {model}: trial {trial} is unpaired")
            flags = {rec.connected for rec in by_algo.values()}
            if len(flags) != 1:
                raise AnalysisError(f"cell n={n} rmax={rmax} {model}: trial {trial} has inconsistent connectivity")
            if not flags.pop():
                continue
            for a in algos:
                values[a].append(by_algo[a].max_interference)
        paired = len(values[algos[0]])
        means, leq, tie = {}, {}, {}
        if paired:
            arrs = {a: np.array(v) for a, v in values.items()}
            means = {a: float(arrs[a].mean()) for a in algos}
            for a in algos:
                for b in algos:
                    if a != b:
                        leq[(a, b)] = float(np.mean(arrs[a] <= arrs[b]))
                        tie[(a, b)] = float(np.mean(arrs[a] == arrs[b]))
        rows.append(ComparisonRow(model, rmax, n, len(trials), paired, means, leq, tie))
    return rows


def format_comparison(rows: Sequence[ComparisonRow]) -> str:
    lines = []
    for row in rows:
        if not row.paired:
            lines.append(f"{row.model:8s} rmax={row.rmax:g} n={row.n}: no connected trials")
            continue
        order = " <= ".join(f"{a}={row.means[a]:.3f}" for a in row.ordering)
        rates = ", ".join(
            f"P({a}<={b})={row.leq_rate[(a, b)]:.2f}"
            for a, b in zip(row.ordering, row.ordering[1:])
        )
        lines.append(
            f"{row.model:8s} rmax={row.rmax:g} n={row.n} paired={row.paired}/{row.trials}: {order}  [{rates}]"
        )
    return "\n".join(lines)

