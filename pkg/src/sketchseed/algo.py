"""k-means++ seeding with local-search swaps, sketched and exact.

``fast_seeding`` drives a :class:`~sketchseed.oracle.DistanceOracle`;
``baseline_seeding`` follows the same control flow and consumes the same
random stream, but recomputes every distance in the full dimension at every
round.  With an identity sketch the two produce the same centers.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from ._kernels import SERIAL as _EXACT
from .dataset import PointSet, check_centers, exact_cost, make_rng
from .oracle import DistanceOracle, d2_draw
from .sketch import SketchSpec

__all__ = [
    "CostTrajectory",
    "PhaseRecord",
    "SeedingConfig",
    "auto_iterations",
    "baseline_seeding",
    "brute_force_best_swap",
    "fast_seeding",
    "local_search_step",
]

SEED_UNIFORM = "seed-uniform"
D2_ROUND = "d2-round"
LOCAL_SEARCH = "local-search-round"


def auto_iterations(k: int, const: float = 100.0) -> int:
    """``ceil(const * k * max(1, ln ln max(k, 3)))`` local-search rounds."""
    return math.ceil(const * k * max(1.0, math.log(math.log(max(k, 3)))))


@dataclass(frozen=True)
class SeedingConfig:
    """``z=None`` picks the round count with :func:`auto_iterations`."""

    k: int
    z: int | None = None
    z_const: float = 100.0
    sketch: SketchSpec = field(default_factory=SketchSpec)
    seed: int = 0
    exact_eval: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.z is not None and self.z < 0:
            raise ValueError(f"z must be >= 0, got {self.z}")
        if self.z_const <= 0:
            raise ValueError("z_const must be positive")

    @property
    def iterations(self) -> int:
        return auto_iterations(self.k, self.z_const) if self.z is None else self.z


@dataclass
class PhaseRecord:
    phase: str
    approx_cost: float
    exact_cost: float | None
    seconds: float
    sampled: int
    swapped_out: int | None = None


@dataclass
class CostTrajectory:
    """One record per sampling round and per local-search call."""

    records: list[PhaseRecord] = field(default_factory=list)
    init_seconds: float = 0.0
    total_seconds: float = 0.0

    def __iter__(self) -> Iterator[PhaseRecord]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def phase(self, tag: str) -> list[PhaseRecord]:
        return [r for r in self.records if r.phase == tag]

    @property
    def final_cost(self) -> float:
        return self.records[-1].approx_cost

    @property
    def swaps(self) -> int:
        return sum(r.swapped_out is not None for r in self.records)

    @property
    def post_init_seconds(self) -> float:
        return self.total_seconds - self.init_seconds

    def rows(self) -> list[dict]:
        return [
            {
                "round": i,
                "phase": r.phase,
                "approx_cost": r.approx_cost,
                "exact_cost": r.exact_cost,
                "seconds": r.seconds,
                "sampled": r.sampled,
                "swapped_out": r.swapped_out,
            }
            for i, r in enumerate(self.records)
        ]


def _check_k(points: PointSet, k: int):
    if k > points.n:
        raise ValueError(f"k={k} exceeds the number of points n={points.n}")


def _draw_new(draw: int, taken, n: int, rng: np.random.Generator) -> int:
    # only reachable through the all-zero-weight fallback
    if draw not in taken:
        return draw
    pool = [i for i in range(n) if i not in taken]
    return pool[int(rng.integers(len(pool)))]


def _swap_scan(oracle: DistanceOracle, a: int, fused: bool) -> tuple[int | None, float]:
    tmpb = oracle.cost()
    if fused:
        return oracle.best_swap(a, tmpb)
    best, q = tmpb, None
    for b in oracle.centers:
        oracle.delete(b)
        tmpa = oracle.query(a)
        if tmpa < best:
            best, q = tmpa, b
        oracle.insert(b)
    return q, best


def _local_search(oracle, centers, rng, fused) -> tuple[int, int | None]:
    a = oracle.sample(rng)
    if a in oracle:
        return a, None
    q, _ = _swap_scan(oracle, a, fused)
    if q is None:
        return a, None
    oracle.delete(q)
    oracle.insert(a)
    centers.remove(q)
    centers.append(a)
    return a, q


def local_search_step(
    oracle: DistanceOracle, centers: list[int], rng: np.random.Generator, *, fused: bool = True
) -> bool:
    """One swap round: sample ``a`` by D^2, replace the center whose removal
    hurts least if that strictly lowers the estimated cost.

    ``centers`` must mirror ``oracle.centers`` and is updated in place.  A
    round that finds no improving swap leaves both untouched.  ``fused=False``
    runs the scan as literal delete/query/insert calls instead of one kernel.
    """
    if len(centers) < 2:
        raise ValueError("local search needs at least two centers")
    return _local_search(oracle, centers, rng, fused)[1] is not None


def fast_seeding(
    points: PointSet, cfg: SeedingConfig, *, fused: bool = True
) -> tuple[list[int], CostTrajectory]:
    """Sketched k-means++ seeding followed by ``cfg.iterations`` swap rounds.

    Returns the centers (insertion order) and the per-round trajectory.  With
    ``k = 1`` no swap rounds run, since a swap scan must delete a center.
    """
    _check_k(points, cfg.k)
    clock = time.perf_counter
    t_start = clock()
    oracle = DistanceOracle(points, cfg.sketch)
    traj = CostTrajectory(init_seconds=clock() - t_start)
    rng = make_rng(cfg.seed)
    n = points.n

    def record(phase, t0, sampled, swapped=None):
        dt = clock() - t0
        exact = exact_cost(points, centers) if cfg.exact_eval else None
        traj.records.append(PhaseRecord(phase, oracle.cached_cost, exact, dt, sampled, swapped))

    t0 = clock()
    j = int(rng.integers(n))
    centers = [j]
    oracle.insert(j)
    record(SEED_UNIFORM, t0, j)
    for _ in range(1, cfg.k):
        t0 = clock()
        j = _draw_new(oracle.sample(rng), oracle, n, rng)
        oracle.insert(j)
        centers.append(j)
        record(D2_ROUND, t0, j)
    if cfg.k >= 2:
        for _ in range(cfg.iterations):
            t0 = clock()
            a, q = _local_search(oracle, centers, rng, fused)
            record(LOCAL_SEARCH, t0, a, q)
    traj.total_seconds = clock() - t_start
    return centers, traj


def baseline_seeding(points: PointSet, cfg: SeedingConfig) -> tuple[list[int], CostTrajectory]:
    """Exact k-means++ seeding with local search and no cached distances.

    Every round recomputes all point-to-center distances in the full
    dimension (``O(nkd)``); a swap round then scores each candidate removal
    from that fresh matrix.  ``cfg.sketch`` is ignored.
    """
    _check_k(points, cfg.k)
    clock = time.perf_counter
    t_start = clock()
    X = points.coords
    n = points.n
    rng = make_rng(cfg.seed)
    traj = CostTrajectory()
    w = np.empty(n)
    tmp = np.empty(n)

    def record(phase, t0, cost, sampled, swapped=None):
        dt = clock() - t0
        exact = exact_cost(points, centers) if cfg.exact_eval else None
        traj.records.append(PhaseRecord(phase, cost, exact, dt, sampled, swapped))

    def nearest(cs):
        _EXACT.min_sq_dists(X, np.asarray(cs, dtype=np.int64), w)
        return float(_EXACT.pairwise_sum(w))

    t0 = clock()
    j = int(rng.integers(n))
    centers = [j]
    record(SEED_UNIFORM, t0, nearest(centers), j)
    for _ in range(1, cfg.k):
        t0 = clock()
        j = _draw_new(d2_draw(w, rng, centers), centers, n, rng)
        centers.append(j)
        record(D2_ROUND, t0, nearest(centers), j)
    if cfg.k >= 2:
        for _ in range(cfg.iterations):
            t0 = clock()
            order = np.asarray(sorted(centers), dtype=np.int64)
            D = np.empty((n, order.size))
            _EXACT.distance_matrix(X, order, D)
            weights = D.min(axis=1)
            tmpb = float(_EXACT.pairwise_sum(weights))
            a = d2_draw(weights, rng, centers)
            q = None
            cost = tmpb
            if a not in centers:
                col, best = _EXACT.exact_best_swap(X, a, D, tmpb, tmp)
                if col >= 0:
                    q = int(order[col])
                    cost = float(best)
                    centers.remove(q)
                    centers.append(a)
            record(LOCAL_SEARCH, t0, cost, a, q)
    traj.total_seconds = clock() - t_start
    return centers, traj


def brute_force_best_swap(points: PointSet, centers: Sequence[int], a: int) -> tuple[int, float]:
    """Exhaustive best replacement of one center by ``a`` under the exact cost.

    Returns ``(q, cost)`` with ties going to the smaller index; when ``a`` is
    already a center the answer is the no-op ``(a, exact_cost(points, C))``.
    """
    C = check_centers(centers, points.n)
    if len(C) < 2:
        raise ValueError("need at least two centers")
    if a in C:
        return a, exact_cost(points, C)
    best_q, best = -1, math.inf
    for b in sorted(C):
        cand = exact_cost(points, [c for c in C if c != b] + [a])
        if cand < best:
            best_q, best = b, cand
    return best_q, best
