"""Distance oracle over sketched points.

For every point the oracle keeps the squared sketch distance to each current
center together with the smallest one, so the seeding cost, D^2 samples and
"what if this point were a center" queries never touch the full dimension.

Storage is one ``capacity x n`` matrix indexed by (slot, point); a center
owns one slot for as long as it is selected.  Deleting a center frees its
slot but leaves the column in place, and re-inserting the same center before
the slot is recycled revives that column instead of recomputing it.  The
stored values are identical either way.  Each point also tracks its
runner-up center, which lets a swap scan score "remove ``b``" without
touching the matrix.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping

import numpy as np

from ._kernels import kernels, new_top
from .dataset import PointSet
from .sketch import SketchedSet, SketchSpec, project

__all__ = [
    "CenterDistanceIndex",
    "DistanceOracle",
    "OracleError",
    "PointDistances",
    "d2_draw",
]


class OracleError(ValueError):
    """Invalid oracle operation (missing centers, duplicates, non-members)."""


def d2_draw(weights: np.ndarray, rng: np.random.Generator, centers: Iterable[int] = ()) -> int:
    """Draw ``j`` with probability ``weights[j] / sum(weights)``.

    If every weight is zero the draw is uniform over indices not in
    ``centers``, or over all indices when nothing else is left.  Exactly one
    value is taken from ``rng`` in every case.
    """
    cum = np.cumsum(weights)
    total = cum[-1]
    if total > 0.0:
        j = int(np.searchsorted(cum, rng.random() * total, side="right"))
        if j >= len(cum):
            # rounding pushed the target onto the last boundary
            j = int(np.flatnonzero(weights > 0.0)[-1])
        return j
    taken = set(centers)
    n = len(weights)
    pool = [i for i in range(n) if i not in taken] if len(taken) < n else list(range(n))
    return pool[int(rng.integers(len(pool)))]


class PointDistances(Mapping):
    """Read-only view of one point's center -> squared distance map."""

    def __init__(self, oracle: "DistanceOracle", i: int):
        self._o = oracle
        self._i = i

    def __getitem__(self, center: int) -> float:
        s = self._o._center_slot[center] if 0 <= center < self._o.n else -1
        if s < 0:
            raise KeyError(center)
        return float(self._o._dist[s, self._i])

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self._o._members))

    def __len__(self) -> int:
        return len(self._o._members)

    def min(self) -> tuple[int, float]:
        """``(center, distance)`` of the nearest center; ties go to the smaller index."""
        top = self._o._top
        s = top.min_slot[self._i]
        if s < 0:
            raise OracleError("no centers")
        return int(self._o._slot_center[s]), float(top.min_val[self._i])


class CenterDistanceIndex:
    """The per-point maps ``v[0..n)``; ``index[i]`` is a :class:`PointDistances`."""

    def __init__(self, oracle: "DistanceOracle"):
        self._o = oracle

    def __len__(self) -> int:
        return self._o.n

    def __getitem__(self, i: int) -> PointDistances:
        if not 0 <= i < self._o.n:
            raise IndexError(f"point index {i} out of range [0, {self._o.n})")
        return PointDistances(self._o, i)

    def mins(self) -> np.ndarray:
        """Copy of every point's nearest-center distance."""
        return self._o._top.min_val.copy()

    def table(self) -> tuple[list[int], np.ndarray]:
        """``(centers, D)`` with ``D[i, c]`` the stored distance from point ``i``
        to the ``c``-th center in ascending order."""
        centers = self._o.centers
        slots = self._o._center_slot[centers]
        return centers, self._o._dist[slots].T.copy()

    def nearest(self) -> np.ndarray:
        """Nearest center of every point (-1 while there are no centers)."""
        top = self._o._top
        return np.where(top.min_slot >= 0, self._o._slot_center[top.min_slot], -1)


class DistanceOracle:
    """Sketch-backed distance oracle.

    >>> from sketchseed.dataset import PointSet
    >>> P = PointSet([[0.0], [1.0], [3.0]])
    >>> o = DistanceOracle(P, SketchSpec(kind="identity"), [0])
    >>> o.cost()
    10.0
    >>> o.query(2)
    1.0
    """

    def __init__(
        self,
        points: PointSet,
        spec: SketchSpec | None = None,
        centers: Iterable[int] = (),
        *,
        sketch: SketchedSet | None = None,
    ):
        spec = spec or SketchSpec()
        self.points = points
        self.sketch = sketch if sketch is not None else project(points, spec)
        if self.sketch.n != points.n:
            raise ValueError("sketch row count does not match the point set")
        self._Q = self.sketch.rows
        self.n = points.n
        self._k = kernels()
        initial = [int(c) for c in centers]
        cap = max(4, len(initial) + 1)
        self._dist = np.empty((cap, self.n))
        self._slot_center = np.full(cap, -1, dtype=np.int64)
        self._slot_ghost = np.full(cap, -1, dtype=np.int64)
        self._center_slot = np.full(self.n, -1, dtype=np.int64)
        self._ghost_slot = np.full(self.n, -1, dtype=np.int64)
        self._top = new_top(self.n)
        self._tmp = np.empty(self.n)
        self._members: set[int] = set()
        self._sum = 0.0
        for c in initial:
            self.insert(c)

    # -- inspection --------------------------------------------------------

    @property
    def m(self) -> int:
        return self.sketch.m

    @property
    def centers(self) -> list[int]:
        return sorted(self._members)

    @property
    def index(self) -> CenterDistanceIndex:
        return CenterDistanceIndex(self)

    @property
    def cached_cost(self) -> float:
        """Sum cached by the last ``cost()``; 0.0 while no center is selected."""
        return self._sum

    def __contains__(self, j: int) -> bool:
        return j in self._members

    def __len__(self) -> int:
        return len(self._members)

    def _check_index(self, j: int) -> int:
        j = int(j)
        if not 0 <= j < self.n:
            raise IndexError(f"point index {j} out of range [0, {self.n})")
        return j

    def _require_centers(self):
        if not self._members:
            raise OracleError("no centers")

    # -- procedures --------------------------------------------------------

    def cost(self) -> float:
        """Recompute and cache the sketched cost of the current centers."""
        self._require_centers()
        self._sum = float(self._k.pairwise_sum(self._top.min_val))
        return self._sum

    def _free_slot(self) -> int:
        free = np.flatnonzero(self._slot_center < 0)
        if free.size == 0:
            self._grow()
            free = np.flatnonzero(self._slot_center < 0)
        clean = free[self._slot_ghost[free] < 0]
        s = int(clean[0] if clean.size else free[0])
        g = self._slot_ghost[s]
        if g >= 0:
            self._ghost_slot[g] = -1
            self._slot_ghost[s] = -1
        return s

    def _grow(self):
        cap = self._dist.shape[0]
        dist = np.empty((2 * cap, self.n))
        dist[:cap] = self._dist
        self._dist = dist
        self._slot_center = np.concatenate([self._slot_center, np.full(cap, -1, dtype=np.int64)])
        self._slot_ghost = np.concatenate([self._slot_ghost, np.full(cap, -1, dtype=np.int64)])

    def insert(self, j: int) -> float:
        """Add point ``j`` to the centers; returns the refreshed cost."""
        j = self._check_index(j)
        if j in self._members:
            raise OracleError(f"duplicate center {j}")
        s = int(self._ghost_slot[j])
        reuse = s >= 0
        if reuse:
            self._ghost_slot[j] = -1
            self._slot_ghost[s] = -1
        else:
            s = self._free_slot()
        self._k.insert_slot(self._Q, j, s, reuse, self._dist, self._slot_center, *self._top)
        self._center_slot[j] = s
        self._members.add(j)
        return self.cost()

    def delete(self, j: int) -> float:
        """Remove center ``j``; returns the refreshed cost."""
        j = self._check_index(j)
        if j not in self._members:
            raise OracleError(f"{j} is not a center")
        if len(self._members) == 1:
            raise OracleError(f"cannot delete {j}: it is the last center")
        s = int(self._center_slot[j])
        self._center_slot[j] = -1
        self._members.discard(j)
        active = self._center_slot[sorted(self._members)]
        self._k.delete_slot(s, active, self._dist, self._slot_center, *self._top)
        self._ghost_slot[j] = s
        self._slot_ghost[s] = j
        return self.cost()

    def sample(self, rng: np.random.Generator) -> int:
        """D^2 draw: ``j`` with probability proportional to its nearest-center distance."""
        self._require_centers()
        return d2_draw(self._top.min_val, rng, self._members)

    def query(self, j: int) -> float:
        """Sketched cost of the current centers plus ``j``; does not modify state."""
        j = self._check_index(j)
        self._require_centers()
        return float(self._k.query(self._Q, j, self._top.min_val, self._tmp))

    def best_swap(self, a: int, incumbent: float | None = None) -> tuple[int | None, float]:
        """Score every center ``b`` (ascending) as delete(b), query(a), insert(b) would.

        Returns the first ``b`` achieving the lowest estimate strictly below
        ``incumbent`` (default: the current cost) and that estimate, or
        ``(None, incumbent)`` if no swap improves.  State is not modified.
        """
        a = self._check_index(a)
        self._require_centers()
        if len(self._members) < 2:
            raise OracleError("swap scan needs at least two centers")
        if incumbent is None:
            incumbent = self.cost()
        slots = self._center_slot[sorted(self._members)]
        top = self._top
        s, best = self._k.best_swap(
            self._Q, a, slots, float(incumbent), top.min_val, top.min_slot, top.min2_val, self._tmp
        )
        return (int(self._slot_center[s]) if s >= 0 else None), float(best)
