"""Point sets, exact k-means cost, synthetic generators and the dataset file format.

Dataset files are plain text: a header line ``"n d"`` followed by ``n`` lines
of ``d`` comma-separated decimal floats (UTF-8, LF line endings).  Floats are
written with ``repr`` so a save/load round trip is bit-exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from os import PathLike
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DatasetFormatError",
    "GenSpec",
    "Mixture",
    "PointSet",
    "check_centers",
    "cost_mu_identity_check",
    "derive_seed",
    "exact_cost",
    "generate",
    "generate_mixture",
    "load_points",
    "make_rng",
    "mean",
    "save_points",
]

UNIT_SPHERE = "unit-sphere"
GAUSSIAN_MIXTURE = "gaussian-mixture"


class DatasetFormatError(ValueError):
    """Raised when a dataset file cannot be parsed."""


def make_rng(seed: int) -> np.random.Generator:
    """Return the project-wide generator: numpy's PCG64 seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(seed))


def derive_seed(master: int, *keys: int) -> int:
    """Derive an independent 64-bit seed from ``master`` and integer ``keys``."""
    mask = 2**64 - 1
    ss = np.random.SeedSequence([int(master) & mask, *(int(k) & mask for k in keys)])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True, eq=False)
class PointSet:
    """Immutable ``n x d`` float64 coordinate matrix, one point per row."""

    coords: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=np.float64, order="C", copy=True)
        if coords.ndim != 2:
            raise ValueError(f"coords must be 2-D, got shape {coords.shape}")
        if coords.shape[0] < 1 or coords.shape[1] < 1:
            raise ValueError(f"need n >= 1 and d >= 1, got shape {coords.shape}")
        if not np.all(np.isfinite(coords)):
            bad = int(np.argwhere(~np.isfinite(coords))[0, 0])
            raise ValueError(f"non-finite coordinate in row {bad}")
        coords.flags.writeable = False
        object.__setattr__(self, "coords", coords)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    def row(self, i: int) -> np.ndarray:
        return self.coords[i]

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other):
        if not isinstance(other, PointSet):
            return NotImplemented
        return self.coords.shape == other.coords.shape and bool(
            np.array_equal(self.coords, other.coords)
        )

    __hash__ = None


def check_centers(centers: Iterable[int], n: int) -> list[int]:
    """Validate a center selection: distinct indices in ``[0, n)``."""
    out = [int(c) for c in centers]
    for c in out:
        if not 0 <= c < n:
            raise IndexError(f"center index {c} out of range [0, {n})")
    if len(set(out)) != len(out):
        raise ValueError("center indices must be distinct")
    return out


def _min_sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    best = np.full(X.shape[0], np.inf)
    for c in C:
        diff = X - c
        np.minimum(best, np.einsum("ij,ij->i", diff, diff), out=best)
    return best


def exact_cost(points: PointSet, centers: Sequence[int]) -> float:
    """Sum over points of the squared distance to the nearest selected point.

    Distances are taken in the full dimension and accumulated with numpy's
    pairwise summation.
    """
    idx = check_centers(centers, points.n)
    if not idx:
        raise ValueError("no centers")
    X = points.coords
    return float(np.sum(_min_sq_dists(X, X[idx])))


def cost_to(points: PointSet, subset: Sequence[int], vectors: np.ndarray) -> float:
    """Cost of the rows ``subset`` against arbitrary center vectors (``q x d``)."""
    X = points.coords[list(subset)]
    vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    return float(np.sum(_min_sq_dists(X, vectors)))


def mean(points: PointSet, subset: Sequence[int]) -> np.ndarray:
    """Coordinatewise average of the rows listed in ``subset``."""
    idx = list(subset)
    if not idx:
        raise ValueError("mean of an empty subset")
    return points.coords[idx].mean(axis=0)


def cost_mu_identity_check(points: PointSet, subset: Sequence[int], c) -> float:
    """Residual of ``cost(S, {c}) = |S| * ||c - mu||^2 + cost(S, {mu})``.

    Both sides are evaluated independently; the return value is the absolute
    difference.
    """
    idx = list(subset)
    mu = mean(points, idx)
    c = np.asarray(c, dtype=np.float64)
    lhs = cost_to(points, idx, c)
    shift = c - mu
    rhs = len(idx) * float(shift @ shift) + cost_to(points, idx, mu)
    return abs(lhs - rhs)


@dataclass(frozen=True)
class GenSpec:
    """Recipe for a synthetic point set.

    ``distribution`` is ``"unit-sphere"`` (uniform coordinates in [-1, 1],
    each row scaled to unit norm) or ``"gaussian-mixture"`` (``clusters``
    isotropic Gaussians of width ``sigma`` whose means are pairwise
    ``separation * sigma`` apart).
    """

    n: int
    d: int
    seed: int = 0
    distribution: str = UNIT_SPHERE
    clusters: int = 5
    separation: float = 10.0
    sigma: float = 1.0

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError(f"n and d must be positive, got n={self.n}, d={self.d}")
        if self.distribution not in (UNIT_SPHERE, GAUSSIAN_MIXTURE):
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if self.distribution == GAUSSIAN_MIXTURE:
            if not 1 <= self.clusters <= self.n:
                raise ValueError("clusters must lie in [1, n]")
            if self.sigma <= 0 or self.separation < 0:
                raise ValueError("sigma must be positive and separation nonnegative")


@dataclass(frozen=True, eq=False)
class Mixture:
    points: PointSet
    centers: np.ndarray
    labels: np.ndarray

    def center_cost(self) -> float:
        """Cost of the generating means, the stand-in for the optimum."""
        return cost_to(self.points, range(self.points.n), self.centers)


def _unit_sphere(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    X = rng.uniform(-1.0, 1.0, size=(n, d))
    norms = np.linalg.norm(X, axis=1)
    zero = norms == 0.0
    while zero.any():
        X[zero] = rng.uniform(-1.0, 1.0, size=(int(zero.sum()), d))
        norms[zero] = np.linalg.norm(X[zero], axis=1)
        zero = norms == 0.0
    return X / norms[:, None]


def generate_mixture(spec: GenSpec) -> Mixture:
    rng = make_rng(spec.seed)
    k, d = spec.clusters, spec.d
    radius = spec.separation * spec.sigma / math.sqrt(2.0)
    if k <= d:
        # orthonormal directions put every pair of means exactly separation*sigma apart
        basis, _ = np.linalg.qr(rng.standard_normal((d, k)))
        centers = radius * basis.T
    else:
        centers = radius * _unit_sphere(k, d, rng)
    labels = np.arange(spec.n) % k
    rng.shuffle(labels)
    coords = centers[labels] + spec.sigma * rng.standard_normal((spec.n, d))
    return Mixture(PointSet(coords), centers, labels)


def generate(spec: GenSpec) -> PointSet:
    """Generate the point set described by ``spec``; deterministic in ``spec.seed``."""
    if spec.distribution == GAUSSIAN_MIXTURE:
        return generate_mixture(spec).points
    return PointSet(_unit_sphere(spec.n, spec.d, make_rng(spec.seed)))


def save_points(points: PointSet, path: str | PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{points.n} {points.d}\n")
        for row in points.coords:
            fh.write(",".join(repr(float(x)) for x in row))
            fh.write("\n")


def load_points(path: str | PathLike) -> PointSet:
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise DatasetFormatError("line 1: missing header 'n d'")
    header = lines[0].split(" ")
    try:
        if len(header) != 2:
            raise ValueError
        n, d = int(header[0]), int(header[1])
    except ValueError:
        raise DatasetFormatError(f"line 1: malformed header {lines[0]!r}, expected 'n d'") from None
    if n < 1 or d < 1:
        raise DatasetFormatError(f"line 1: header declares n={n}, d={d}; both must be positive")
    body = lines[1:]
    if len(body) != n:
        raise DatasetFormatError(f"header declares {n} rows but file has {len(body)}")
    coords = np.empty((n, d))
    for r, line in enumerate(body):
        lineno = r + 2
        fields = line.rstrip("\r").split(",")
        if len(fields) != d:
            raise DatasetFormatError(
                f"line {lineno} (row {r}): expected {d} values, got {len(fields)}"
            )
        for c, tok in enumerate(fields):
            try:
                val = float(tok)
            except ValueError:
                raise DatasetFormatError(
                    f"line {lineno} (row {r}): cannot parse {tok.strip()!r} as a float"
                ) from None
            if not math.isfinite(val):
                raise DatasetFormatError(
                    f"line {lineno} (row {r}): non-finite value {tok.strip()!r}"
                )
            coords[r, c] = val
    return PointSet(coords)
