"""Johnson-Lindenstrauss random projection of a point set."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._kernels import SERIAL as _K
from .dataset import PointSet, make_rng

__all__ = ["KINDS", "SketchSpec", "SketchedSet", "jl_dimension", "project", "sketch_sq_dist"]

KINDS = ("gaussian", "rademacher", "identity")


@dataclass(frozen=True)
class SketchSpec:
    """Parameters of the projection.

    ``m`` overrides the target dimension computed from ``epsilon``/``delta``.
    The ``identity`` kind ignores all of them and keeps ``m = d``.
    """

    epsilon: float = 0.1
    delta: float = 0.05
    c_m: float = 2.0
    kind: str = "gaussian"
    seed: int = 0
    m: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown sketch kind {self.kind!r}; expected one of {KINDS}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.c_m < 1.0:
            raise ValueError(f"c_m must be >= 1, got {self.c_m}")
        if self.m is not None and self.m < 1:
            raise ValueError(f"m must be positive, got {self.m}")


def jl_dimension(n: int, d: int, spec: SketchSpec) -> int:
    """Target dimension ``min(d, ceil(c_m * eps^-2 * ln(n / delta)))``."""
    if n < 1 or d < 1:
        raise ValueError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    if spec.kind == "identity":
        return d
    if spec.m is not None:
        if spec.m > d:
            warnings.warn(f"sketch dimension m={spec.m} exceeds d={d}; capping at d", stacklevel=2)
        return min(spec.m, d)
    m = math.ceil(spec.c_m * math.log(n / spec.delta) / spec.epsilon**2)
    return max(1, min(d, m))


@dataclass(frozen=True, eq=False)
class SketchedSet:
    """Projected rows ``y_i = Pi x_i`` together with the matrix ``Pi``.

    ``matrix`` is ``None`` for the identity kind.
    """

    rows: np.ndarray
    spec: SketchSpec
    matrix: np.ndarray | None

    @property
    def m(self) -> int:
        return self.rows.shape[1]

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    def transform(self, x) -> np.ndarray:
        """Apply the same projection to extra vectors (rows of ``x``)."""
        x = np.asarray(x, dtype=np.float64)
        if self.matrix is None:
            return x.copy()
        return x @ self.matrix.T


def project(points: PointSet, spec: SketchSpec) -> SketchedSet:
    """Draw one projection matrix from ``spec`` and apply it to every point.

    gaussian entries are N(0, 1/m); rademacher entries are +-1/sqrt(m).
    """
    n, d = points.n, points.d
    m = jl_dimension(n, d, spec)
    if spec.kind == "identity":
        rows = points.coords.copy()
        rows.flags.writeable = False
        return SketchedSet(rows, spec, None)
    rng = make_rng(spec.seed)
    if spec.kind == "gaussian":
        matrix = rng.standard_normal((m, d)) / math.sqrt(m)
    else:
        matrix = (rng.integers(0, 2, size=(m, d)) * 2.0 - 1.0) / math.sqrt(m)
    rows = np.ascontiguousarray(points.coords @ matrix.T)
    rows.flags.writeable = False
    matrix.flags.writeable = False
    return SketchedSet(rows, spec, matrix)


def sketch_sq_dist(sketched: SketchedSet, i: int, j: int) -> float:
    """Squared distance between projected points ``i`` and ``j``.

    Uses the same kernel as the oracle, so values agree bit for bit with the
    distances it stores.
    """
    n = sketched.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"index out of range [0, {n}): ({i}, {j})")
    return float(_K.pair_sq_dist(sketched.rows, i, j))
