"""Benchmark harness: timed single runs, parameter sweeps, scaling and quality checks."""

from __future__ import annotations

import csv
import math
import statistics
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from os import PathLike
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence, TextIO

import numpy as np

from .algo import CostTrajectory, SeedingConfig, auto_iterations, baseline_seeding, fast_seeding
from .dataset import (
    GAUSSIAN_MIXTURE,
    GenSpec,
    PointSet,
    derive_seed,
    exact_cost,
    generate,
    generate_mixture,
    mean,
)
from .sketch import KINDS, SketchSpec, jl_dimension

__all__ = [
    "Aggregate",
    "CLAIMS",
    "CSV_FIELDS",
    "RATIO_BOUND",
    "QualityReport",
    "RunParams",
    "RunReport",
    "SUMMARY_FIELDS",
    "SweepResult",
    "SweepSpec",
    "Verdict",
    "aggregate",
    "best_point_cost",
    "format_verdicts",
    "load_summary",
    "loglog_slope",
    "mixture_instance",
    "quality_check",
    "read_reports",
    "run_single",
    "run_sweep",
    "scaling_check",
    "write_reports",
    "write_summary",
    "write_trajectory",
]

RATIO_BOUND = 509.0
MEAN_RATIO_WARN = 2.0
SWEEPABLE = ("n", "d", "m", "k")


@dataclass(frozen=True)
class RunParams:
    """One benchmark condition; the defaults are the reference setting (n=150, d=150, m=75, k=15).

    ``m=None`` derives the sketch dimension from ``epsilon``/``delta``.
    """

    n: int = 150
    d: int = 150
    m: int | None = 75
    k: int = 15
    z: int | None = None
    z_const: float = 100.0
    epsilon: float = 0.1
    delta: float = 0.05
    sketch: str = "gaussian"
    seed: int = 0
    exact_eval: bool = False

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError(f"n and d must be positive, got n={self.n}, d={self.d}")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.m is not None and not 1 <= self.m <= self.d:
            raise ValueError(f"need 1 <= m <= d, got m={self.m}, d={self.d}")
        if self.sketch not in KINDS:
            raise ValueError(f"unknown sketch kind {self.sketch!r}")
        if self.z is not None and self.z < 0:
            raise ValueError("z must be >= 0")
        self.sketch_spec(0)  # validates epsilon / delta

    def sketch_spec(self, seed: int) -> SketchSpec:
        return SketchSpec(self.epsilon, self.delta, kind=self.sketch, seed=seed, m=self.m)

    @property
    def iterations(self) -> int:
        return auto_iterations(self.k, self.z_const) if self.z is None else self.z


@dataclass
class RunReport:
    n: int
    d: int
    m: int
    k: int
    z: int
    epsilon: float
    delta: float
    sketch: str
    seed: int
    data_seed: int
    sketch_seed: int
    fast_seed: int
    baseline_seed: int
    trial: int
    baseline_total_ms: float
    fast_init_ms: float
    fast_total_ms: float
    fast_post_init_ms: float
    fast_per_round_ms: float
    speedup: float
    fast_approx_cost: float
    fast_exact_cost: float
    baseline_exact_cost: float
    fast_swaps: int
    baseline_swaps: int
    fast_centers: list[int] = field(default_factory=list)
    baseline_centers: list[int] = field(default_factory=list)
    fast_trajectory: CostTrajectory | None = field(default=None, repr=False)
    baseline_trajectory: CostTrajectory | None = field(default=None, repr=False)

    def to_row(self) -> dict[str, str]:
        row = {}
        for name in CSV_FIELDS:
            val = getattr(self, name)
            if name.endswith("_ms"):
                row[name] = f"{val:.3f}"
            elif name.endswith("_centers"):
                row[name] = " ".join(str(c) for c in val)
            elif isinstance(val, float):
                row[name] = repr(val)
            else:
                row[name] = str(val)
        return row


# trajectories are written separately (one row per round), see write_trajectory
CSV_FIELDS = tuple(f.name for f in fields(RunReport) if not f.name.endswith("_trajectory"))

_INT_FIELDS = {"n", "d", "m", "k", "z", "seed", "data_seed", "sketch_seed", "fast_seed",
               "baseline_seed", "trial", "fast_swaps", "baseline_swaps"}


def _parse_row(row: Mapping[str, str]) -> dict:
    out = {}
    for name in CSV_FIELDS:
        raw = row[name]
        if name in _INT_FIELDS:
            out[name] = int(raw)
        elif name == "sketch":
            out[name] = raw
        elif name.endswith("_centers"):
            out[name] = [int(c) for c in raw.split()]
        else:
            out[name] = float(raw)
    return out


def write_reports(reports: Iterable[RunReport], dest: str | PathLike | TextIO) -> None:
    """Write one CSV row per report to a path or an open text stream."""
    if hasattr(dest, "write"):
        _write_rows(reports, dest)
        return
    with open(dest, "w", encoding="utf-8", newline="") as fh:
        _write_rows(reports, fh)


def _write_rows(reports: Iterable[RunReport], fh: TextIO) -> None:
    w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow(r.to_row())


def read_reports(path: str | PathLike) -> list[RunReport]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_FIELDS:
            raise ValueError(f"{path}: header does not match the report schema")
        return [RunReport(**_parse_row(row)) for row in reader]


def write_trajectory(traj: CostTrajectory, path: str | PathLike) -> None:
    cols = ["round", "phase", "approx_cost", "exact_cost", "seconds", "sampled", "swapped_out"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for row in traj.rows():
            w.writerow({k: "" if v is None else v for k, v in row.items()})


def run_single(
    params: RunParams, *, trial: int = 0, points: PointSet | None = None
) -> RunReport:
    """Time the baseline and the sketched seeding on one shared point set."""
    seeds = [derive_seed(params.seed, trial, role) for role in range(4)]
    data_seed, sketch_seed, fast_seed, baseline_seed = seeds
    if points is None:
        points = generate(GenSpec(params.n, params.d, data_seed))
    elif (points.n, points.d) != (params.n, params.d):
        raise ValueError("points shape does not match params")
    spec = params.sketch_spec(sketch_seed)
    common = dict(k=params.k, z=params.z, z_const=params.z_const, exact_eval=params.exact_eval)
    base_cfg = SeedingConfig(sketch=spec, seed=baseline_seed, **common)
    fast_cfg = SeedingConfig(sketch=spec, seed=fast_seed, **common)

    base_c, base_t = baseline_seeding(points, base_cfg)
    fast_c, fast_t = fast_seeding(points, fast_cfg)

    rounds = max(1, len(fast_t))
    post = fast_t.post_init_seconds
    return RunReport(
        n=params.n, d=params.d, m=jl_dimension(params.n, params.d, spec), k=params.k,
        z=fast_cfg.iterations if params.k >= 2 else 0,
        epsilon=params.epsilon, delta=params.delta, sketch=params.sketch, seed=params.seed,
        data_seed=data_seed, sketch_seed=sketch_seed, fast_seed=fast_seed,
        baseline_seed=baseline_seed, trial=trial,
        baseline_total_ms=base_t.total_seconds * 1e3,
        fast_init_ms=fast_t.init_seconds * 1e3,
        fast_total_ms=fast_t.total_seconds * 1e3,
        fast_post_init_ms=post * 1e3,
        fast_per_round_ms=post * 1e3 / rounds,
        speedup=base_t.total_seconds / fast_t.total_seconds,
        fast_approx_cost=fast_t.final_cost,
        fast_exact_cost=exact_cost(points, fast_c),
        baseline_exact_cost=exact_cost(points, base_c),
        fast_swaps=fast_t.swaps, baseline_swaps=base_t.swaps,
        fast_centers=fast_c, baseline_centers=base_c,
        fast_trajectory=fast_t, baseline_trajectory=base_t,
    )


# -- sweeps -------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    varying: str
    values: tuple[int, ...]
    base: RunParams = field(default_factory=RunParams)
    trials: int = 3
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if self.varying not in SWEEPABLE:
            raise ValueError(f"can only sweep one of {SWEEPABLE}, got {self.varying!r}")
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if any(v < 1 for v in self.values):
            raise ValueError("sweep values must be positive")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("sweep values must be strictly increasing")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for v in self.values:
            self.params_for(v, quiet=True)

    def params_for(self, value: int, *, quiet: bool = False) -> RunParams:
        changes = {self.varying: value}
        d = value if self.varying == "d" else self.base.d
        m = value if self.varying == "m" else self.base.m
        if m is not None and m > d:
            if not quiet:
                warnings.warn(f"m={m} exceeds d={d}; capping m at d", stacklevel=2)
            changes["m"] = d
        return replace(self.base, seed=self.seed, **changes)


@dataclass
class Aggregate:
    varying: str
    value: int
    trials: int
    baseline_total_ms: float
    baseline_total_sd: float
    fast_total_ms: float
    fast_total_sd: float
    fast_init_ms: float
    fast_post_init_ms: float
    fast_post_init_sd: float
    fast_per_round_ms: float
    speedup: float


SUMMARY_FIELDS = tuple(f.name for f in fields(Aggregate))


def _sd(xs: Sequence[float]) -> float:
    return statistics.stdev(xs) if len(xs) > 1 else 0.0


def aggregate(varying: str, value: int, reports: Sequence[RunReport]) -> Aggregate:
    col = lambda name: [getattr(r, name) for r in reports]  # noqa: E731
    return Aggregate(
        varying=varying, value=value, trials=len(reports),
        baseline_total_ms=statistics.fmean(col("baseline_total_ms")),
        baseline_total_sd=_sd(col("baseline_total_ms")),
        fast_total_ms=statistics.fmean(col("fast_total_ms")),
        fast_total_sd=_sd(col("fast_total_ms")),
        fast_init_ms=statistics.fmean(col("fast_init_ms")),
        fast_post_init_ms=statistics.fmean(col("fast_post_init_ms")),
        fast_post_init_sd=_sd(col("fast_post_init_ms")),
        fast_per_round_ms=statistics.fmean(col("fast_per_round_ms")),
        speedup=statistics.fmean(col("speedup")),
    )


@dataclass
class SweepResult:
    spec: SweepSpec
    reports: list[RunReport]
    aggregates: list[Aggregate]
    paths: dict[str, Path] = field(default_factory=dict)


def _sibling(path: Path, tag: str) -> Path:
    return path.with_name(f"{path.stem}.{tag}{path.suffix or '.csv'}")


def run_sweep(
    spec: SweepSpec,
    out: str | PathLike | None = None,
    *,
    progress: Callable[[str], None] | None = None,
) -> SweepResult:
    """Run every (value, trial) of ``spec`` sequentially.

    A warm-up run at the first value precedes the timed runs and is dropped.
    With ``out`` set, writes the per-trial CSV there plus ``<stem>.summary.csv``
    (mean/stddev per value) and ``<stem>.plot.csv`` (x against mean times).
    """
    if out is not None:
        out = Path(out)
        if not out.parent.exists():
            raise FileNotFoundError(f"output directory {out.parent} does not exist")
    run_single(spec.params_for(spec.values[0], quiet=True), trial=-1)
    reports: list[RunReport] = []
    aggregates: list[Aggregate] = []
    for value in spec.values:
        params = spec.params_for(value)
        batch = []
        for t in range(spec.trials):
            rep = run_single(params, trial=t)
            batch.append(rep)
            if progress:
                progress(f"{spec.varying}={value} trial={t} baseline={rep.baseline_total_ms:.1f}ms "
                         f"fast={rep.fast_total_ms:.1f}ms")
        reports.extend(batch)
        aggregates.append(aggregate(spec.varying, value, batch))
    result = SweepResult(spec, reports, aggregates)
    if out is not None:
        write_reports(reports, out)
        summary, plot = _sibling(out, "summary"), _sibling(out, "plot")
        write_summary(aggregates, summary)
        with open(plot, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([spec.varying, "baseline_ms", "fast_ms", "fast_post_init_ms"])
            for a in aggregates:
                w.writerow([a.value, f"{a.baseline_total_ms:.3f}", f"{a.fast_total_ms:.3f}",
                            f"{a.fast_post_init_ms:.3f}"])
        result.paths = {"trials": out, "summary": summary, "plot": plot}
    return result


def write_summary(aggregates: Sequence[Aggregate], path: str | PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
        w.writeheader()
        for a in aggregates:
            w.writerow({k: (f"{v:.3f}" if isinstance(v, float) else v)
                        for k, v in vars(a).items()})


def load_summary(path: str | PathLike) -> list[Aggregate]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != SUMMARY_FIELDS:
            raise ValueError(f"{path}: not a sweep summary file")
        out = []
        for row in reader:
            vals = {k: (row[k] if k == "varying" else
                        int(row[k]) if k in ("value", "trials") else float(row[k]))
                    for k in SUMMARY_FIELDS}
            out.append(Aggregate(**vals))
    return out


# -- scaling -----------------------------------------------------------------

# (swept parameter, metric, slope band); band None = recorded, not judged
CLAIMS: tuple[tuple[str, str, tuple[float, float] | None], ...] = (
    ("n", "baseline_total_ms", (0.8, 1.3)),
    ("n", "fast_total_ms", (0.8, 1.3)),
    ("d", "fast_post_init_ms", (-0.2, 0.3)),
    ("d", "baseline_total_ms", None),
    ("m", "fast_total_ms", (0.7, 1.3)),
    ("m", "baseline_total_ms", None),
    ("k", "baseline_total_ms", (1.6, 2.6)),
    ("k", "fast_total_ms", (1.6, 2.6)),
)
PER_ROUND_D_RATIO_MAX = 1.3


@dataclass
class Verdict:
    varying: str
    metric: str
    kind: str  # "slope" or "ratio"
    value: float
    low: float | None
    high: float | None

    @property
    def passed(self) -> bool | None:
        if self.low is None and self.high is None:
            return None
        lo = -math.inf if self.low is None else self.low
        hi = math.inf if self.high is None else self.high
        return lo <= self.value <= hi


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of log(y) against log(x)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two points to fit a slope")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def scaling_check(sweeps: Mapping[str, Sequence[Aggregate]]) -> list[Verdict]:
    """Judge the log-log slope claims for every sweep present in ``sweeps``."""
    verdicts = []
    for varying, aggs in sweeps.items():
        if varying not in SWEEPABLE:
            raise ValueError(f"unknown swept parameter {varying!r}")
        aggs = sorted(aggs, key=lambda a: a.value)
        xs = [a.value for a in aggs]
        if len(xs) < 2 or xs[-1] < 2 * xs[0]:
            raise ValueError(f"sweep over {varying} must have >= 2 points spanning a 2x range")
        for var, metric, band in CLAIMS:
            if var != varying:
                continue
            slope = loglog_slope(xs, [getattr(a, metric) for a in aggs])
            lo, hi = band if band else (None, None)
            verdicts.append(Verdict(varying, metric, "slope", slope, lo, hi))
        if varying == "d":
            ratio = aggs[-1].fast_per_round_ms / aggs[0].fast_per_round_ms
            verdicts.append(Verdict("d", "fast_per_round_ms", "ratio", ratio, None,
                                    PER_ROUND_D_RATIO_MAX))
    return verdicts


def format_verdicts(verdicts: Sequence[Verdict]) -> str:
    lines = [f"{'param':<6}{'metric':<22}{'kind':<7}{'value':>9}  {'band':<16}verdict"]
    for v in verdicts:
        band = "-" if v.passed is None else (
            f"[{'-inf' if v.low is None else f'{v.low:g}'}, "
            f"{'inf' if v.high is None else f'{v.high:g}'}]")
        verdict = {True: "PASS", False: "FAIL", None: "info"}[v.passed]
        lines.append(f"{v.varying:<6}{v.metric:<22}{v.kind:<7}{v.value:>9.3f}  {band:<16}{verdict}")
    return "\n".join(lines)


# -- quality -----------------------------------------------------------------

def best_point_cost(points: PointSet) -> float:
    """Cost of the best single data point as the only center: the one nearest the mean."""
    mu = mean(points, range(points.n))
    diff = points.coords - mu
    j = int(np.argmin(np.einsum("ij,ij->i", diff, diff)))
    return exact_cost(points, [j])


def mixture_instance(
    n: int = 500, d: int = 50, k: int = 5, separation: float = 10.0, sigma: float = 1.0, seed: int = 0
) -> tuple[PointSet, float]:
    """Gaussian-mixture points and their optimum stand-in.

    The stand-in is the cost of the generating means; for ``k = 1`` it is the
    cost of the best single data point instead.
    """
    mix = generate_mixture(GenSpec(n, d, seed, GAUSSIAN_MIXTURE, k, separation, sigma))
    if k == 1:
        return mix.points, best_point_cost(mix.points)
    return mix.points, mix.center_cost()


@dataclass
class QualityReport:
    ratios: list[float]
    opt_proxy: float
    bound: float = RATIO_BOUND
    warn_threshold: float = MEAN_RATIO_WARN

    @property
    def mean_ratio(self) -> float:
        return statistics.fmean(self.ratios)

    @property
    def max_ratio(self) -> float:
        return max(self.ratios)

    @property
    def passed(self) -> bool:
        return self.max_ratio <= self.bound

    @property
    def warning(self) -> bool:
        return self.mean_ratio > self.warn_threshold


def _ratio(cost: float, opt: float) -> float:
    if cost == 0.0:
        return 0.0
    return math.inf if opt == 0.0 else cost / opt


def _quality_trial(args) -> float:
    points, cfg = args
    centers, _ = fast_seeding(points, cfg)
    return exact_cost(points, centers)


def quality_check(
    points: PointSet,
    k: int,
    opt_proxy: float,
    trials: int = 20,
    *,
    sketch: SketchSpec | None = None,
    z: int | None = None,
    z_const: float = 100.0,
    seed: int = 0,
    workers: int = 1,
) -> QualityReport:
    """Run ``trials`` seeded fast seedings and compare each exact cost to ``opt_proxy``."""
    base = sketch or SketchSpec()
    jobs = [
        (points, SeedingConfig(k=k, z=z, z_const=z_const, seed=derive_seed(seed, t, 2),
                               sketch=replace(base, seed=derive_seed(seed, t, 1))))
        for t in range(trials)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            costs = list(pool.map(_quality_trial, jobs))
    else:
        costs = [_quality_trial(j) for j in jobs]
    return QualityReport([_ratio(c, opt_proxy) for c in costs], opt_proxy)

