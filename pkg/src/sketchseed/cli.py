"""Command-line entry point: ``sketchseed {gen,run,sweep,check-scaling,check-quality}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench
from .dataset import GAUSSIAN_MIXTURE, UNIT_SPHERE, GenSpec, generate, load_points, save_points
from .sketch import KINDS, SketchSpec


def _values(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--n", type=int, default=150)
    p.add_argument("--d", type=int, default=150)
    p.add_argument("--m", type=int, default=75, help="sketch dimension; 0 derives it from epsilon/delta")
    p.add_argument("--k", type=int, default=15)
    p.add_argument("--z", type=int, default=None, help="local-search rounds (default: auto)")
    p.add_argument("--z-const", type=float, default=100.0)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--sketch", choices=KINDS, default="gaussian")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact-eval", action="store_true", help="exact cost after every round (slows timing)")


def _params(args) -> bench.RunParams:
    return bench.RunParams(
        n=args.n, d=args.d, m=args.m or None, k=args.k, z=args.z, z_const=args.z_const,
        epsilon=args.epsilon, delta=args.delta, sketch=args.sketch, seed=args.seed,
        exact_eval=args.exact_eval,
    )


def cmd_gen(args) -> int:
    dist = GAUSSIAN_MIXTURE if args.distribution == "mixture" else UNIT_SPHERE
    spec = GenSpec(args.n, args.d, args.seed, dist, args.clusters, args.separation, args.sigma)
    points = generate(spec)
    if args.out:
        save_points(points, args.out)
    else:
        sys.stdout.write(f"{points.n} {points.d}\n")
        for row in points.coords:
            sys.stdout.write(",".join(repr(float(x)) for x in row) + "\n")
    return 0


def cmd_run(args) -> int:
    points = None
    if args.data:
        points = load_points(args.data)
        args.n, args.d = points.n, points.d
    report = bench.run_single(_params(args), points=points)
    bench.write_reports([report], args.out or sys.stdout)
    if args.trajectory_out:
        bench.write_trajectory(report.fast_trajectory, args.trajectory_out)
    print(
        f"baseline {report.baseline_total_ms:.1f} ms, fast {report.fast_total_ms:.1f} ms "
        f"(init {report.fast_init_ms:.1f} ms), speedup {report.speedup:.2f}x",
        file=sys.stderr,
    )
    return 0


def cmd_sweep(args) -> int:
    spec = bench.SweepSpec(args.vary, tuple(args.values), _params(args), args.trials, args.seed)
    result = bench.run_sweep(spec, args.out, progress=lambda s: print(s, file=sys.stderr))
    for name, path in result.paths.items():
        print(f"{name}: {path}", file=sys.stderr)
    return 0


def cmd_check_scaling(args) -> int:
    sweeps = {}
    for path in args.summaries:
        aggs = bench.load_summary(path)
        if not aggs:
            raise SystemExit(f"{path}: empty summary")
        sweeps[aggs[0].varying] = aggs
    verdicts = bench.scaling_check(sweeps)
    print(bench.format_verdicts(verdicts))
    return 0 if all(v.passed is not False for v in verdicts) else 1


def cmd_check_quality(args) -> int:
    points, opt = bench.mixture_instance(args.n, args.d, args.k, args.separation, args.sigma, args.seed)
    spec = SketchSpec(args.epsilon, args.delta, kind=args.sketch, m=args.m or None)
    rep = bench.quality_check(points, args.k, opt, args.trials, sketch=spec, z=args.z,
                              z_const=args.z_const, seed=args.seed, workers=args.workers)
    print(f"opt proxy {opt:.6g}; mean ratio {rep.mean_ratio:.4f}; max ratio {rep.max_ratio:.4f}")
    if rep.warning:
        print(f"warning: mean ratio above {rep.warn_threshold:g}")
    print("PASS" if rep.passed else f"FAIL: max ratio exceeds {rep.bound:g}")
    return 0 if rep.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sketchseed", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a synthetic dataset")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--distribution", choices=("unit-sphere", "mixture"), default="unit-sphere")
    g.add_argument("--clusters", type=int, default=5)
    g.add_argument("--separation", type=float, default=10.0)
    g.add_argument("--sigma", type=float, default=1.0)
    g.add_argument("--out", type=Path)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="time baseline vs sketched seeding once")
    _add_run_flags(r)
    r.add_argument("--data", type=Path, help="dataset file instead of generated points")
    r.add_argument("--out", type=Path)
    r.add_argument("--trajectory-out", type=Path)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="parameter sweep with CSV output")
    _add_run_flags(s)
    s.add_argument("--vary", choices=bench.SWEEPABLE, required=True)
    s.add_argument("--values", type=_values, required=True)
    s.add_argument("--trials", type=int, default=3)
    s.add_argument("--out", type=Path, required=True)
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("check-scaling", help="judge slopes from sweep summary files")
    c.add_argument("summaries", nargs="+", type=Path)
    c.set_defaults(func=cmd_check_scaling)

    q = sub.add_parser("check-quality", help="cost ratio on a Gaussian mixture")
    q.add_argument("--n", type=int, default=500)
    q.add_argument("--d", type=int, default=50)
    q.add_argument("--k", type=int, default=5)
    q.add_argument("--m", type=int, default=0)
    q.add_argument("--z", type=int, default=None)
    q.add_argument("--z-const", type=float, default=100.0)
    q.add_argument("--epsilon", type=float, default=0.1)
    q.add_argument("--delta", type=float, default=0.05)
    q.add_argument("--sketch", choices=KINDS, default="gaussian")
    q.add_argument("--separation", type=float, default=10.0)
    q.add_argument("--sigma", type=float, default=1.0)
    q.add_argument("--trials", type=int, default=20)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--workers", type=int, default=1, help="parallel trials (quality only)")
    q.set_defaults(func=cmd_check_quality)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
