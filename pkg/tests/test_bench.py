import csv
import math

import pytest

from sketchseed import bench
from sketchseed.dataset import GenSpec, PointSet, exact_cost, generate

SMALL = bench.RunParams(n=40, d=12, m=6, k=3, z=20)


def make_agg(varying, value, **metrics):
    base = dict(baseline_total_ms=1.0, baseline_total_sd=0.0, fast_total_ms=1.0, fast_total_sd=0.0,
                fast_init_ms=0.1, fast_post_init_ms=1.0, fast_post_init_sd=0.0,
                fast_per_round_ms=0.01, speedup=1.0)
    base.update(metrics)
    return bench.Aggregate(varying=varying, value=value, trials=1, **base)


class TestRunParams:
    def test_defaults_are_primary_condition(self):
        p = bench.RunParams()
        assert (p.n, p.d, p.m, p.k) == (150, 150, 75, 15)
        assert p.iterations == 1500

    @pytest.mark.parametrize(
        "kwargs",
        [dict(k=0), dict(n=5, k=6), dict(m=200), dict(sketch="dense"), dict(epsilon=0.0), dict(z=-2)],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            bench.RunParams(**kwargs)


class TestRunSingle:
    def test_report_fields(self):
        r = bench.run_single(SMALL)
        assert (r.n, r.d, r.m, r.k, r.z) == (40, 12, 6, 3, 20)
        assert len({r.data_seed, r.sketch_seed, r.fast_seed, r.baseline_seed}) == 4
        assert r.speedup == pytest.approx(r.baseline_total_ms / r.fast_total_ms)
        assert r.fast_total_ms == pytest.approx(r.fast_init_ms + r.fast_post_init_ms)
        assert len(r.fast_centers) == len(r.baseline_centers) == 3
        points = generate(GenSpec(40, 12, r.data_seed))
        assert r.fast_exact_cost == pytest.approx(exact_cost(points, r.fast_centers))

    def test_k_equals_n(self):
        r = bench.run_single(bench.RunParams(n=10, d=4, m=2, k=10))
        assert r.fast_exact_cost == r.baseline_exact_cost == 0.0

    def test_deterministic(self):
        a, b = bench.run_single(SMALL), bench.run_single(SMALL)
        assert (a.fast_centers, a.baseline_centers) == (b.fast_centers, b.baseline_centers)
        assert a.fast_approx_cost == b.fast_approx_cost

    def test_shared_points(self):
        P = generate(GenSpec(40, 12, seed=5))
        r = bench.run_single(SMALL, points=P)
        assert r.baseline_exact_cost == pytest.approx(exact_cost(P, r.baseline_centers))
        with pytest.raises(ValueError):
            bench.run_single(SMALL, points=generate(GenSpec(41, 12)))


class TestCsv:
    def test_round_trip(self, tmp_path):
        reps = [bench.run_single(SMALL, trial=t) for t in range(2)]
        path = tmp_path / "runs.csv"
        bench.write_reports(reps, path)
        back = bench.read_reports(path)
        assert [r.fast_centers for r in back] == [r.fast_centers for r in reps]
        assert back[1].trial == 1 and back[0].fast_exact_cost == reps[0].fast_exact_cost
        rows = list(csv.DictReader(path.open()))
        assert all(len(row["baseline_total_ms"].split(".")[1]) == 3 for row in rows)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError, match="schema"):
            bench.read_reports(path)

    def test_trajectory(self, tmp_path):
        r = bench.run_single(SMALL)
        path = tmp_path / "traj.csv"
        bench.write_trajectory(r.fast_trajectory, path)
        rows = list(csv.DictReader(path.open()))
        assert len(rows) == 3 + 20
        assert rows[0]["phase"] == "seed-uniform" and rows[-1]["phase"] == "local-search-round"


class TestSweep:
    def test_spec_validation(self):
        with pytest.raises(ValueError):
            bench.SweepSpec("n", (100, 50))
        with pytest.raises(ValueError):
            bench.SweepSpec("z", (1, 2))
        with pytest.raises(ValueError):
            bench.SweepSpec("n", (50, 100), trials=0)

    def test_m_capped_at_d(self):
        spec = bench.SweepSpec("d", (4, 8), bench.RunParams(n=20, d=8, m=6, k=2))
        with pytest.warns(UserWarning, match="capping"):
            assert spec.params_for(4).m == 4

    def test_outputs(self, tmp_path):
        spec = bench.SweepSpec("n", (20, 40), bench.RunParams(n=20, d=6, m=3, k=2, z=5), trials=2)
        res = bench.run_sweep(spec, tmp_path / "sweep.csv")
        assert len(res.reports) == 4 and all(r.trial >= 0 for r in res.reports)
        assert [a.value for a in res.aggregates] == [20, 40]
        assert len(bench.read_reports(res.paths["trials"])) == 4
        loaded = bench.load_summary(res.paths["summary"])
        assert [a.trials for a in loaded] == [2, 2]
        plot = list(csv.reader(res.paths["plot"].open()))
        assert plot[0] == ["n", "baseline_ms", "fast_ms", "fast_post_init_ms"] and len(plot) == 3

    def test_missing_directory(self, tmp_path):
        spec = bench.SweepSpec("n", (20, 40), bench.RunParams(n=20, d=6, m=3, k=2, z=5), trials=1)
        with pytest.raises(FileNotFoundError):
            bench.run_sweep(spec, tmp_path / "nope" / "s.csv")


class TestScaling:
    def test_slopes_of_constructed_data(self):
        xs = [100, 200, 400, 800]
        assert bench.loglog_slope(xs, [3.0 * x for x in xs]) == pytest.approx(1.0)
        assert bench.loglog_slope(xs, [0.5 * x * x for x in xs]) == pytest.approx(2.0)
        with pytest.raises(ValueError):
            bench.loglog_slope([1], [1])

    def test_verdicts(self):
        sweeps = {
            "n": [make_agg("n", x, baseline_total_ms=x, fast_total_ms=2 * x) for x in (250, 500, 1000)],
            "k": [make_agg("k", x, baseline_total_ms=x**2, fast_total_ms=x**3) for x in (5, 10, 20)],
            "d": [make_agg("d", x, baseline_total_ms=x, fast_post_init_ms=5.0, fast_per_round_ms=0.1)
                  for x in (100, 800)],
        }
        verdicts = {(v.varying, v.metric, v.kind): v for v in bench.scaling_check(sweeps)}
        assert verdicts[("n", "fast_total_ms", "slope")].passed
        assert verdicts[("k", "baseline_total_ms", "slope")].passed
        assert verdicts[("k", "fast_total_ms", "slope")].passed is False
        assert verdicts[("d", "baseline_total_ms", "slope")].passed is None
        assert verdicts[("d", "fast_per_round_ms", "ratio")].value == pytest.approx(1.0)
        table = bench.format_verdicts(list(verdicts.values()))
        assert "FAIL" in table and "PASS" in table and "info" in table

    def test_needs_range(self):
        with pytest.raises(ValueError, match="2x"):
            bench.scaling_check({"n": [make_agg("n", 100), make_agg("n", 150)]})
        with pytest.raises(ValueError):
            bench.scaling_check({"n": [make_agg("n", 100)]})


class TestQuality:
    def test_mixture_instance(self):
        points, opt = bench.mixture_instance(n=100, d=10, k=3, seed=1)
        assert points.n == 100 and opt > 0

    def test_ratios(self):
        points, opt = bench.mixture_instance(n=120, d=8, k=3, seed=2)
        rep = bench.quality_check(points, 3, opt, trials=4, z=30)
        assert len(rep.ratios) == 4 and rep.passed
        assert rep.max_ratio >= rep.mean_ratio > 0

    def test_k_equals_n_ratio_is_zero(self):
        points = generate(GenSpec(6, 3))
        rep = bench.quality_check(points, 6, 1.0, trials=2, z=3)
        assert rep.ratios == [0.0, 0.0] and rep.passed

    def test_single_cluster(self):
        points, opt = bench.mixture_instance(n=60, d=5, k=1, seed=3)
        assert opt == bench.best_point_cost(points)
        rep = bench.quality_check(points, 1, opt, trials=5)
        assert all(1.0 <= r < math.inf for r in rep.ratios)

    def test_parallel_matches_serial(self):
        points, opt = bench.mixture_instance(n=80, d=6, k=2, seed=4)
        a = bench.quality_check(points, 2, opt, trials=3, z=10)
        b = bench.quality_check(points, 2, opt, trials=3, z=10, workers=2)
        assert a.ratios == b.ratios

    def test_warning_flag(self):
        rep = bench.QualityReport([1.0, 3.5], 1.0)
        assert rep.passed and rep.warning
        assert not bench.QualityReport([600.0], 1.0).passed


def test_point_set_passthrough():
    # a PointSet can be supplied even when its data seed differs from the report seed
    P = PointSet(generate(GenSpec(40, 12, seed=9)).coords)
    assert bench.run_single(SMALL, points=P).n == 40
