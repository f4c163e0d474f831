import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sketchseed.dataset import (
    GAUSSIAN_MIXTURE,
    DatasetFormatError,
    GenSpec,
    PointSet,
    cost_mu_identity_check,
    derive_seed,
    exact_cost,
    generate,
    generate_mixture,
    load_points,
    make_rng,
    mean,
    save_points,
)


def random_points(seed, n=16, d=4):
    return PointSet(make_rng(seed).standard_normal((n, d)))


class TestPointSet:
    def test_shape_and_rows(self):
        P = PointSet([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
        assert (P.n, P.d, len(P)) == (3, 2, 3)
        np.testing.assert_array_equal(P.row(1), [3.0, 4.0])
        assert P.coords.flags["C_CONTIGUOUS"]

    def test_immutable_copy(self):
        raw = np.zeros((2, 2))
        P = PointSet(raw)
        raw[0, 0] = 5.0
        assert P.coords[0, 0] == 0.0
        with pytest.raises(ValueError):
            P.coords[0, 0] = 1.0

    @pytest.mark.parametrize("bad", [np.zeros((0, 3)), np.zeros((3, 0)), np.zeros(3)])
    def test_rejects_empty_or_flat(self, bad):
        with pytest.raises(ValueError):
            PointSet(bad)

    @pytest.mark.parametrize("value", [np.nan, np.inf, -np.inf])
    def test_rejects_non_finite(self, value):
        X = np.zeros((4, 2))
        X[2, 1] = value
        with pytest.raises(ValueError, match="row 2"):
            PointSet(X)

    def test_equality(self):
        assert PointSet([[1.0]]) == PointSet([[1.0]])
        assert PointSet([[1.0]]) != PointSet([[2.0]])
        assert PointSet([[1.0, 2.0]]) != PointSet([[1.0], [2.0]])


class TestExactCost:
    def test_hand_example(self, tiny):
        assert exact_cost(tiny, [0]) == 10.0

    def test_all_centers_is_zero(self):
        P = random_points(1)
        assert exact_cost(P, range(P.n)) == 0.0

    def test_matches_double_loop(self):
        P = random_points(2)
        C = [3, 7, 11]
        expect = sum(min(sum((P.coords[i, t] - P.coords[c, t]) ** 2 for t in range(P.d)) for c in C)
                     for i in range(P.n))
        assert exact_cost(P, C) == pytest.approx(expect, rel=1e-12)

    def test_errors(self, tiny):
        with pytest.raises(ValueError, match="no centers"):
            exact_cost(tiny, [])
        with pytest.raises(IndexError):
            exact_cost(tiny, [3])
        with pytest.raises(ValueError):
            exact_cost(tiny, [1, 1])

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), data=st.data())
    def test_permutation_invariant_and_monotone(self, seed, data):
        P = random_points(seed, n=12, d=3)
        C = data.draw(st.lists(st.integers(0, 11), min_size=1, max_size=11, unique=True))
        perm = data.draw(st.permutations(C))
        assert exact_cost(P, perm) == pytest.approx(exact_cost(P, C), rel=1e-12)
        extra = [j for j in range(12) if j not in C]
        if extra:
            assert exact_cost(P, C + extra[:1]) <= exact_cost(P, C)

    def test_zero_iff_every_point_is_a_center(self):
        P = PointSet([[0.0], [0.0], [1.0]])
        assert exact_cost(P, [0, 2]) == 0.0
        assert exact_cost(P, [0]) > 0.0


class TestMean:
    def test_single_and_midpoint(self):
        P = PointSet([[0.0, 0.0], [2.0, 2.0]])
        np.testing.assert_array_equal(mean(P, [1]), [2.0, 2.0])
        np.testing.assert_array_equal(mean(P, [0, 1]), [1.0, 1.0])

    def test_matches_compensated_sum(self):
        P = random_points(3, n=40, d=5)
        subset = list(make_rng(4).choice(40, size=10, replace=False))
        expect = [math.fsum(P.coords[i, t] for i in subset) / 10 for t in range(5)]
        np.testing.assert_allclose(mean(P, subset), expect, rtol=1e-12)

    def test_empty(self, tiny):
        with pytest.raises(ValueError):
            mean(tiny, [])


class TestCostMu:
    def test_at_mean_and_single_point(self):
        P = random_points(5)
        subset = [0, 4, 9]
        assert cost_mu_identity_check(P, subset, mean(P, subset)) <= 1e-12
        assert cost_mu_identity_check(P, [2], np.ones(P.d)) <= 1e-12

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), size=st.integers(1, 16))
    def test_random_residual(self, seed, size):
        rng = make_rng(seed)
        P = random_points(seed)
        subset = rng.choice(P.n, size=size, replace=False)
        c = rng.standard_normal(P.d) * 4
        lhs = float(np.sum((P.coords[subset] - c) ** 2))
        assert cost_mu_identity_check(P, subset, c) <= 1e-9 * max(1.0, lhs)


class TestGenerate:
    def test_deterministic(self):
        spec = GenSpec(5, 3, seed=42)
        assert generate(spec) == generate(spec)
        assert generate(spec) != generate(GenSpec(5, 3, seed=43))

    def test_unit_norm(self):
        P = generate(GenSpec(150, 150))
        np.testing.assert_allclose(np.linalg.norm(P.coords, axis=1), 1.0, atol=1e-12)

    def test_pinned_first_row(self):
        # frozen against PCG64(7): uniform draws in [-1, 1] scaled to unit norm
        raw = np.random.Generator(np.random.PCG64(7)).uniform(-1, 1, size=(2, 3))
        P = generate(GenSpec(2, 3, seed=7))
        np.testing.assert_array_equal(P.coords, raw / np.linalg.norm(raw, axis=1)[:, None])

    @pytest.mark.parametrize("n, d", [(0, 3), (3, 0)])
    def test_rejects_empty(self, n, d):
        with pytest.raises(ValueError):
            GenSpec(n, d)

    def test_rejects_unknown_distribution(self):
        with pytest.raises(ValueError):
            GenSpec(3, 3, distribution="cube")

    def test_mixture_geometry(self):
        spec = GenSpec(500, 50, seed=1, distribution=GAUSSIAN_MIXTURE, clusters=5, separation=10.0)
        mix = generate_mixture(spec)
        gaps = [np.linalg.norm(a - b) for i, a in enumerate(mix.centers) for b in mix.centers[i + 1:]]
        np.testing.assert_allclose(gaps, 10.0, rtol=1e-12)
        assert np.bincount(mix.labels).tolist() == [100] * 5
        # cost to the generating means is about n * d * sigma^2
        assert mix.center_cost() == pytest.approx(500 * 50, rel=0.05)

    def test_derive_seed(self):
        assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
        assert derive_seed(1, 2, 3) != derive_seed(1, 3, 2)
        assert 0 <= derive_seed(0, -1, 0) < 2**64


class TestFileFormat:
    def test_round_trip_is_bitwise(self, tmp_path):
        P = PointSet(make_rng(8).standard_normal((7, 3)) * 1e-7)
        path = tmp_path / "p.txt"
        save_points(P, path)
        assert load_points(path) == P
        text = path.read_bytes()
        assert text.startswith(b"7 3\n") and b"\r" not in text

    def test_transcription(self, tmp_path):
        path = tmp_path / "p.txt"
        path.write_text("3 2\n0,0\n1,0\n0,1\n")
        np.testing.assert_array_equal(load_points(path).coords, [[0, 0], [1, 0], [0, 1]])

    @pytest.mark.parametrize(
        "body, message",
        [
            ("", "line 1"),
            ("3\n1\n2\n3\n", "malformed header"),
            ("two 1\n1\n1\n", "malformed header"),
            ("2 1\n1\n", "2 rows"),
            ("2 2\n1,2\n3\n", "line 3 \\(row 1\\)"),
            ("2 1\n1\nNaN\n", "line 3 \\(row 1\\).*non-finite"),
            ("1 2\n1,x\n", "line 2 \\(row 0\\).*'x'"),
        ],
    )
    def test_parse_errors(self, tmp_path, body, message):
        path = tmp_path / "bad.txt"
        path.write_text(body)
        with pytest.raises(DatasetFormatError, match=message):
            load_points(path)
