from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hmdkit import (DenseMatrix, HmdMatrix, InfeasibleError, ParameterError, ShapeError,
                    dense_matvec, frobenius_norm, hmd_fit_from_dense, hmd_mac_count,
                    hmd_matvec, hmd_param_count, hmd_rank_for_compression, hmd_reconstruct,
                    hmd_storage_ratio, numerical_rank)
from oracles import counted_hmd_matvec, jacobi_rank, tail_energy


@pytest.fixture
def small():
    return HmdMatrix(a_prime=[[1, 0, 0, 0], [0, 1, 0, 0]], b=[1, 1], c=[1, 1], d=[2, 2], e=[1, 0])


@st.composite
def hmd_instances(draw, max_dim=24):
    m = draw(st.integers(1, max_dim))
    n = draw(st.integers(2, max_dim))
    r = draw(st.integers(0, m - 1))
    seed = draw(st.integers(0, 2**31))
    return HmdMatrix.random(m, n, r, np.random.default_rng(seed)), seed


def oracle_tol(h, x):
    dense = hmd_reconstruct(h).data
    return 1e-12 * h.n * max(np.abs(dense).max() * np.abs(x).max(), 1e-300)


class TestConstruction:
    def test_shapes(self, small):
        assert (small.m, small.n, small.r) == (4, 4, 2)

    def test_odd_split(self):
        h = HmdMatrix.random(5, 7, 2, np.random.default_rng(0))
        assert h.c.size == 4 and h.e.size == 3

    def test_r_zero_allowed(self):
        h = HmdMatrix.random(3, 4, 0, np.random.default_rng(0))
        assert h.r == 0 and h.a_prime.shape == (0, 4)

    def test_r_equal_m_rejected(self):
        with pytest.raises(ParameterError):
            HmdMatrix.random(3, 4, 3, np.random.default_rng(0))
        with pytest.raises(ShapeError):
            HmdMatrix(np.ones((2, 4)), [], [1, 1], [], [1, 1])

    @pytest.mark.parametrize("c_len,e_len", [(1, 2), (3, 1), (1, 0)])
    def test_bad_split_rejected(self, c_len, e_len):
        n = c_len + e_len
        with pytest.raises(ShapeError):
            HmdMatrix(np.ones((1, n)), [1.0], np.ones(c_len), [1.0], np.ones(e_len))

    def test_mismatched_b_d(self):
        with pytest.raises(ShapeError):
            HmdMatrix(np.ones((1, 4)), [1.0, 2.0], [1, 1], [1.0], [1, 1])

    def test_non_finite(self):
        with pytest.raises(ParameterError):
            HmdMatrix(np.ones((1, 4)), [np.nan], [1, 1], [1.0], [1, 1])


class TestReconstruct:
    def test_hand_example(self, small):
        expected = [[1, 0, 0, 0], [0, 1, 0, 0], [1, 1, 2, 0], [1, 1, 2, 0]]
        np.testing.assert_array_equal(hmd_reconstruct(small).data, expected)

    def test_zero_bottom(self):
        h = HmdMatrix(np.ones((2, 5)), np.zeros(3), np.ones(3), np.zeros(3), np.ones(2))
        assert not hmd_reconstruct(h).data[2:].any()

    @pytest.mark.parametrize("seed", range(5))
    def test_bottom_blocks_rank_one(self, seed):
        h = HmdMatrix.random(12, 9, 5, np.random.default_rng(seed))
        lower = hmd_reconstruct(h).data[5:]
        assert jacobi_rank(lower[:, :5]) <= 1 and jacobi_rank(lower[:, 5:]) <= 1
        assert numerical_rank(DenseMatrix(lower[:, :5])) <= 1


class TestMatvec:
    def test_hand_example(self, small):
        np.testing.assert_array_equal(hmd_matvec(small, [1, 2, 3, 4]), [1, 2, 9, 9])

    def test_zero_input(self, small):
        np.testing.assert_array_equal(hmd_matvec(small, np.zeros(4)), np.zeros(4))

    def test_shape_error(self, small):
        with pytest.raises(ShapeError):
            hmd_matvec(small, [1, 2, 3])

    @settings(max_examples=200, deadline=None)
    @given(hmd_instances())
    def test_matches_dense_oracle(self, inst):
        h, seed = inst
        x = np.random.default_rng(seed + 1).uniform(-1, 1, h.n)
        ref = dense_matvec(hmd_reconstruct(h), x)
        assert np.abs(hmd_matvec(h, x) - ref).max() < oracle_tol(h, x)

    @settings(max_examples=50, deadline=None)
    @given(hmd_instances(), st.floats(-2, 2), st.floats(-2, 2))
    def test_linear(self, inst, alpha, beta):
        h, seed = inst
        rng = np.random.default_rng(seed + 2)
        x, y = rng.uniform(-1, 1, h.n), rng.uniform(-1, 1, h.n)
        lhs = hmd_matvec(h, alpha * x + beta * y)
        rhs = alpha * hmd_matvec(h, x) + beta * hmd_matvec(h, y)
        scale = np.abs(hmd_reconstruct(h).data).max() * h.n * (abs(alpha) + abs(beta))
        assert np.abs(lhs - rhs).max() <= 1e-12 * max(scale, 1e-300)


class TestCounts:
    def test_param_count_256(self):
        h = HmdMatrix.random(256, 256, 128, np.random.default_rng(0))
        assert hmd_param_count(h) == 33_280

    def test_param_count_r0(self):
        assert hmd_param_count(HmdMatrix.random(4, 4, 0, np.random.default_rng(0))) == 12

    def test_mac_count_256(self):
        h = HmdMatrix.random(256, 256, 128, np.random.default_rng(0))
        assert hmd_mac_count(h) == 33_408
        assert abs(65_536 / hmd_mac_count(h) - 1.9617) < 1e-4

    def test_mac_count_tiny(self):
        assert hmd_mac_count(HmdMatrix.random(2, 2, 0, np.random.default_rng(0))) == 8

    @settings(max_examples=100, deadline=None)
    @given(hmd_instances(max_dim=40))
    def test_counts_match_storage_and_instrumented_kernel(self, inst):
        h, seed = inst
        stored = h.a_prime.size + h.b.size + h.c.size + h.d.size + h.e.size
        assert hmd_param_count(h) == stored
        x = np.random.default_rng(seed).uniform(-1, 1, h.n)
        out, ops = counted_hmd_matvec(h, x)
        assert hmd_mac_count(h) == ops
        np.testing.assert_allclose(out, hmd_matvec(h, x), rtol=0, atol=oracle_tol(h, x))


class TestStorageRatio:
    def test_values(self):
        assert hmd_storage_ratio(256, 256, 128) == pytest.approx(65536 / 33280)
        assert round(hmd_storage_ratio(256, 256, 128), 4) == 1.9692
        assert round(hmd_storage_ratio(256, 256, 125), 4) == 2.0154

    @pytest.mark.parametrize("args", [(4, 4, 4), (4, 4, -1), (4, 1, 0)])
    def test_invalid(self, args):
        with pytest.raises(ParameterError):
            hmd_storage_ratio(*args)

    @pytest.mark.parametrize("m,n", [(8, 8), (20, 7), (3, 50)])
    def test_strictly_decreasing_in_r(self, m, n):
        ratios = [hmd_storage_ratio(m, n, r) for r in range(m)]
        assert all(b < a for a, b in zip(ratios, ratios[1:]))


class TestPlanner:
    def test_two_x(self):
        assert hmd_rank_for_compression(256, 256, 2.0) == 125

    def test_near_unity(self):
        # r=255 would need 65 538 params, more than the dense 65 536
        assert hmd_rank_for_compression(256, 256, 1.0001) == 254

    def test_infeasible(self):
        with pytest.raises(InfeasibleError):
            hmd_rank_for_compression(4, 4, 100.0)

    def test_target_must_exceed_one(self):
        with pytest.raises(ParameterError):
            hmd_rank_for_compression(8, 8, 1.0)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 300), st.integers(2, 300), st.floats(1.01, 8.0))
    def test_largest_feasible_r(self, m, n, target):
        def fits(r):
            return m * n >= Fraction(target) * (r * n + 2 * (m - r) + n)

        try:
            r = hmd_rank_for_compression(m, n, target)
        except InfeasibleError:
            assert not fits(0)
            return
        assert fits(r)
        assert r == m - 1 or not fits(r + 1)


class TestFit:
    def test_idempotent_on_structured_input(self):
        h = HmdMatrix.random(10, 9, 4, np.random.default_rng(11))
        a = hmd_reconstruct(h)
        back = hmd_reconstruct(hmd_fit_from_dense(a, 4))
        assert frobenius_norm(DenseMatrix(a.data - back.data)) < 1e-9 * frobenius_norm(a)

    def test_top_rows_verbatim(self):
        a = DenseMatrix(np.random.default_rng(12).standard_normal((9, 6)))
        fit = hmd_fit_from_dense(a, 5)
        assert fit.a_prime.tobytes() == a.data[:5].tobytes()

    def test_single_row_bound(self):
        a = DenseMatrix(np.random.default_rng(13).standard_normal((7, 8)))
        err = np.linalg.norm(a.data - hmd_reconstruct(hmd_fit_from_dense(a, 6)).data)
        assert err <= np.linalg.norm(a.data[6]) + 1e-12

    @pytest.mark.parametrize("seed", range(4))
    def test_residual_matches_block_tails(self, seed):
        a = np.random.default_rng(seed).standard_normal((16, 16))
        fit = hmd_fit_from_dense(DenseMatrix(a), 8)
        got = np.sum((a - hmd_reconstruct(fit).data) ** 2)
        expected = tail_energy(a[8:, :8], 1) + tail_energy(a[8:, 8:], 1)
        assert abs(got - expected) / expected < 1e-7

    def test_canonical_factors(self):
        a = DenseMatrix(np.random.default_rng(14).standard_normal((12, 11)))
        fit = hmd_fit_from_dense(a, 3)
        for vec in (fit.c, fit.e):
            assert abs(np.linalg.norm(vec) - 1.0) < 1e-14
            assert vec[np.flatnonzero(vec)[0]] > 0

    def test_zero_block(self):
        a = np.random.default_rng(15).standard_normal((6, 6))
        a[3:, 3:] = 0.0
        fit = hmd_fit_from_dense(DenseMatrix(a), 3)
        assert not fit.d.any() and not fit.e.any()

    @pytest.mark.parametrize("r", [-1, 6])
    def test_bad_r(self, r):
        with pytest.raises(ParameterError):
            hmd_fit_from_dense(DenseMatrix(np.ones((6, 6))), r)

    def test_rank_bound_after_fit(self):
        a = DenseMatrix(np.random.default_rng(16).standard_normal((20, 20)))
        assert numerical_rank(hmd_reconstruct(hmd_fit_from_dense(a, 7)), 1e-10) <= 9

    @settings(max_examples=50, deadline=None)
    @given(hmd_instances())
    def test_rank_bound(self, inst):
        h, _ = inst
        assert numerical_rank(hmd_reconstruct(h), 1e-10) <= h.r + 2
