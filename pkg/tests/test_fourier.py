"""Tests for the Fourier basis, curve evaluation, and elementary integrals."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from curveclust.fourier import (
    FourierCurve,
    basis_integral,
    basis_pair_integral,
    circle,
    coeff_multiindices,
    integral_tables,
    multiindex_rank,
    segment_multiindices,
)


def _basis_value(l: int, s: float) -> float:
    # independent scalar reference for the per-axis basis convention
    if l < 0:
        return math.cos(-2.0 * math.pi * l * s)
    if l == 0:
        return 1.0
    return math.sin(2.0 * math.pi * l * s)


def rabbit_curve() -> FourierCurve:
    """Order-5 closed curve shaped like a rabbit, coefficients frozen by hand."""
    coeffs = np.zeros((2, 11))

    def put(i, l, value):
        coeffs[i, l + 5] = value

    put(0, -1, 1.0)
    put(0, 1, 0.5)
    put(0, -2, 0.5)
    put(0, 2, 0.25)
    put(0, -4, -0.125)
    put(0, 4, 0.25)
    put(0, -5, 0.125)
    put(0, 5, -0.125)
    put(1, -1, 0.25)
    put(1, 1, 1.0)
    put(1, 2, 0.5)
    put(1, -3, -0.125)
    put(1, 3, 0.25)
    put(1, -5, 0.125)
    put(1, 5, 0.125)
    return FourierCurve(coeffs=coeffs, order=5)


class TestEvaluate:
    def test_rabbit_at_zero(self):
        point = rabbit_curve().evaluate(np.array([0.0]))
        np.testing.assert_allclose(point, [1.5, 0.25], atol=1e-12)

    def test_constant_curve_everywhere(self):
        m = np.array([2.0, -1.0, 0.5])
        coeffs = np.zeros((3, 3))
        coeffs[:, 1] = m
        curve = FourierCurve(coeffs=coeffs, order=1)
        for s in (0.0, 0.3, 0.97):
            np.testing.assert_allclose(curve.evaluate([s]), m, atol=1e-14)

    def test_unit_circle_quarter_turn(self):
        np.testing.assert_allclose(circle().evaluate([0.25]), [0.0, 1.0], atol=1e-12)

    def test_batch_matches_scalar(self):
        curve = rabbit_curve()
        s = np.linspace(0.0, 1.0, 17)[:, None]
        batch = curve.evaluate(s)
        for row, sv in zip(batch, s):
            np.testing.assert_allclose(row, curve.evaluate(sv), atol=1e-14)

    def test_matches_direct_basis_sum(self):
        curve = rabbit_curve()
        rng = np.random.default_rng(0)
        for s in rng.random(5):
            expected = np.zeros(2)
            for l in coeff_multiindices(5, 1):
                for i in range(2):
                    expected[i] += curve.coefficient(i, l) * _basis_value(l[0], s)
            np.testing.assert_allclose(curve.evaluate([s]), expected, atol=1e-12)

    @given(
        s=st.floats(0.0, 1.0),
        axis_shift=st.integers(0, 1),
        seed=st.integers(0, 2**31 - 1),
    )
    @settings(max_examples=50, deadline=None)
    def test_periodicity(self, s, axis_shift, seed):
        rng = np.random.default_rng(seed)
        d = axis_shift + 1
        curve = FourierCurve(coeffs=rng.normal(size=(2, 3**d)), order=1, intrinsic_dim=d)
        base = np.full(d, s)
        shifted = base.copy()
        shifted[axis_shift % d] += 1.0
        assert np.linalg.norm(curve.evaluate(base) - curve.evaluate(shifted)) < 1e-12


class TestValidation:
    def test_coefficient_count_enforced(self):
        with pytest.raises(ValueError):
            FourierCurve(coeffs=np.zeros((2, 4)), order=1)

    def test_non_finite_rejected(self):
        coeffs = np.zeros((2, 3))
        coeffs[0, 0] = np.nan
        with pytest.raises(ValueError):
            FourierCurve(coeffs=coeffs, order=1)

    def test_coeffs_read_only(self):
        curve = circle()
        with pytest.raises(ValueError):
            curve.coeffs[0, 0] = 7.0

    def test_multiindex_order_documented(self):
        assert coeff_multiindices(1, 2) == [
            (-1, -1), (-1, 0), (-1, 1),
            (0, -1), (0, 0), (0, 1),
            (1, -1), (1, 0), (1, 1),
        ]
        assert segment_multiindices(2, 2) == [(0, 0), (0, 1), (1, 0), (1, 1)]
        for rank, l in enumerate(coeff_multiindices(2, 2)):
            assert multiindex_rank(l, 2) == rank


class TestBasisIntegral:
    def test_constant_subinterval(self):
        assert basis_integral((0,), (0,), 4) == pytest.approx(0.25, abs=1e-15)

    def test_cosine_first_quarter(self):
        assert basis_integral((0,), (-1,), 4) == pytest.approx(1.0 / (2 * math.pi), abs=1e-14)

    def test_sine_full_period(self):
        assert basis_integral((0,), (1,), 1) == pytest.approx(0.0, abs=1e-15)

    @given(
        j=st.integers(0, 15),
        l=st.integers(-3, 3),
        K=st.sampled_from([1, 2, 4, 16]),
    )
    @settings(max_examples=80, deadline=None)
    def test_matches_quadrature_1d(self, j, l, K):
        j = j % K
        expected, _ = quad(lambda s: _basis_value(l, s), j / K, (j + 1) / K)
        assert basis_integral((j,), (l,), K) == pytest.approx(expected, abs=1e-10)

    @given(
        j1=st.integers(0, 3),
        j2=st.integers(0, 3),
        l1=st.integers(-2, 2),
        l2=st.integers(-2, 2),
    )
    @settings(max_examples=40, deadline=None)
    def test_matches_quadrature_2d(self, j1, j2, l1, l2):
        K = 4
        e1, _ = quad(lambda s: _basis_value(l1, s), j1 / K, (j1 + 1) / K)
        e2, _ = quad(lambda s: _basis_value(l2, s), j2 / K, (j2 + 1) / K)
        assert basis_integral((j1, j2), (l1, l2), K) == pytest.approx(e1 * e2, abs=1e-10)

    @given(l=st.integers(-3, 3), K=st.sampled_from([1, 3, 4, 8, 16]))
    @settings(max_examples=50, deadline=None)
    def test_interval_additivity(self, l, K):
        total = sum(basis_integral((j,), (l,), K) for j in range(K))
        assert total == pytest.approx(basis_integral((0,), (l,), 1), abs=1e-12)


class TestBasisPairIntegral:
    def test_sin_squared_full_period(self):
        assert basis_pair_integral((0,), (1,), (1,), 1) == pytest.approx(0.5, abs=1e-14)

    def test_sin_cos_full_period(self):
        assert basis_pair_integral((0,), (1,), (-1,), 1) == pytest.approx(0.0, abs=1e-15)

    def test_constant_half_interval(self):
        assert basis_pair_integral((0,), (0,), (0,), 2) == pytest.approx(0.5, abs=1e-15)

    @given(
        j=st.integers(0, 15),
        l1=st.integers(-3, 3),
        l2=st.integers(-3, 3),
        K=st.sampled_from([1, 2, 4, 16]),
    )
    @settings(max_examples=120, deadline=None)
    def test_matches_quadrature(self, j, l1, l2, K):
        j = j % K
        expected, _ = quad(
            lambda s: _basis_value(l1, s) * _basis_value(l2, s), j / K, (j + 1) / K
        )
        assert basis_pair_integral((j,), (l1,), (l2,), K) == pytest.approx(
            expected, abs=1e-10
        )

    @given(
        j=st.integers(0, 7),
        l1=st.integers(-3, 3),
        l2=st.integers(-3, 3),
    )
    @settings(max_examples=60, deadline=None)
    def test_argument_symmetry(self, j, l1, l2):
        K = 8
        a = basis_pair_integral((j,), (l1,), (l2,), K)
        b = basis_pair_integral((j,), (l2,), (l1,), K)
        assert a == pytest.approx(b, abs=1e-12)


class TestIntegralTables:
    @pytest.mark.parametrize("order,dim,K", [(2, 1, 4), (1, 2, 3), (3, 1, 16)])
    def test_tables_match_scalar_functions(self, order, dim, K):
        single, pair = integral_tables(order, dim, K)
        ls = coeff_multiindices(order, dim)
        js = segment_multiindices(K, dim)
        for jr, j in enumerate(js):
            for lr, l in enumerate(ls):
                assert single[jr, lr] == pytest.approx(basis_integral(j, l, K), abs=1e-14)
        # spot-check the pair table on a deterministic subsample
        rng = np.random.default_rng(1)
        for _ in range(30):
            jr = rng.integers(len(js))
            a, b = rng.integers(len(ls), size=2)
            assert pair[jr, a, b] == pytest.approx(
                basis_pair_integral(js[jr], ls[a], ls[b], K), abs=1e-14
            )

    def test_tables_read_only(self):
        single, pair = integral_tables(1, 1, 4)
        with pytest.raises(ValueError):
            single[0, 0] = 1.0
        with pytest.raises(ValueError):
            pair[0, 0, 0] = 1.0
