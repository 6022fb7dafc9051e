"""Analytic likelihood gradient vs central finite differences."""

import numpy as np
import pytest

from curveclust.density import CurveGaussianModel, sample_points
from curveclust.fourier import FourierCurve
from curveclust.gradient import ParamGradient, fd_gradient, grad_loglik

from test_segments import constant_curve, random_curve


def assert_gradients_close(analytic, numeric, rel=1e-5, floor=1e-8):
    """Componentwise relative comparison with an absolute floor near zero."""
    a = analytic.as_vector()
    b = numeric.as_vector()
    for idx, (x, y) in enumerate(zip(a, b)):
        if abs(y) > floor:
            assert abs(x - y) / abs(y) < rel, f"component {idx}: {x} vs {y}"
        else:
            assert abs(x - y) < floor, f"component {idx}: {x} vs {y}"


def random_config(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 4))
    k = int(rng.integers(0, 3))
    K = int(rng.choice([1, 4]))
    curve = random_curve(rng, n=n, k=k)
    sigma = float(rng.uniform(0.1, 0.6))
    model = CurveGaussianModel(curve=curve, sigma=sigma, segments_K=K)
    pts = sample_points(curve, sigma, 50, rng)
    return model, pts


class TestAnalyticGradient:
    def test_zero_at_single_gaussian_stationary_point(self):
        rng = np.random.default_rng(2)
        pts = rng.normal(size=(200, 2))
        m = pts.mean(axis=0)
        model = CurveGaussianModel(curve=constant_curve(m), sigma=1.0, segments_K=1)
        grad = grad_loglik(model, pts)
        center_col = model.curve.order  # rank of the l = 0 multiindex
        np.testing.assert_allclose(grad.d_coeffs[:, center_col], 0.0, atol=1e-9)

    def test_single_gaussian_sigma_gradient_closed_form(self):
        rng = np.random.default_rng(3)
        pts = rng.normal(size=(40, 2))
        m = np.array([0.25, -0.5])
        sigma = 0.8
        model = CurveGaussianModel(curve=constant_curve(m), sigma=sigma, segments_K=1)
        grad = grad_loglik(model, pts)
        sq = np.sum((pts - m) ** 2)
        expected = -pts.shape[0] * 2 / sigma + sq / sigma**3
        assert grad.d_sigma == pytest.approx(expected, rel=1e-12)

    def test_single_gaussian_mean_gradient_closed_form(self):
        rng = np.random.default_rng(4)
        pts = rng.normal(size=(30, 3))
        m = np.array([0.1, 0.2, -0.3])
        sigma = 0.5
        model = CurveGaussianModel(curve=constant_curve(m), sigma=sigma, segments_K=1)
        grad = grad_loglik(model, pts)
        expected = np.sum(pts - m, axis=0) / sigma**2
        np.testing.assert_allclose(grad.d_coeffs[:, 1], expected, rtol=1e-12)

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_finite_differences(self, seed):
        model, pts = random_config(seed)
        assert_gradients_close(grad_loglik(model, pts), fd_gradient(model, pts, 1e-5))

    def test_torus_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(21)
        curve = FourierCurve(
            coeffs=0.5 * rng.normal(size=(3, 9)), order=1, intrinsic_dim=2
        )
        model = CurveGaussianModel(curve=curve, sigma=0.3, segments_K=2)
        pts = sample_points(curve, 0.3, 40, rng)
        assert_gradients_close(grad_loglik(model, pts), fd_gradient(model, pts, 1e-5))

    def test_sigma_gradient_negative_when_sigma_inflated(self):
        rng = np.random.default_rng(6)
        model0, _ = random_config(6)
        pts = sample_points(model0.curve, 0.02, 100, rng)
        inflated = CurveGaussianModel(
            curve=model0.curve, sigma=0.5, segments_K=model0.segments_K
        )
        assert grad_loglik(inflated, pts).d_sigma < 0.0

    def test_rejects_empty_points(self):
        model, _ = random_config(0)
        with pytest.raises(ValueError):
            grad_loglik(model, np.empty((0, model.ambient_dim)))


class TestFiniteDifferences:
    def test_step_size_robustness(self):
        model, pts = random_config(10)
        a = fd_gradient(model, pts, 1e-5).as_vector()
        b = fd_gradient(model, pts, 1e-6).as_vector()
        mask = np.abs(b) > 1e-6
        assert np.allclose(a[mask], b[mask], rtol=1e-4)

    def test_h_range_validated(self):
        model, pts = random_config(0)
        with pytest.raises(ValueError):
            fd_gradient(model, pts, 1e-2)
        with pytest.raises(ValueError):
            fd_gradient(model, pts, 1e-9)

    def test_gradient_shape_matches_coeffs(self):
        model, pts = random_config(1)
        grad = fd_gradient(model, pts, 1e-5)
        assert grad.d_coeffs.shape == model.curve.coeffs.shape


class TestParamGradient:
    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            ParamGradient(d_coeffs=np.array([[np.inf]]), d_sigma=0.0)

    def test_vector_layout(self):
        grad = ParamGradient(d_coeffs=np.array([[1.0, 2.0], [3.0, 4.0]]), d_sigma=5.0)
        np.testing.assert_array_equal(grad.as_vector(), [1.0, 2.0, 3.0, 4.0, 5.0])
