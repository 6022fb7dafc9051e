"""Analytic gradient of the data log-likelihood for curve-Gaussian models.

For the chain-of-Gaussians density f, the gradient of sum_x ln f(x) with
respect to every Fourier coefficient and sigma is available in closed form:
each subinterval's mean is linear and its covariance bilinear in the
coefficients, with the same basis-integral tables providing the derivative
weights.  Per point, the segment contributions are combined with the
mixture responsibilities (the reciprocal-density factor of the closed
form), computed with the usual max-shifted softmax.

A coefficient perturbation a[i, j] moves segment mean mu_l along
coordinate i and adds a symmetric rank-two update e_i v^T + v e_i^T to
Sigma_l; the trace, quadratic-form, and mean terms of d(ln N) collapse to
vector operations in v, which is what the inner loop below evaluates.

``fd_gradient`` recomputes the whole gradient by central differences,
rebuilding the segment cache per perturbation; it shares no code path with
the closed form beyond density evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

from .density import CurveGaussianModel, log_density, segment_log_pdfs
from .fourier import integral_tables


@dataclass(frozen=True)
class ParamGradient:
    """Gradient w.r.t. the coefficient array (same shape) and sigma."""

    d_coeffs: np.ndarray
    d_sigma: float

    def __post_init__(self):
        if not (np.all(np.isfinite(self.d_coeffs)) and np.isfinite(self.d_sigma)):
            raise ValueError("gradient contains non-finite entries")

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.d_coeffs.ravel(), [self.d_sigma]])


def grad_loglik(model: CurveGaussianModel, points) -> ParamGradient:
    """Gradient of sum_x ln f(x) over the model's coefficients and sigma."""
    X = np.atleast_2d(np.asarray(getattr(points, "points", points), dtype=float))
    if X.shape[0] == 0:
        raise ValueError("points must be nonempty")
    curve = model.curve
    K_pow = float(model.segments_K) ** curve.intrinsic_dim
    single, pair = integral_tables(curve.order, curve.intrinsic_dim, model.segments_K)
    A = curve.coeffs

    log_pdfs = segment_log_pdfs(model, X)
    shift = log_pdfs.max(axis=1, keepdims=True)
    resp = np.exp(log_pdfs - shift)
    resp /= resp.sum(axis=1, keepdims=True)

    d_coeffs = np.zeros_like(A)
    d_sigma = 0.0
    for idx, seg in enumerate(model.segments):
        prec = cho_solve((seg.chol, True), np.eye(model.ambient_dim))
        Y = (X - seg.mean) @ prec
        r = resp[:, idx]
        r_total = float(r.sum())

        V = K_pow * (A @ pair[idx] - np.outer(seg.mean, single[idx]))
        d_coeffs += (
            -r_total * (prec @ V)
            + K_pow * np.outer(Y.T @ r, single[idx])
            + Y.T @ (r[:, None] * (Y @ V))
        )
        d_sigma += model.sigma * (
            float(r @ np.sum(Y**2, axis=1)) - r_total * float(np.trace(prec))
        )
    return ParamGradient(d_coeffs=d_coeffs, d_sigma=d_sigma)


def fd_gradient(model: CurveGaussianModel, points, h: float = 1e-5) -> ParamGradient:
    """Central-difference gradient of sum_x ln f(x), one parameter at a time."""
    if not 1e-8 <= h <= 1e-3:
        raise ValueError("h must lie in [1e-8, 1e-3]")
    X = np.atleast_2d(np.asarray(getattr(points, "points", points), dtype=float))

    def total(coeffs: np.ndarray, sigma: float) -> float:
        probe = model.with_params(coeffs, sigma)
        return float(np.sum(log_density(probe, X)))

    base = model.curve.coeffs
    d_coeffs = np.zeros_like(base)
    for i in range(base.shape[0]):
        for j in range(base.shape[1]):
            plus = base.copy()
            minus = base.copy()
            plus[i, j] += h
            minus[i, j] -= h
            d_coeffs[i, j] = (total(plus, model.sigma) - total(minus, model.sigma)) / (2 * h)
    d_sigma = (total(base, model.sigma + h) - total(base, model.sigma - h)) / (2 * h)
    return ParamGradient(d_coeffs=d_coeffs, d_sigma=d_sigma)
