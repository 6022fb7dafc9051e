"""Gaussian-on-curve densities.

The exact density of "uniform point on the curve plus isotropic Gaussian
noise" is a marginal integral with no elementary closed form.  Three
evaluation routes are provided:

* :func:`log_density` - the production chain-of-Gaussians approximation,
  an equal-weight mixture of the K^d subinterval Gaussians;
* :func:`log_density_exact` - direct Gauss-Legendre quadrature of the
  marginal integral (the reference the approximations are judged against);
* :func:`log_density_pointsum` - the naive equal-weight sum of isotropic
  Gaussians at K sampled curve points, kept for demonstrating the gaps it
  leaves between nodes at small sigma.

Everything is computed in log space (max-shifted sums), so evaluations stay
finite arbitrarily far from the curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

from .fourier import FourierCurve, basis_matrix
from .segments import SegmentGaussian, all_segments

SIGMA_FLOOR = 1e-6
LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class CurveGaussianModel:
    """A Fourier curve with isotropic noise level and a fixed segment count.

    ``segments`` caches the K^d subinterval Gaussians; it is derived from
    (curve, sigma, segments_K) at construction and never mutated.
    """

    curve: FourierCurve
    sigma: float
    segments_K: int = 16
    segments: list[SegmentGaussian] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.segments_K < 1:
            raise ValueError("segments_K must be positive")
        if self.sigma < SIGMA_FLOOR:
            raise ValueError(f"sigma must be >= {SIGMA_FLOOR}")
        object.__setattr__(
            self, "segments", all_segments(self.curve, self.sigma, self.segments_K)
        )

    @property
    def ambient_dim(self) -> int:
        return self.curve.ambient_dim

    @property
    def n_segments(self) -> int:
        return self.segments_K ** self.curve.intrinsic_dim

    @property
    def n_params(self) -> int:
        """Free parameters: every Fourier coefficient plus sigma."""
        return self.curve.n_params + 1

    def with_params(self, coeffs: np.ndarray, sigma: float) -> "CurveGaussianModel":
        return CurveGaussianModel(
            curve=self.curve.with_coeffs(coeffs), sigma=sigma, segments_K=self.segments_K
        )


def segment_log_pdfs(model: CurveGaussianModel, points: np.ndarray) -> np.ndarray:
    """(N, K^d) matrix of per-segment Gaussian log densities."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = model.ambient_dim
    out = np.empty((points.shape[0], model.n_segments))
    for idx, seg in enumerate(model.segments):
        diff = points - seg.mean
        sol = solve_triangular(seg.chol, diff.T, lower=True)
        out[:, idx] = -0.5 * np.sum(sol**2, axis=0) - 0.5 * seg.log_det - 0.5 * n * LOG_2PI
    return out


def log_density(model: CurveGaussianModel, x) -> float | np.ndarray:
    """Chain-of-Gaussians log density at x (single point or (N, n) batch)."""
    x_arr = np.asarray(x, dtype=float)
    single = x_arr.ndim == 1
    log_pdfs = segment_log_pdfs(model, x_arr)
    result = logsumexp(log_pdfs, axis=1) - math.log(model.n_segments)
    return float(result[0]) if single else result


def log_density_exact(
    curve: FourierCurve, sigma: float, x, quad_points: int = 128
) -> float | np.ndarray:
    """Quadrature evaluation of the exact marginal log density.

    Gauss-Legendre with ``quad_points`` nodes per intrinsic axis.  The
    integrand exp(-|x - phi(s)|^2 / (2 sigma^2)) is smooth but sharply
    peaked for small sigma, so accuracy improves with quad_points; 128 per
    axis resolves sigma >= 0.01 on unit-scale curves.
    """
    if quad_points < 32:
        raise ValueError("quad_points must be at least 32")
    x_arr = np.atleast_2d(np.asarray(x, dtype=float))
    single = np.asarray(x, dtype=float).ndim == 1
    d, n = curve.intrinsic_dim, curve.ambient_dim

    nodes, weights = np.polynomial.legendre.leggauss(quad_points)
    axis = 0.5 * (nodes + 1.0)
    axis_w = 0.5 * weights
    mesh = np.stack(
        [g.ravel() for g in np.meshgrid(*([axis] * d), indexing="ij")], axis=1
    )
    w = np.ones(1)
    for _ in range(d):
        w = np.multiply.outer(w, axis_w).ravel()

    curve_pts = basis_matrix(mesh, curve.order) @ curve.coeffs.T
    sq_dist = (
        np.sum(x_arr**2, axis=1)[:, None]
        - 2.0 * x_arr @ curve_pts.T
        + np.sum(curve_pts**2, axis=1)[None, :]
    )
    log_joint = -0.5 * sq_dist / sigma**2 - 0.5 * n * (LOG_2PI + 2.0 * math.log(sigma))
    result = logsumexp(log_joint, axis=1, b=w[None, :])
    return float(result[0]) if single else result


def log_density_pointsum(
    curve: FourierCurve, sigma: float, x, nodes: int
) -> float | np.ndarray:
    """Equal-weight sum of isotropic Gaussians at the curve points phi(i/K).

    Defined for closed curves only (intrinsic_dim 1).  Not used by the
    clustering pipeline; it demonstrates the low-density gaps between nodes.
    """
    if curve.intrinsic_dim != 1:
        raise ValueError("point-sum approximation is defined for curves only")
    x_arr = np.atleast_2d(np.asarray(x, dtype=float))
    single = np.asarray(x, dtype=float).ndim == 1
    n = curve.ambient_dim

    s = (np.arange(nodes) / nodes)[:, None]
    curve_pts = curve.evaluate(s)
    sq_dist = (
        np.sum(x_arr**2, axis=1)[:, None]
        - 2.0 * x_arr @ curve_pts.T
        + np.sum(curve_pts**2, axis=1)[None, :]
    )
    log_pdfs = -0.5 * sq_dist / sigma**2 - 0.5 * n * (LOG_2PI + 2.0 * math.log(sigma))
    result = logsumexp(log_pdfs, axis=1) - math.log(nodes)
    return float(result[0]) if single else result


def sample_points(
    curve: FourierCurve,
    sigma: float,
    count: int,
    rng: np.random.Generator,
    noiseless: bool = False,
) -> np.ndarray:
    """Draw points: s uniform on [0,1]^d, then x = phi(s) + sigma * N(0, I).

    ``noiseless`` skips the Gaussian term entirely (exact curve samples);
    use it instead of sigma=0, which models reject.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    s = rng.random((count, curve.intrinsic_dim))
    points = curve.evaluate(s)
    if not noiseless:
        points = points + sigma * rng.standard_normal(points.shape)
    return points


def sample(model: CurveGaussianModel, count: int, rng_seed: int, noiseless: bool = False):
    """Seeded generative samples from a model, as a labeled-free Dataset."""
    from .dataio import Dataset

    rng = np.random.default_rng(rng_seed)
    points = sample_points(model.curve, model.sigma, count, rng, noiseless=noiseless)
    return Dataset(points=points, labels=None, name=f"sample-seed{rng_seed}")
