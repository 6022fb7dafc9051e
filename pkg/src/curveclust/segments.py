"""Per-subinterval means and covariances of a noisy Fourier curve.

Splitting the parameter cube [0,1]^d into K^d equal subintervals, the curve
restricted to subinterval j has exact first and second moments

    mu_j    = K^d * integral over the subinterval of phi(s) ds
    Sigma_j = sigma^2 * I
              + K^d * integral of (phi(s) - mu_j)(phi(s) - mu_j)^T ds.

Both reduce to linear/bilinear combinations of the elementary basis
integrals from :mod:`curveclust.fourier`, so they are evaluated in closed
form.  ``segment_stats_oracle`` recomputes them by tensor-product
Gauss-Legendre quadrature; the two paths are kept independent so each can
check the other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fourier import FourierCurve, basis_matrix, integral_tables


@dataclass(frozen=True)
class SegmentGaussian:
    """Gaussian moments of one subinterval, with cached Cholesky factor."""

    mean: np.ndarray
    cov: np.ndarray
    chol: np.ndarray
    log_det: float

    @classmethod
    def from_moments(cls, mean: np.ndarray, cov: np.ndarray) -> "SegmentGaussian":
        mean = np.asarray(mean, dtype=float)
        cov = np.asarray(cov, dtype=float)
        asym = np.max(np.abs(cov - cov.T)) if cov.size else 0.0
        if asym > 1e-12:
            raise ValueError(f"covariance asymmetry {asym:.3e} exceeds 1e-12")
        cov = 0.5 * (cov + cov.T)
        chol = np.linalg.cholesky(cov)
        log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
        for arr in (mean, cov, chol):
            arr.flags.writeable = False
        return cls(mean=mean, cov=cov, chol=chol, log_det=log_det)


def segment_means(curve: FourierCurve, segments: int) -> np.ndarray:
    """(K^d, n) array of subinterval means, lexicographic subinterval order."""
    single, _ = integral_tables(curve.order, curve.intrinsic_dim, segments)
    scale = float(segments) ** curve.intrinsic_dim
    return scale * single @ curve.coeffs.T


def segment_second_moments(curve: FourierCurve, segments: int) -> np.ndarray:
    """(K^d, n, n) array of K^d-scaled raw second moments per subinterval."""
    _, pair = integral_tables(curve.order, curve.intrinsic_dim, segments)
    scale = float(segments) ** curve.intrinsic_dim
    return scale * np.einsum("jab,ia,kb->jik", pair, curve.coeffs, curve.coeffs)


def segment_mean(curve: FourierCurve, j: tuple[int, ...], segments: int) -> np.ndarray:
    """Mean vector of the subinterval indexed by multiindex j."""
    return segment_means(curve, segments)[_segment_rank(j, segments)]


def _segment_rank(j: tuple[int, ...], segments: int) -> int:
    rank = 0
    for v in j:
        if not 0 <= v < segments:
            raise ValueError(f"subinterval index {v} outside [0, {segments})")
        rank = rank * segments + v
    return rank


def segment_cov(
    curve: FourierCurve, sigma: float, j: tuple[int, ...], segments: int
) -> np.ndarray:
    """Covariance matrix of the subinterval indexed by multiindex j."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    jr = _segment_rank(j, segments)
    mean = segment_means(curve, segments)[jr]
    second = segment_second_moments(curve, segments)[jr]
    cov = second - np.outer(mean, mean)
    cov[np.diag_indices_from(cov)] += sigma**2
    return 0.5 * (cov + cov.T)


def all_segments(curve: FourierCurve, sigma: float, segments: int) -> list[SegmentGaussian]:
    """All K^d subinterval Gaussians in lexicographic subinterval order."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    means = segment_means(curve, segments)
    seconds = segment_second_moments(curve, segments)
    out = []
    for mean, second in zip(means, seconds):
        cov = second - np.outer(mean, mean)
        cov[np.diag_indices_from(cov)] += sigma**2
        out.append(SegmentGaussian.from_moments(mean, 0.5 * (cov + cov.T)))
    return out


def segment_stats_oracle(
    curve: FourierCurve,
    sigma: float,
    j: tuple[int, ...],
    segments: int,
    quad_points: int = 64,
) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature evaluation of (mu_j, Sigma_j), independent of the closed form.

    Tensor-product Gauss-Legendre with ``quad_points`` nodes per axis mapped
    onto the subinterval.  Exact well past machine precision for truncated
    trigonometric integrands once quad_points comfortably exceeds the order.
    """
    if quad_points < 8:
        raise ValueError("quad_points must be at least 8")
    j = tuple(j)
    d = curve.intrinsic_dim
    if len(j) != d:
        raise ValueError("subinterval multiindex length must equal intrinsic_dim")
    nodes, weights = np.polynomial.legendre.leggauss(quad_points)

    grids, wgrids = [], []
    for jm in j:
        lo, hi = jm / segments, (jm + 1) / segments
        grids.append(0.5 * (hi - lo) * (nodes + 1.0) + lo)
        wgrids.append(0.5 * (hi - lo) * weights)
    mesh = np.stack([g.ravel() for g in np.meshgrid(*grids, indexing="ij")], axis=1)
    w = np.ones(1)
    for wg in wgrids:
        w = np.multiply.outer(w, wg).ravel()

    points = basis_matrix(mesh, curve.order) @ curve.coeffs.T
    scale = float(segments) ** d
    mean = scale * (w @ points)
    second = scale * np.einsum("p,pi,pk->ik", w, points, points)
    cov = second - np.outer(mean, mean)
    cov[np.diag_indices_from(cov)] += sigma**2
    return mean, 0.5 * (cov + cov.T)
