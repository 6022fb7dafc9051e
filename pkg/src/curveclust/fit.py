"""Fitting one curve-Gaussian component to a point set.

The objective is the empirical cross-entropy (negative mean log density)
minimized jointly over every Fourier coefficient and the noise level by a
BFGS quasi-Newton loop with a strong-Wolfe line search.  Sigma is
optimized on a log scale so the search is unconstrained; the configured
floor is re-imposed on the reported model.

Initialization is deterministic moment matching: the constant term is the
centroid, the order-1 terms trace the covariance ellipse of the points
(principal axes scaled by sqrt(2) times the singular values, matching the
data's second moments), higher orders start at zero, and sigma starts at
the RMS distance from the points to that ellipse.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import line_search

from .density import SIGMA_FLOOR, CurveGaussianModel, log_density
from .fourier import FourierCurve
from .gradient import grad_loglik


class FitError(RuntimeError):
    """Raised when a component fit cannot proceed (bad input or objective)."""


@dataclass(frozen=True)
class FitConfig:
    max_iters: int = 200
    grad_tol: float = 1e-6
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    sigma_floor: float = SIGMA_FLOOR

    def __post_init__(self):
        if self.max_iters < 1 or self.grad_tol <= 0 or self.sigma_floor <= 0:
            raise ValueError("max_iters, grad_tol, sigma_floor must be positive")
        if not 0.0 < self.wolfe_c1 < self.wolfe_c2 < 1.0:
            raise ValueError("need 0 < wolfe_c1 < wolfe_c2 < 1")


@dataclass(frozen=True)
class FitResult:
    model: CurveGaussianModel
    final_cross_entropy: float
    iters: int
    converged: bool


def cross_entropy(model: CurveGaussianModel, points) -> float:
    """Negative mean log density of the points under the model."""
    X = np.atleast_2d(np.asarray(getattr(points, "points", points), dtype=float))
    if X.shape[0] == 0:
        raise ValueError("points must be nonempty")
    return float(-np.mean(log_density(model, X)))


def init_curve_guess(
    points, order: int, segments_K: int = 16, sigma_floor: float = SIGMA_FLOOR
) -> CurveGaussianModel:
    """Deterministic moment-matching start for fit_component."""
    X = np.atleast_2d(np.asarray(getattr(points, "points", points), dtype=float))
    if X.shape[0] < 3:
        raise ValueError("need at least 3 points for an initial guess")
    n = X.shape[1]
    centroid = X.mean(axis=0)
    coeffs = np.zeros((n, 2 * order + 1))
    coeffs[:, order] = centroid

    spread = X - centroid
    if np.max(np.abs(spread)) < 1e-12:
        # all points identical: a circle of negligible radius at the point
        if order >= 1:
            coeffs[0, order - 1] = sigma_floor
            coeffs[min(1, n - 1), order + 1] = sigma_floor
        curve = FourierCurve(coeffs=coeffs, order=order)
        return CurveGaussianModel(curve=curve, sigma=sigma_floor, segments_K=segments_K)

    cov = (spread.T @ spread) / X.shape[0]
    eigvals, eigvecs = np.linalg.eigh(cov)
    lead, second = eigvals[-1], eigvals[-2] if n > 1 else eigvals[-1]
    u1, u2 = eigvecs[:, -1], eigvecs[:, -2] if n > 1 else eigvecs[:, -1]
    if order >= 1:
        coeffs[:, order - 1] = math.sqrt(max(2.0 * lead, 0.0)) * u1
        coeffs[:, order + 1] = math.sqrt(max(2.0 * second, 0.0)) * u2
    curve = FourierCurve(coeffs=coeffs, order=order)

    sweep = curve.evaluate(np.linspace(0.0, 1.0, 512, endpoint=False)[:, None])
    sq = (
        np.sum(X**2, axis=1)[:, None]
        - 2.0 * X @ sweep.T
        + np.sum(sweep**2, axis=1)[None, :]
    )
    rms = math.sqrt(max(float(np.mean(np.min(sq, axis=1))), 0.0))
    sigma = max(rms, sigma_floor)
    return CurveGaussianModel(curve=curve, sigma=sigma, segments_K=segments_K)


@dataclass
class _Objective:
    """Cross-entropy and gradient over the packed parameter vector.

    Packing: all coefficients row-major, then log(sigma).  Value/gradient
    pairs are memoized on the parameter bytes because the line search
    evaluates them at the same abscissa through separate callables.
    """

    template: CurveGaussianModel
    X: np.ndarray
    sigma_floor: float
    cache: dict = field(default_factory=dict)

    def pack(self, model: CurveGaussianModel) -> np.ndarray:
        return np.concatenate(
            [model.curve.coeffs.ravel(), [math.log(max(model.sigma, self.sigma_floor))]]
        )

    def unpack(self, theta: np.ndarray) -> CurveGaussianModel:
        if theta[-1] > 50.0:  # exp would dwarf any data scale; reject the probe
            raise ValueError("sigma parameter out of range")
        shape = self.template.curve.coeffs.shape
        coeffs = theta[:-1].reshape(shape)
        sigma = max(math.exp(theta[-1]), self.sigma_floor)
        return self.template.with_params(coeffs, sigma)

    def _evaluate(self, theta: np.ndarray):
        key = theta.tobytes()
        if key not in self.cache:
            if len(self.cache) > 64:
                self.cache.clear()
            try:
                model = self.unpack(theta)
            except (ValueError, np.linalg.LinAlgError):
                self.cache[key] = (math.inf, np.zeros_like(theta))
                return self.cache[key]
            scale = 1.0 / self.X.shape[0]
            value = float(-np.mean(log_density(model, self.X)))
            if not math.isfinite(value):
                self.cache[key] = (math.inf, np.zeros_like(theta))
                return self.cache[key]
            grad = grad_loglik(model, self.X)
            g = np.concatenate(
                [-scale * grad.d_coeffs.ravel(), [-scale * grad.d_sigma * model.sigma]]
            )
            self.cache[key] = (value, g)
        return self.cache[key]

    def value(self, theta: np.ndarray) -> float:
        return self._evaluate(theta)[0]

    def grad(self, theta: np.ndarray) -> np.ndarray:
        return self._evaluate(theta)[1]


def fit_component(points, init: CurveGaussianModel, config: FitConfig = FitConfig()) -> FitResult:
    """Minimize the cross-entropy from the given starting model.

    Inverse-Hessian BFGS updates are skipped whenever the curvature product
    y.s falls below 1e-10, so the approximation stays positive definite;
    every accepted step satisfies the strong Wolfe conditions.
    """
    X = np.atleast_2d(np.asarray(getattr(points, "points", points), dtype=float))
    if X.shape[0] < init.n_params + 1:
        raise FitError(
            f"{X.shape[0]} points cannot constrain {init.n_params} parameters"
        )
    obj = _Objective(template=init, X=X, sigma_floor=config.sigma_floor)
    theta = obj.pack(init)
    value, grad = obj._evaluate(theta)
    if not math.isfinite(value):
        raise FitError("objective is non-finite at the initial model")

    dim = theta.size
    h_inv = np.eye(dim)
    iters = 0
    converged = bool(np.max(np.abs(grad)) < config.grad_tol)
    while not converged and iters < config.max_iters:
        direction = -h_inv @ grad
        if direction @ grad >= 0.0:
            h_inv = np.eye(dim)
            direction = -grad
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            alpha = line_search(
                obj.value,
                obj.grad,
                theta,
                direction,
                gfk=grad,
                old_fval=value,
                c1=config.wolfe_c1,
                c2=config.wolfe_c2,
                maxiter=40,
            )[0]
        if alpha is None:
            alpha = _backtrack(obj, theta, direction, value, grad, config.wolfe_c1)
            if alpha is None:
                break
        theta_new = theta + alpha * direction
        value_new, grad_new = obj._evaluate(theta_new)
        step = theta_new - theta
        grad_diff = grad_new - grad
        curvature = float(step @ grad_diff)
        if curvature > 1e-10:
            rho = 1.0 / curvature
            outer = np.outer(step, grad_diff)
            h_inv = (
                (np.eye(dim) - rho * outer) @ h_inv @ (np.eye(dim) - rho * outer.T)
                + rho * np.outer(step, step)
            )
        theta, value, grad = theta_new, value_new, grad_new
        iters += 1
        converged = bool(np.max(np.abs(grad)) < config.grad_tol)

    model = obj.unpack(theta)
    if model.sigma < config.sigma_floor:
        model = model.with_params(model.curve.coeffs, config.sigma_floor)
    return FitResult(
        model=model,
        final_cross_entropy=cross_entropy(model, X),
        iters=iters,
        converged=converged,
    )


def _backtrack(obj, theta, direction, value, grad, c1, max_halvings=30):
    # Armijo fallback for the rare line-search failure; keeps descent only
    slope = float(grad @ direction)
    if slope >= 0.0:
        return None
    alpha = 1.0
    for _ in range(max_halvings):
        if obj.value(theta + alpha * direction) <= value + c1 * alpha * slope:
            return alpha
        alpha *= 0.5
    return None
