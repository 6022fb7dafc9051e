"""Hard-assignment mixture clustering with curve-Gaussian components.

The main entry point is :func:`mcec_run`, a Lloyd-style loop: assign every
point to the active component minimizing -ln(weight) - ln(density), drop
components whose point share falls below a percentage threshold
(reassigning their points), then refit each surviving component by BFGS
warm-started from its previous parameters.  The loop energy

    h = sum_i p_i * (-ln(p_i) + cross_entropy(X_i, component_i))

is tracked per iteration and the loop stops once an iteration improves it
by less than ``eps``.  Because weights may reach zero, the initial
component count is only an upper bound on the final one.

Two classical baselines operate on the same data for comparisons:
:func:`gmm_em` (full-covariance EM) and :func:`cec_gaussian` (the same
hard-assignment loop with plain Gaussians, whose per-cluster optimum is
closed form).

All three share k-means++ seeding plus one Lloyd k-means pass for the
initial partition, so a single integer seed reproduces a run exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

from .density import CurveGaussianModel, log_density
from .fit import FitConfig, FitError, cross_entropy, fit_component, init_curve_guess

logger = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)
COV_REGULARIZATION = 1e-6


@dataclass
class MixtureComponent:
    model: CurveGaussianModel
    weight: float
    active: bool


@dataclass
class MixtureState:
    """Weighted curve-Gaussian components plus the current hard assignment."""

    components: list[MixtureComponent]
    assignment: np.ndarray | None = None
    energy: float = math.inf

    def active_indices(self) -> list[int]:
        return [i for i, c in enumerate(self.components) if c.active]

    def active_components(self) -> list[MixtureComponent]:
        return [c for c in self.components if c.active]

    def n_active(self) -> int:
        return len(self.active_indices())


@dataclass(frozen=True)
class McecConfig:
    k: int
    order: int = 1
    segments_K: int = 16
    eps: float | None = None  # None: 1e-4 * |first iteration energy|
    removal_pct: float = 5.0
    seed: int = 0
    max_lloyd_iters: int = 100
    fit: FitConfig = field(default_factory=FitConfig)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.eps is not None and self.eps <= 0:
            raise ValueError("eps must be positive")
        if not 0.0 < self.removal_pct < 100.0:
            raise ValueError("removal_pct must lie in (0, 100)")


def _as_points(points) -> np.ndarray:
    return np.atleast_2d(np.asarray(getattr(points, "points", points), dtype=float))


def _kmeans_pp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(len(X))]
    closest = np.sum((X - centers[0]) ** 2, axis=1)
    for i in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            centers[i] = X[rng.integers(len(X))]
            continue
        centers[i] = X[rng.choice(len(X), p=closest / total)]
        closest = np.minimum(closest, np.sum((X - centers[i]) ** 2, axis=1))
    return centers


def initial_labels(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding followed by a single Lloyd k-means pass."""
    centers = _kmeans_pp_init(X, k, rng)
    dists = np.sum((X[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    labels = np.argmin(dists, axis=1)
    for i in range(k):
        mask = labels == i
        if mask.any():
            centers[i] = X[mask].mean(axis=0)
    dists = np.sum((X[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    return np.argmin(dists, axis=1)


def _assignment_costs(state: MixtureState, X: np.ndarray) -> tuple[np.ndarray, list[int]]:
    active = state.active_indices()
    if not active:
        raise ValueError("no active components to assign to")
    costs = np.empty((X.shape[0], len(active)))
    for col, idx in enumerate(active):
        comp = state.components[idx]
        # weight 0 (emptied but not yet removed) repels points with +inf cost
        with np.errstate(divide="ignore"):
            costs[:, col] = -np.log(comp.weight) - log_density(comp.model, X)
    return costs, active


def assign(state: MixtureState, points) -> np.ndarray:
    """Hard assignment: argmin over active components of -ln(p) - ln(f).

    Ties resolve to the lowest component index.
    """
    X = _as_points(points)
    costs, active = _assignment_costs(state, X)
    return np.asarray(active, dtype=int)[np.argmin(costs, axis=1)]


def _update_weights(state: MixtureState, n_points: int) -> None:
    counts = np.bincount(state.assignment, minlength=len(state.components))
    for idx, comp in enumerate(state.components):
        comp.weight = counts[idx] / n_points if comp.active else 0.0


def remove_small_clusters(state: MixtureState, points, removal_pct: float) -> MixtureState:
    """Deactivate active clusters holding fewer than removal_pct% of points.

    Their points move to the closest remaining active cluster under the same
    assignment cost; weights are refreshed after every removal.  The largest
    cluster survives even if every cluster is below the threshold.
    """
    X = _as_points(points)
    n = X.shape[0]
    threshold = removal_pct / 100.0 * n
    counts = np.bincount(state.assignment, minlength=len(state.components))

    exempt = -1
    active = state.active_indices()
    if active and all(counts[i] < threshold for i in active):
        exempt = max(active, key=lambda i: counts[i])

    for idx in range(len(state.components)):
        comp = state.components[idx]
        counts = np.bincount(state.assignment, minlength=len(state.components))
        if not comp.active or idx == exempt or counts[idx] >= threshold:
            continue
        if state.n_active() == 1:
            break
        comp.active = False
        comp.weight = 0.0
        orphan_mask = state.assignment == idx
        if orphan_mask.any():
            state.assignment[orphan_mask] = assign(state, X[orphan_mask])
        _update_weights(state, n)
    return state


def mixture_energy(state: MixtureState, points) -> float:
    """sum_i p_i * (-ln p_i + cross_entropy of cluster i); empty terms are 0."""
    X = _as_points(points)
    total = 0.0
    for idx in state.active_indices():
        comp = state.components[idx]
        mask = state.assignment == idx
        if comp.weight <= 0.0 or not mask.any():
            continue
        total += comp.weight * (
            -math.log(comp.weight) + cross_entropy(comp.model, X[mask])
        )
    return total


def hard_loglik(state: MixtureState, points) -> float:
    """Assignment-conditional log likelihood sum_x ln(p_cl(x) f_cl(x)(x))."""
    X = _as_points(points)
    total = 0.0
    for idx in state.active_indices():
        comp = state.components[idx]
        mask = state.assignment == idx
        if not mask.any():
            continue
        total += float(
            np.sum(math.log(comp.weight) + log_density(comp.model, X[mask]))
        )
    return total


def soft_loglik(state: MixtureState, points) -> float:
    """Mixture log likelihood sum_x ln(sum_i p_i f_i(x)) over active components."""
    X = _as_points(points)
    parts = []
    for idx in state.active_indices():
        comp = state.components[idx]
        if comp.weight <= 0.0:
            continue
        parts.append(math.log(comp.weight) + log_density(comp.model, X))
    return float(np.sum(logsumexp(np.column_stack(parts), axis=1)))


def _deactivate_and_reassign(state: MixtureState, idx: int, X: np.ndarray) -> None:
    comp = state.components[idx]
    comp.active = False
    comp.weight = 0.0
    orphan_mask = state.assignment == idx
    if orphan_mask.any() and state.n_active() > 0:
        state.assignment[orphan_mask] = assign(state, X[orphan_mask])
    _update_weights(state, X.shape[0])


def mcec_run(points, config: McecConfig) -> tuple[MixtureState, list[float]]:
    """Full clustering run; returns the final state and the energy trace."""
    X = _as_points(points)
    n, dim = X.shape
    min_fit = dim * (2 * config.order + 1) + 2
    if n < config.k * min_fit:
        raise ValueError(
            f"{n} points cannot support k={config.k} clusters of "
            f"order {config.order} (need at least {config.k * min_fit})"
        )
    rng = np.random.default_rng(config.seed)
    labels = initial_labels(X, config.k, rng)
    threshold = config.removal_pct / 100.0 * n

    components: list[MixtureComponent] = []
    for i in range(config.k):
        cluster = X[labels == i]
        active = cluster.shape[0] >= max(threshold, 3)
        guess_source = cluster if cluster.shape[0] >= 3 else X
        model = init_curve_guess(
            guess_source, config.order, config.segments_K, config.fit.sigma_floor
        )
        if active:
            try:
                model = fit_component(cluster, model, config.fit).model
            except FitError as exc:
                logger.warning("initial fit of cluster %d failed: %s", i, exc)
                active = False
        components.append(MixtureComponent(model=model, weight=0.0, active=active))

    state = MixtureState(components=components, assignment=labels.copy())
    if state.n_active() == 0:
        counts = np.bincount(labels, minlength=config.k)
        state.components[int(np.argmax(counts))].active = True
    counts = np.bincount(labels, minlength=config.k)
    active_total = sum(counts[i] for i in state.active_indices())
    for idx, comp in enumerate(state.components):
        comp.weight = counts[idx] / active_total if comp.active else 0.0

    trace: list[float] = []
    h_prev = math.inf
    eps = config.eps
    for _ in range(config.max_lloyd_iters):
        state.assignment = assign(state, X)
        _update_weights(state, n)
        remove_small_clusters(state, X, config.removal_pct)

        for idx in state.active_indices():
            comp = state.components[idx]
            cluster = X[state.assignment == idx]
            if cluster.shape[0] < comp.model.n_params + 1:
                if state.n_active() > 1:
                    logger.warning("cluster %d too small to refit; deactivating", idx)
                    _deactivate_and_reassign(state, idx, X)
                continue
            try:
                comp.model = fit_component(cluster, comp.model, config.fit).model
            except FitError as exc:
                logger.warning("refit of cluster %d failed: %s", idx, exc)
                if state.n_active() > 1:
                    _deactivate_and_reassign(state, idx, X)

        h = mixture_energy(state, X)
        trace.append(h)
        if eps is None:
            eps = max(1e-4 * abs(h), 1e-12)
        if not h < h_prev - eps:
            break
        h_prev = h

    state.energy = trace[-1] if trace else math.inf
    return state, trace


# ---------------------------------------------------------------------------
# Gaussian baselines


@dataclass
class GaussianMixtureResult:
    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    labels: np.ndarray
    log_likelihood: float
    trace: list[float]
    n_iter: int
    converged: bool


def _gaussian_log_pdfs(X: np.ndarray, means: np.ndarray, covs: np.ndarray) -> np.ndarray:
    out = np.empty((X.shape[0], means.shape[0]))
    dim = X.shape[1]
    for i in range(means.shape[0]):
        chol = np.linalg.cholesky(covs[i])
        sol = solve_triangular(chol, (X - means[i]).T, lower=True)
        log_det = 2.0 * np.sum(np.log(np.diag(chol)))
        out[:, i] = -0.5 * np.sum(sol**2, axis=0) - 0.5 * log_det - 0.5 * dim * LOG_2PI
    return out


def _mle_gaussian(cluster: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = cluster.mean(axis=0)
    centered = cluster - mean
    cov = centered.T @ centered / cluster.shape[0]
    cov[np.diag_indices_from(cov)] += COV_REGULARIZATION
    return mean, cov


def gmm_em(
    points, k: int, seed: int = 0, max_iters: int = 200, tol: float = 1e-8
) -> GaussianMixtureResult:
    """Full-covariance Gaussian mixture fitted by expectation-maximization."""
    X = _as_points(points)
    n, dim = X.shape
    rng = np.random.default_rng(seed)
    labels = initial_labels(X, k, rng)

    weights = np.full(k, 1.0 / k)
    means = np.empty((k, dim))
    covs = np.empty((k, dim, dim))
    for i in range(k):
        cluster = X[labels == i] if (labels == i).any() else X
        means[i], covs[i] = _mle_gaussian(cluster)
        weights[i] = max((labels == i).sum(), 1) / n
    weights /= weights.sum()

    trace: list[float] = []
    converged = False
    for _ in range(max_iters):
        joint = _gaussian_log_pdfs(X, means, covs) + np.log(weights)[None, :]
        norms = logsumexp(joint, axis=1)
        loglik = float(norms.sum())
        trace.append(loglik)
        if len(trace) > 1 and abs(trace[-1] - trace[-2]) < tol * (1 + abs(trace[-2])):
            converged = True
            break
        resp = np.exp(joint - norms[:, None])
        totals = resp.sum(axis=0)
        weights = totals / n
        for i in range(k):
            if totals[i] < 1e-12:
                continue
            means[i] = resp[:, i] @ X / totals[i]
            centered = X - means[i]
            covs[i] = (resp[:, i][:, None] * centered).T @ centered / totals[i]
            covs[i][np.diag_indices_from(covs[i])] += COV_REGULARIZATION

    joint = _gaussian_log_pdfs(X, means, covs) + np.log(weights)[None, :]
    return GaussianMixtureResult(
        weights=weights,
        means=means,
        covariances=covs,
        labels=np.argmax(joint, axis=1),
        log_likelihood=float(logsumexp(joint, axis=1).sum()),
        trace=trace,
        n_iter=len(trace),
        converged=converged,
    )


@dataclass
class CecResult:
    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    active: np.ndarray
    labels: np.ndarray
    energy: float
    trace: list[float]
    log_likelihood: float  # hard-assignment likelihood, equals -N * energy


def cec_gaussian(
    points,
    k: int,
    seed: int = 0,
    removal_pct: float = 5.0,
    max_iters: int = 100,
    eps: float | None = None,
) -> CecResult:
    """Cross-entropy clustering with full Gaussians (closed-form refits)."""
    X = _as_points(points)
    n, dim = X.shape
    rng = np.random.default_rng(seed)
    labels = initial_labels(X, k, rng)
    threshold = removal_pct / 100.0 * n

    means = np.empty((k, dim))
    covs = np.empty((k, dim, dim))
    active = np.zeros(k, dtype=bool)
    for i in range(k):
        cluster = X[labels == i]
        active[i] = cluster.shape[0] >= max(threshold, dim + 1)
        means[i], covs[i] = _mle_gaussian(cluster if cluster.shape[0] else X)
    if not active.any():
        active[int(np.argmax(np.bincount(labels, minlength=k)))] = True
    weights = np.where(active, np.bincount(labels, minlength=k) / n, 0.0)
    weights = weights / weights.sum()

    def costs(mask_points):
        idxs = np.flatnonzero(active)
        pdfs = _gaussian_log_pdfs(mask_points, means[idxs], covs[idxs])
        with np.errstate(divide="ignore"):
            return -np.log(weights[idxs])[None, :] - pdfs, idxs

    trace: list[float] = []
    h_prev = math.inf
    for _ in range(max_iters):
        cost, idxs = costs(X)
        labels = idxs[np.argmin(cost, axis=1)]
        counts = np.bincount(labels, minlength=k)
        weights = np.where(active, counts / n, 0.0)

        below = [i for i in np.flatnonzero(active) if counts[i] < threshold]
        exempt = -1
        if len(below) == active.sum():
            exempt = max(np.flatnonzero(active), key=lambda i: counts[i])
        for i in below:
            if i == exempt or active.sum() == 1 or counts[i] >= threshold:
                continue
            active[i] = False
            weights[i] = 0.0
            orphans = labels == i
            if orphans.any():
                cost, idxs = costs(X[orphans])
                labels[orphans] = idxs[np.argmin(cost, axis=1)]
            counts = np.bincount(labels, minlength=k)
            weights = np.where(active, counts / n, 0.0)

        for i in np.flatnonzero(active):
            cluster = X[labels == i]
            if cluster.shape[0] > 0:
                means[i], covs[i] = _mle_gaussian(cluster)

        pdfs = _gaussian_log_pdfs(X, means, covs)
        per_point = -np.log(weights[labels]) - pdfs[np.arange(n), labels]
        h = float(per_point.mean())
        trace.append(h)
        if eps is None:
            eps = max(1e-4 * abs(h), 1e-12)
        if not h < h_prev - eps:
            break
        h_prev = h

    energy = trace[-1]
    return CecResult(
        weights=weights,
        means=means,
        covariances=covs,
        active=active,
        labels=labels,
        energy=energy,
        trace=trace,
        log_likelihood=-n * energy,
    )
