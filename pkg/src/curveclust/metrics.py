"""Model-selection scores and pair-counting clustering agreement indices.

AIC and BIC follow the usual conventions

    AIC = -2 * L + 2 * p          BIC = -2 * L + p * ln(N)

with L the maximized total log likelihood, p the free-parameter count, and
N the number of points.  For hard-assignment methods L defaults to the
assignment-conditional likelihood sum_x ln(p_cl f_cl(x)); the soft mixture
likelihood is available behind a flag.

Rand and Jaccard indices are computed from the contingency table in
O(N + C^2) rather than by enumerating the N(N-1)/2 point pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ModelScore:
    mle: float
    n_params: int
    n_points: int
    bic: float
    aic: float
    likelihood: str = "hard"

    @classmethod
    def from_loglik(
        cls, mle: float, n_params: int, n_points: int, likelihood: str = "hard"
    ) -> "ModelScore":
        log_n = math.log(n_points) if n_points > 0 else 0.0
        return cls(
            mle=mle,
            n_params=n_params,
            n_points=n_points,
            bic=-2.0 * mle + n_params * log_n,
            aic=-2.0 * mle + 2.0 * n_params,
            likelihood=likelihood,
        )

    def as_dict(self) -> dict:
        return {
            "mle": self.mle,
            "n_params": self.n_params,
            "n_points": self.n_points,
            "bic": self.bic,
            "aic": self.aic,
            "likelihood": self.likelihood,
        }


def curve_mixture_n_params(mixture) -> int:
    """Free parameters of a curve mixture: coefficients + sigma per active
    component, plus (active - 1) independent weights."""
    active = mixture.active_components()
    per_component = sum(c.model.curve.n_params + 1 for c in active)
    return per_component + max(len(active) - 1, 0)


def gaussian_mixture_n_params(dim: int, n_components: int) -> int:
    """Full-covariance Gaussian mixture: mean + covariance per component,
    plus (components - 1) independent weights."""
    per_component = dim + dim * (dim + 1) // 2
    return n_components * per_component + max(n_components - 1, 0)


def score(mixture, points, likelihood: str = "hard") -> ModelScore:
    """ModelScore for a fitted curve mixture on the given points."""
    from .mcec import _as_points, assign, hard_loglik, soft_loglik

    X = _as_points(points)
    if likelihood == "hard":
        if mixture.assignment is None or len(mixture.assignment) != X.shape[0]:
            mixture.assignment = assign(mixture, X)
        mle = hard_loglik(mixture, X)
    elif likelihood == "soft":
        mle = soft_loglik(mixture, X)
    else:
        raise ValueError("likelihood must be 'hard' or 'soft'")
    return ModelScore.from_loglik(
        mle, curve_mixture_n_params(mixture), X.shape[0], likelihood
    )


def _pair_counts(labels_a, labels_b) -> tuple[float, float, float, float]:
    a = np.asarray(labels_a).ravel()
    b = np.asarray(labels_b).ravel()
    if a.shape != b.shape:
        raise ValueError("labelings must have equal length")
    n = a.size
    if n < 2:
        raise ValueError("need at least 2 points to compare labelings")
    _, a_codes = np.unique(a, return_inverse=True)
    _, b_codes = np.unique(b, return_inverse=True)
    table = np.zeros((a_codes.max() + 1, b_codes.max() + 1))
    np.add.at(table, (a_codes, b_codes), 1.0)

    def comb2(x):
        return x * (x - 1.0) / 2.0

    together_both = comb2(table).sum()
    together_a = comb2(table.sum(axis=1)).sum()
    together_b = comb2(table.sum(axis=0)).sum()
    total = comb2(float(n))
    return together_both, together_a, together_b, total


def rand_index(labels_a, labels_b) -> float:
    """Fraction of point pairs on which the two labelings agree."""
    both, in_a, in_b, total = _pair_counts(labels_a, labels_b)
    apart_both = total - in_a - in_b + both
    return (both + apart_both) / total


def jaccard_index(labels_a, labels_b) -> float:
    """Pairs co-clustered in both labelings over pairs co-clustered in at
    least one; 1.0 when no pair is co-clustered anywhere (all singletons)."""
    both, in_a, in_b, _ = _pair_counts(labels_a, labels_b)
    union = in_a + in_b - both
    if union == 0.0:
        return 1.0
    return both / union
