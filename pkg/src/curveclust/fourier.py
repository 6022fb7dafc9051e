"""Truncated Fourier parametrizations of closed curves and tori.

A closed d-manifold embedded in R^n is represented by a truncated
d-dimensional Fourier series of order ``k``.  Coordinate ``i`` of the map
``phi : [0,1]^d -> R^n`` is

    phi_i(s) = sum over multiindices l in {-k..k}^d of
               coeffs[i, rank(l)] * prod_m basis(l_m, s_m)

with the per-axis basis convention

    basis(v, s) = cos(-2*pi*v*s)   if v < 0   (== cos(2*pi*|v|*s))
                  1                if v == 0
                  sin(2*pi*v*s)    if v > 0.

This convention is load-bearing for serialization: a coefficient stored
under a negative index is a cosine amplitude, a positive index is a sine
amplitude.  Multiindices are ranked lexicographically with the first axis
most significant (the order produced by ``itertools.product``), both for
coefficient indices in {-k..k}^d and for subinterval indices in {0..K-1}^d.

The module also provides the elementary integrals of one or two basis
functions over an axis-aligned subinterval [j/K, (j+1)/K]^d; the closed
forms for subinterval means, covariances, and likelihood gradients are
linear combinations of these.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

TWO_PI = 2.0 * math.pi


def coeff_multiindices(order: int, dim: int) -> list[tuple[int, ...]]:
    """All coefficient multiindices in {-order..order}^dim, lexicographic."""
    rng = range(-order, order + 1)
    return list(itertools.product(rng, repeat=dim))


def segment_multiindices(segments: int, dim: int) -> list[tuple[int, ...]]:
    """All subinterval multiindices in {0..segments-1}^dim, lexicographic."""
    return list(itertools.product(range(segments), repeat=dim))


def multiindex_rank(l: tuple[int, ...], order: int) -> int:
    """Lexicographic rank of a coefficient multiindex (first axis most significant)."""
    width = 2 * order + 1
    rank = 0
    for v in l:
        if not -order <= v <= order:
            raise ValueError(f"multiindex entry {v} outside [-{order}, {order}]")
        rank = rank * width + (v + order)
    return rank


@dataclass(frozen=True)
class FourierCurve:
    """A truncated Fourier series curve (intrinsic_dim=1) or torus (>=2).

    ``coeffs`` has shape (ambient_dim, (2*order+1)**intrinsic_dim); column r
    holds the amplitudes of the multiindex with lexicographic rank r.
    """

    coeffs: np.ndarray
    order: int
    intrinsic_dim: int = 1

    def __post_init__(self):
        coeffs = np.ascontiguousarray(np.asarray(self.coeffs, dtype=float))
        if coeffs.ndim != 2:
            raise ValueError("coeffs must be a 2-D array (ambient_dim x n_terms)")
        if self.order < 0:
            raise ValueError("order must be non-negative")
        if self.intrinsic_dim < 1:
            raise ValueError("intrinsic_dim must be positive")
        expected = (2 * self.order + 1) ** self.intrinsic_dim
        if coeffs.shape[1] != expected:
            raise ValueError(
                f"coeffs has {coeffs.shape[1]} terms per coordinate, "
                f"expected (2*{self.order}+1)**{self.intrinsic_dim} = {expected}"
            )
        if coeffs.shape[0] < 1:
            raise ValueError("ambient_dim must be positive")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coeffs must be finite")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def ambient_dim(self) -> int:
        return self.coeffs.shape[0]

    @property
    def n_terms(self) -> int:
        return self.coeffs.shape[1]

    @property
    def n_params(self) -> int:
        return self.coeffs.size

    def multiindices(self) -> list[tuple[int, ...]]:
        return coeff_multiindices(self.order, self.intrinsic_dim)

    def coefficient(self, i: int, l: tuple[int, ...] | int) -> float:
        """Amplitude of multiindex ``l`` on coordinate ``i`` (both 0-based i)."""
        if isinstance(l, int):
            l = (l,)
        return float(self.coeffs[i, multiindex_rank(tuple(l), self.order)])

    def evaluate(self, s) -> np.ndarray:
        """Evaluate the map at parameter(s) ``s``.

        ``s`` may be a scalar (only for intrinsic_dim 1), a length-d vector,
        or a (P, d) batch; returns shape (ambient_dim,) or (P, ambient_dim).
        """
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        single = s_arr.ndim == 1
        if single:
            s_arr = s_arr[None, :]
        if s_arr.shape[1] != self.intrinsic_dim:
            raise ValueError(
                f"parameter points have {s_arr.shape[1]} coordinates, "
                f"expected {self.intrinsic_dim}"
            )
        basis = basis_matrix(s_arr, self.order)
        points = basis @ self.coeffs.T
        return points[0] if single else points

    def with_coeffs(self, coeffs: np.ndarray) -> "FourierCurve":
        """Same order/dimension, different coefficient array."""
        return FourierCurve(coeffs=coeffs, order=self.order, intrinsic_dim=self.intrinsic_dim)


def axis_basis(values: np.ndarray, order: int) -> np.ndarray:
    """Per-axis basis values: column rank(v) = basis(v, s) for v in -order..order."""
    values = np.asarray(values, dtype=float)
    out = np.empty((values.size, 2 * order + 1))
    for v in range(-order, order + 1):
        col = v + order
        if v < 0:
            out[:, col] = np.cos(TWO_PI * (-v) * values)
        elif v == 0:
            out[:, col] = 1.0
        else:
            out[:, col] = np.sin(TWO_PI * v * values)
    return out


def basis_matrix(s: np.ndarray, order: int) -> np.ndarray:
    """Full basis matrix for batch s of shape (P, d): entry [p, rank(l)]."""
    s = np.asarray(s, dtype=float)
    result = np.ones((s.shape[0], 1))
    for m in range(s.shape[1]):
        axis = axis_basis(s[:, m], order)
        result = np.einsum("pA,pa->pAa", result, axis).reshape(s.shape[0], -1)
    return result


def _axis_integral(l: int, lo: float, hi: float) -> float:
    # antiderivative of basis(l, s), three-way split on the sign of l
    if l < 0:
        def anti(s):
            return -math.sin(-TWO_PI * l * s) / (TWO_PI * l)
    elif l == 0:
        def anti(s):
            return s
    else:
        def anti(s):
            return -math.cos(TWO_PI * l * s) / (TWO_PI * l)
    return anti(hi) - anti(lo)


def _axis_pair_integral(l1: int, l2: int, lo: float, hi: float) -> float:
    # antiderivative of basis(l1, s)*basis(l2, s); the l1 +- l2 = 0 sub-cases
    # replace the vanishing-frequency term of the product-to-sum expansion
    if l1 == 0 and l2 == 0:
        return hi - lo
    if l2 == 0:
        return _axis_integral(l1, lo, hi)
    if l1 == 0:
        return _axis_integral(l2, lo, hi)
    fsum = l1 + l2
    fdif = l1 - l2
    if l1 < 0 and l2 < 0:
        if l1 != l2:
            def anti(s):
                return (-math.sin(-TWO_PI * s * fsum) / (2 * TWO_PI * fsum)
                        - math.sin(-TWO_PI * s * fdif) / (2 * TWO_PI * fdif))
        else:
            def anti(s):
                return (-math.sin(-TWO_PI * s * fsum) / (2 * TWO_PI * fsum)
                        + s / 2.0)
    elif l1 < 0 and l2 > 0:
        if l1 != -l2:
            def anti(s):
                return (math.cos(-TWO_PI * s * fdif) / (2 * TWO_PI * fdif)
                        - math.cos(-TWO_PI * s * fsum) / (2 * TWO_PI * fsum))
        else:
            def anti(s):
                return math.cos(-TWO_PI * s * fdif) / (2 * TWO_PI * fdif)
    elif l1 > 0 and l2 < 0:
        if l1 != -l2:
            def anti(s):
                return (-math.cos(TWO_PI * s * fdif) / (2 * TWO_PI * fdif)
                        - math.cos(TWO_PI * s * fsum) / (2 * TWO_PI * fsum))
        else:
            def anti(s):
                return -math.cos(TWO_PI * s * fdif) / (2 * TWO_PI * fdif)
    else:  # l1 > 0 and l2 > 0
        if l1 != l2:
            def anti(s):
                return (math.sin(TWO_PI * s * fdif) / (2 * TWO_PI * fdif)
                        - math.sin(TWO_PI * s * fsum) / (2 * TWO_PI * fsum))
        else:
            def anti(s):
                return (s / 2.0
                        - math.sin(TWO_PI * s * fsum) / (2 * TWO_PI * fsum))
    return anti(hi) - anti(lo)


def basis_integral(j: tuple[int, ...], l: tuple[int, ...], segments: int) -> float:
    """Integral of prod_m basis(l_m, s_m) over the subinterval indexed by j.

    The subinterval is the product of [j_m/K, (j_m+1)/K] with K = segments.
    """
    j, l = tuple(j), tuple(l)
    if len(j) != len(l):
        raise ValueError("j and l must have the same length")
    result = 1.0
    for jm, lm in zip(j, l):
        if not 0 <= jm < segments:
            raise ValueError(f"subinterval index {jm} outside [0, {segments})")
        result *= _axis_integral(lm, jm / segments, (jm + 1) / segments)
    return result


def basis_pair_integral(
    j: tuple[int, ...], l1: tuple[int, ...], l2: tuple[int, ...], segments: int
) -> float:
    """Integral of prod_m basis(l1_m, s_m)*basis(l2_m, s_m) over subinterval j."""
    j, l1, l2 = tuple(j), tuple(l1), tuple(l2)
    if not len(j) == len(l1) == len(l2):
        raise ValueError("j, l1, l2 must have the same length")
    result = 1.0
    for jm, am, bm in zip(j, l1, l2):
        if not 0 <= jm < segments:
            raise ValueError(f"subinterval index {jm} outside [0, {segments})")
        result *= _axis_pair_integral(am, bm, jm / segments, (jm + 1) / segments)
    return result


@lru_cache(maxsize=64)
def integral_tables(order: int, dim: int, segments: int):
    """Dense tables of basis integrals for every subinterval.

    Returns (single, pair):
      single[jr, lr]        = basis_integral(j, l, segments)
      pair[jr, l1r, l2r]    = basis_pair_integral(j, l1, l2, segments)
    with jr / lr the lexicographic ranks.  Cached per (order, dim, segments);
    the tables depend on those three integers only, not on coefficients.
    """
    width = 2 * order + 1
    ax1 = np.empty((segments, width))
    ax2 = np.empty((segments, width, width))
    for jm in range(segments):
        lo, hi = jm / segments, (jm + 1) / segments
        for a in range(-order, order + 1):
            ax1[jm, a + order] = _axis_integral(a, lo, hi)
            for b in range(-order, order + 1):
                ax2[jm, a + order, b + order] = _axis_pair_integral(a, b, lo, hi)

    single = np.ones((1, 1))
    pair = np.ones((1, 1, 1))
    for _ in range(dim):
        single = np.einsum("JA,ja->JjAa", single, ax1).reshape(
            single.shape[0] * segments, single.shape[1] * width
        )
        pair = np.einsum("JAB,jab->JjAaBb", pair, ax2).reshape(
            pair.shape[0] * segments, pair.shape[1] * width, pair.shape[2] * width
        )
    single.flags.writeable = False
    pair.flags.writeable = False
    return single, pair


def circle(radius: float = 1.0, center=(0.0, 0.0)) -> FourierCurve:
    """Unit-speed-in-parameter circle: (cx + r*cos(2*pi*s), cy + r*sin(2*pi*s))."""
    coeffs = np.zeros((2, 3))
    coeffs[0, 0] = radius      # rank of l=-1: cosine on x
    coeffs[0, 1] = center[0]
    coeffs[1, 1] = center[1]
    coeffs[1, 2] = radius      # rank of l=+1: sine on y
    return FourierCurve(coeffs=coeffs, order=1)


def ellipse(a: float, b: float, center=(0.0, 0.0)) -> FourierCurve:
    """Axis-aligned ellipse (cx + a*cos(2*pi*s), cy + b*sin(2*pi*s))."""
    coeffs = np.zeros((2, 3))
    coeffs[0, 0] = a
    coeffs[0, 1] = center[0]
    coeffs[1, 1] = center[1]
    coeffs[1, 2] = b
    return FourierCurve(coeffs=coeffs, order=1)
