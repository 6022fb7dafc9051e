"""Gaussian densities on closed Fourier curves and mixture clustering.

The package models point clouds concentrated around closed curves (or
d-dimensional tori) embedded in R^n.  A curve is a truncated Fourier
series; placing isotropic Gaussian noise at a uniformly random curve point
induces a density that is evaluated through a chain of per-subinterval
Gaussians with closed-form moments.  Mixtures of such densities are fitted
by hard-assignment cross-entropy clustering (MCEC), which can drop
superfluous components, with full-covariance GMM and Gaussian CEC
baselines for comparison.
"""

__version__ = "0.1.0"

from .dataio import (
    CurvePreset,
    Dataset,
    generate,
    get_preset,
    load_model,
    presets,
    rabbit_curve,
    read_csv,
    save_model,
    synthetic_suite,
    write_csv,
)
from .density import (
    SIGMA_FLOOR,
    CurveGaussianModel,
    log_density,
    log_density_exact,
    log_density_pointsum,
    sample,
    sample_points,
)
from .fit import (
    FitConfig,
    FitError,
    FitResult,
    cross_entropy,
    fit_component,
    init_curve_guess,
)
from .fourier import (
    FourierCurve,
    basis_integral,
    basis_pair_integral,
    circle,
    coeff_multiindices,
    ellipse,
    segment_multiindices,
)
from .gradient import ParamGradient, fd_gradient, grad_loglik
from .mcec import (
    CecResult,
    GaussianMixtureResult,
    McecConfig,
    MixtureComponent,
    MixtureState,
    assign,
    cec_gaussian,
    gmm_em,
    mcec_run,
    mixture_energy,
    remove_small_clusters,
)
from .metrics import ModelScore, jaccard_index, rand_index, score
from .segments import (
    SegmentGaussian,
    all_segments,
    segment_cov,
    segment_mean,
    segment_stats_oracle,
)

__all__ = [
    "CecResult",
    "CurveGaussianModel",
    "CurvePreset",
    "Dataset",
    "FitConfig",
    "FitError",
    "FitResult",
    "FourierCurve",
    "GaussianMixtureResult",
    "McecConfig",
    "MixtureComponent",
    "MixtureState",
    "ModelScore",
    "ParamGradient",
    "SIGMA_FLOOR",
    "SegmentGaussian",
    "all_segments",
    "assign",
    "basis_integral",
    "basis_pair_integral",
    "cec_gaussian",
    "circle",
    "coeff_multiindices",
    "cross_entropy",
    "ellipse",
    "fd_gradient",
    "fit_component",
    "generate",
    "get_preset",
    "gmm_em",
    "grad_loglik",
    "init_curve_guess",
    "jaccard_index",
    "load_model",
    "log_density",
    "log_density_exact",
    "log_density_pointsum",
    "mcec_run",
    "mixture_energy",
    "presets",
    "rabbit_curve",
    "rand_index",
    "read_csv",
    "remove_small_clusters",
    "sample",
    "sample_points",
    "save_model",
    "score",
    "segment_cov",
    "segment_mean",
    "segment_multiindices",
    "segment_stats_oracle",
    "synthetic_suite",
    "write_csv",
]
