"""Factor-model denoising of discretely observed functional data."""

from ._core import (
    FactorFit,
    InputError,
    NumericalError,
    __version__,
    ar1_noise,
    bspline_fit,
    derive_seed,
    eigenfunction,
    eigensystem,
    fit,
    frequencies,
    gasser_variance,
    mean_only_fit,
    noise_test,
    periodogram,
    rough_signals,
    scree,
    simulate,
    spline_signals,
    sse_appr,
    suggest_L,
)

__all__ = [
    "FactorFit",
    "InputError",
    "NumericalError",
    "ar1_noise",
    "bspline_fit",
    "derive_seed",
    "eigenfunction",
    "eigensystem",
    "fit",
    "frequencies",
    "gasser_variance",
    "mean_only_fit",
    "noise_test",
    "periodogram",
    "rough_signals",
    "scree",
    "simulate",
    "spline_signals",
    "sse_appr",
    "suggest_L",
]
