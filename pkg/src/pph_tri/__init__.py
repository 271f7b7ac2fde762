"""Nonlinear harmonic-mean (PPH-type) reconstruction on equilateral triangle stencils."""
from .means import (TranslationConfig, arithmetic_mean3, default_translation, harmonic_mean3,
                    mean_gap, translated_harmonic_mean3, validate_translation)
from .reconstruct import (QuadraticCoeffs, evaluate, linear_coefficients, mean_form_coefficients,
                          modified_value, nonlinear_coefficients, reconstruct_adapted)
from .stencil import (DeltaTriple, StencilGeometry, StencilValues, build_geometry, orient_to_E,
                      sample_function, smoothness_indicators, suspect_vertex)

__all__ = [
    "DeltaTriple", "QuadraticCoeffs", "StencilGeometry", "StencilValues", "TranslationConfig",
    "arithmetic_mean3", "build_geometry", "default_translation", "evaluate", "harmonic_mean3",
    "linear_coefficients", "mean_form_coefficients", "mean_gap", "modified_value",
    "nonlinear_coefficients", "orient_to_E", "reconstruct_adapted", "sample_function",
    "smoothness_indicators", "suspect_vertex", "translated_harmonic_mean3", "validate_translation",
]

__version__ = "0.1.0"
