"""Quadratic reconstruction kernels on one stencil.

All polynomials are expanded about the barycenter G in local coordinates::

    p(x, y) = a00 + a10 x + a01 Y + a20 x^2 + a11 x Y + a02 Y^2,   Y = y - √3/6 h

The linear kernel interpolates the six values.  The nonlinear kernel
replaces the arithmetic mean of the smoothness indicators, the only place
where ``fE`` enters, by the translated harmonic mean.
"""
from __future__ import annotations

from dataclasses import astuple, dataclass
from typing import Tuple

import numpy as np

from .means import DEFAULT_TRANSLATION, TranslationConfig, arithmetic_mean3, translated_harmonic_mean3
from .stencil import (SQRT3, StencilValues, orient_to_E, rotate_about_G, smoothness_indicators,
                      suspect_vertex)

# total degree of each basis monomial, in coefficient order
DEGREES = (0, 1, 1, 2, 2, 2)


@dataclass(frozen=True)
class QuadraticCoeffs:
    a00: float
    a10: float
    a01: float
    a20: float
    a11: float
    a02: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)


def _check_h(h: float) -> None:
    if not h > 0:
        raise ValueError(f"h must be positive, got {h!r}")


def linear_coefficients(v: StencilValues, h: float) -> QuadraticCoeffs:
    """Closed-form coefficients of the six-point quadratic interpolant."""
    _check_h(h)
    fA, fB, fC, fD, fE, fF = v.as_tuple()
    return QuadraticCoeffs(
        (4 * (fB + fD + fF) - (fA + fC + fE)) / 9,
        (-fA - 4 * fB + 4 * fD + fE) / (6 * h),
        SQRT3 * (fA - 4 * fB - 2 * fC - 4 * fD + fE + 8 * fF) / (18 * h),
        (fA - 2 * fF + fE) / (2 * h * h),
        -SQRT3 * (fA - 2 * fB + 2 * fD - fE) / (3 * h * h),
        (fA - 4 * fB + 4 * fC - 4 * fD + fE + 2 * fF) / (6 * h * h),
    )


def _mean_form(v: StencilValues, h: float, mean: float) -> QuadraticCoeffs:
    # fE appears only through `mean`; dA and dC do not depend on it.
    fA, fB, fC, fD, fE, fF = v.as_tuple()
    d = smoothness_indicators(v, h)
    dA, dC = d.dA, d.dC
    return QuadraticCoeffs(
        (fB + fD + fF) / 3 - h / 3 * mean,
        (fD - fB) / h - (2 * dA + dC) / 6 + mean / 2,
        SQRT3 / 6 * (dC + 2 * (fF - fC) / h) + SQRT3 / 6 * mean,
        (-dC / 2 + 1.5 * mean) / h,
        SQRT3 * (mean - (2 * dA + dC) / 3) / h,
        (dC + mean) / (2 * h),
    )


def mean_form_coefficients(v: StencilValues, h: float) -> QuadraticCoeffs:
    """Same polynomial as :func:`linear_coefficients`, written through the
    arithmetic mean of the smoothness indicators."""
    _check_h(h)
    d = smoothness_indicators(v, h)
    return _mean_form(v, h, arithmetic_mean3(*d.as_tuple()))


def nonlinear_coefficients(v: StencilValues, h: float,
                           cfg: TranslationConfig = DEFAULT_TRANSLATION) -> QuadraticCoeffs:
    """Mean-form coefficients with the arithmetic mean replaced by J3."""
    _check_h(h)
    d = smoothness_indicators(v, h)
    return _mean_form(v, h, translated_harmonic_mean3(*d.as_tuple(), cfg))


def modified_value(v: StencilValues, h: float,
                   cfg: TranslationConfig = DEFAULT_TRANSLATION,
                   mean=None) -> float:
    """The value at E that the nonlinear kernel effectively interpolates.

    ``mean`` defaults to the translated harmonic mean; passing
    :func:`~pph_tri.means.arithmetic_mean3` gives back ``fE`` (up to
    rounding).
    """
    _check_h(h)
    fA, fB, fC, fD, fE, fF = v.as_tuple()
    d = smoothness_indicators(v, h)
    m = translated_harmonic_mean3(*d.as_tuple(), cfg) if mean is None else mean(*d.as_tuple())
    return fB + fD + fF - (fA + fC) + 3 * h * m


def evaluate(c: QuadraticCoeffs, h: float, x, y):
    """Evaluate at local coordinates; accepts scalars or arrays."""
    x = np.asarray(x, dtype=float)
    Y = np.asarray(y, dtype=float) - SQRT3 / 6 * h
    out = c.a00 + c.a10 * x + c.a01 * Y + c.a20 * x * x + c.a11 * x * Y + c.a02 * Y * Y
    return float(out) if out.ndim == 0 else out


def reconstruct_adapted(v: StencilValues, h: float, points,
                        cfg: TranslationConfig = DEFAULT_TRANSLATION,
                        adapt: bool = True) -> np.ndarray:
    """Nonlinear reconstruction at local ``points`` with the suspect vertex
    rotated into the E role first.

    With ``adapt=False`` E is always treated as the suspect.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    rot = 0
    if adapt:
        v, rot = orient_to_E(v, suspect_vertex(smoothness_indicators(v, h)))
    c = nonlinear_coefficients(v, h, cfg)
    x, y = rotate_about_G(pts[:, 0], pts[:, 1], h, rot)
    return np.asarray(evaluate(c, h, x, y), dtype=float).reshape(len(pts))


def coefficient_gaps(v: StencilValues, h: float,
                     cfg: TranslationConfig = DEFAULT_TRANSLATION) -> Tuple[float, ...]:
    """``|a - ã|`` per coefficient, normalized by ``h^(3 - degree)``."""
    lin = linear_coefficients(v, h).as_array()
    nl = nonlinear_coefficients(v, h, cfg).as_array()
    return tuple(float(g) for g in np.abs(lin - nl) / np.array([h ** (3 - k) for k in DEGREES]))
