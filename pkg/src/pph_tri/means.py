"""Means of three values: arithmetic, harmonic and translated harmonic.

The translated harmonic mean ``J3`` shifts its arguments by a translation
operator ``T`` so that all three become one-signed, applies the harmonic
mean, and shifts back.  When the arguments are close to each other it agrees
with the arithmetic mean to second order; when one of them is huge it stays
bounded by the small ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Callable, Iterable, List, Sequence, Tuple

Triple = Tuple[float, float, float]
TranslationFn = Callable[[float, float, float, "TranslationConfig"], float]


@dataclass(frozen=True)
class TranslationConfig:
    """Settings of the default translation operator.

    ``offset_constant`` (K) is the smallest magnitude a translated argument
    can take.  The adapted error near a jump grows linearly with K, while
    the smooth-data behaviour wants K well above the size of the smoothness
    indicators, so K is a tuning knob rather than a fixed constant.
    """

    offset_constant: float = 0.01

    def __post_init__(self):
        K = self.offset_constant
        if not (K > 0 and math.isfinite(K)):
            raise ValueError(f"offset_constant must be positive and finite, got {K!r}")


DEFAULT_TRANSLATION = TranslationConfig()


def _check_positive(*args: float) -> None:
    for a in args:
        if not a > 0:
            raise ValueError(f"harmonic mean needs strictly positive arguments, got {args}")


def arithmetic_mean3(a1: float, a2: float, a3: float) -> float:
    return (a1 + a2 + a3) / 3.0


def harmonic_mean3(a1: float, a2: float, a3: float) -> float:
    """Harmonic mean ``3 a1 a2 a3 / (a2 a3 + a1 a3 + a1 a2)`` of positive values.

    Computed as ``3 / (1/a1 + 1/a2 + 1/a3)``, which cannot underflow in the
    products.
    """
    _check_positive(a1, a2, a3)
    return 3.0 / (1.0 / a1 + 1.0 / a2 + 1.0 / a3)


def mean_gap(a1: float, a2: float, a3: float) -> float:
    """Closed form of ``M3 - H3`` for positive values.

    Quadratic in the pairwise differences, which is why the two means are
    second-order close for nearby arguments.
    """
    _check_positive(a1, a2, a3)
    num = (a1 - a2) ** 2 * a3 + (a1 - a3) ** 2 * a2 + (a2 - a3) ** 2 * a1
    return num / (3.0 * (a2 * a3 + a1 * a3 + a1 * a2))


def target_sign(x: float, y: float, z: float) -> int:
    """Sign every translated argument must share (0 only at the origin).

    If the largest magnitude is attained with both signs the target is +1,
    otherwise it is the sign of the largest-magnitude element.
    """
    m = max(abs(x), abs(y), abs(z))
    if m == 0:
        return 0
    signs = {math.copysign(1, v) for v in (x, y, z) if abs(v) == m}
    if len(signs) > 1:
        return 1
    return int(signs.pop())


def default_translation(x: float, y: float, z: float,
                        cfg: TranslationConfig = DEFAULT_TRANSLATION) -> float:
    """Shift that makes ``x+T, y+T, z+T`` share the target sign.

    For a positive target the smallest argument is lifted to at least K
    (``T = K + max(0, -min)``); a negative target mirrors this.  T always
    carries the target sign, and the smallest translated magnitude is K
    whenever the data straddle zero, independently of how large the
    dominant argument is.
    """
    sigma = target_sign(x, y, z)
    if sigma == 0:
        return 0.0
    K = cfg.offset_constant
    if sigma > 0:
        return K + max(0.0, -min(x, y, z))
    return -K - max(0.0, max(x, y, z))


def translated_harmonic_mean3(a1: float, a2: float, a3: float,
                              cfg: TranslationConfig = DEFAULT_TRANSLATION,
                              translation: TranslationFn = default_translation) -> float:
    """``J3 = H3(a1+T, a2+T, a3+T) - T``, with ``J3(0,0,0) = 0``.

    Works for arguments of any sign.  A negative target sign is handled by
    the oddness of H3 (``H3(-u) = -H3(u)``).
    """
    if a1 == a2 == a3:
        return float(a1)
    T = translation(a1, a2, a3, cfg)
    u1, u2, u3 = a1 + T, a2 + T, a3 + T
    if u1 < 0:
        return -harmonic_mean3(-u1, -u2, -u3) - T
    return harmonic_mean3(u1, u2, u3) - T


# -- property harness for translation operators ---------------------------

@dataclass(frozen=True)
class Violation:
    prop: str
    triple: Triple
    detail: str

    def __str__(self):
        return f"property {self.prop} at {self.triple}: {self.detail}"


def _sign(v: float) -> int:
    return (v > 0) - (v < 0)


def _opposite_sign_tie(t: Triple) -> bool:
    m = max(abs(v) for v in t)
    signs = {_sign(v) for v in t if abs(v) == m}
    return m > 0 and len(signs) > 1


def validate_translation(candidate: TranslationFn,
                         sample_triples: Iterable[Sequence[float]],
                         cfg: TranslationConfig = DEFAULT_TRANSLATION,
                         rtol: float = 1e-9) -> List[Violation]:
    """Check properties 1-6 of a translation operator on sample triples.

    Oddness (3) is not checked on triples whose maximal magnitude is
    attained with both signs: there the sign rule 5a forces a positive
    shift for the triple and for its negation, which oddness forbids.

    Property 6 is made concrete as
    ``K(1-rtol) <= min|v+T| <= K + max|v|`` (bounded by the data scale,
    never below K).

    Returns the list of violations; empty means every property held.
    """
    triples = [tuple(float(v) for v in t) for t in sample_triples]
    if not triples:
        raise ValueError("need at least one sample triple")
    K = cfg.offset_constant
    out: List[Violation] = []
    for t in triples:
        T = candidate(*t, cfg)
        if t == (0.0, 0.0, 0.0):
            if T != 0:
                out.append(Violation("1", t, f"T(0,0,0) = {T!r}"))
            continue

        for p in permutations(t):
            Tp = candidate(*p, cfg)
            if abs(Tp - T) > rtol * max(1.0, abs(T)):
                out.append(Violation("2", t, f"T{p} = {Tp!r} differs from {T!r}"))
                break

        if not _opposite_sign_tie(t):
            neg = (-t[0], -t[1], -t[2])
            Tn = candidate(*neg, cfg)
            if abs(Tn + T) > rtol * max(1.0, abs(T)):
                out.append(Violation("3", t, f"T(-v) = {Tn!r}, -T(v) = {-T!r}"))

        shifted = [v + T for v in t]
        signs = {_sign(s) for s in shifted}
        if len(signs) != 1 or 0 in signs:
            out.append(Violation("4", t, f"translated values {shifted} are not one-signed"))
        else:
            want = target_sign(*t)
            if signs.pop() != want:
                rule = "5a" if _opposite_sign_tie(t) else "5b"
                out.append(Violation(rule, t, f"translated values {shifted} should have sign {want}"))

        lo = min(abs(s) for s in shifted)
        hi = K + max(abs(v) for v in t)
        if not (K * (1 - rtol) <= lo <= hi * (1 + rtol)):
            out.append(Violation("6", t, f"min translated magnitude {lo!r} outside [{K}, {hi}]"))
    return out
