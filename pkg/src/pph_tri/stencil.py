"""Six-point equilateral stencil: geometry, sampling, smoothness indicators.

Local frame (half side ``h``)::

        A ----- F ----- E
         \\     / \\     /
          \\   /   \\   /
           B ----- D
            \\     /
             \\   /
               C

``A = (-h, √3/2 h)``, ``C = (0, -√3/2 h)``, ``E = (h, √3/2 h)``; B, D, F are
the edge midpoints and ``G = (0, √3/6 h)`` is the common barycenter of ACE
and of the inner triangle ``S_R = BDF``.  A geometry may be translated by
``origin`` so that stencils of different sizes can be nested in one global
frame; all reconstruction formulas work in local coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Tuple

import numpy as np

SQRT3 = math.sqrt(3.0)

LABELS = ("A", "B", "C", "D", "E", "F")
OUTER = ("A", "C", "E")

Point = Tuple[float, float]


@dataclass(frozen=True)
class StencilValues:
    fA: float
    fB: float
    fC: float
    fD: float
    fE: float
    fF: float

    def as_tuple(self):
        return (self.fA, self.fB, self.fC, self.fD, self.fE, self.fF)

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(LABELS, self.as_tuple()))

    @classmethod
    def from_dict(cls, d: Dict[str, float]) -> "StencilValues":
        return cls(*(float(d[k]) for k in LABELS))

    def replace_E(self, fE: float) -> "StencilValues":
        return StencilValues(self.fA, self.fB, self.fC, self.fD, fE, self.fF)


@dataclass(frozen=True)
class DeltaTriple:
    dA: float
    dC: float
    dE: float

    def as_tuple(self):
        return (self.dA, self.dC, self.dE)


@dataclass(frozen=True)
class StencilGeometry:
    h: float
    origin: Point = (0.0, 0.0)

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError(f"h must be positive, got {self.h!r}")

    def local_point(self, label: str) -> Point:
        h = self.h
        A = (-h, SQRT3 / 2 * h)
        C = (0.0, -SQRT3 / 2 * h)
        E = (h, SQRT3 / 2 * h)
        pts = {
            "A": A, "C": C, "E": E,
            "B": ((A[0] + C[0]) / 2, (A[1] + C[1]) / 2),
            "D": ((C[0] + E[0]) / 2, (C[1] + E[1]) / 2),
            "F": ((A[0] + E[0]) / 2, (A[1] + E[1]) / 2),
            "G": (0.0, SQRT3 / 6 * h),
        }
        return pts[label]

    def point(self, label: str) -> Point:
        x, y = self.local_point(label)
        return (x + self.origin[0], y + self.origin[1])

    @property
    def points(self) -> Dict[str, Point]:
        """Global coordinates of A..F and G."""
        return {k: self.point(k) for k in LABELS + ("G",)}

    @property
    def barycenter(self) -> Point:
        return self.point("G")

    @property
    def inner_triangle(self) -> Tuple[Point, Point, Point]:
        """Vertices B, D, F of ``S_R`` in global coordinates."""
        return (self.point("B"), self.point("D"), self.point("F"))

    @property
    def outer_triangle(self) -> Tuple[Point, Point, Point]:
        return (self.point("A"), self.point("C"), self.point("E"))

    def to_local(self, x, y):
        return np.asarray(x, dtype=float) - self.origin[0], np.asarray(y, dtype=float) - self.origin[1]


def build_geometry(h: float, origin: Point = (0.0, 0.0)) -> StencilGeometry:
    return StencilGeometry(float(h), (float(origin[0]), float(origin[1])))


def sample_function(f: Callable[[float, float], float], g: StencilGeometry) -> StencilValues:
    """Evaluate ``f`` at A..F (global coordinates)."""
    return StencilValues(*(float(f(*g.point(k))) for k in LABELS))


def smoothness_indicators(v: StencilValues, h: float) -> DeltaTriple:
    """Second-difference quotients attached to the outer vertices.

    Each is O(h) on smooth data and O(1/h) when a jump separates its vertex
    from the rest of the stencil.
    """
    if not h > 0:
        raise ValueError(f"h must be positive, got {h!r}")
    fA, fB, fC, fD, fE, fF = v.as_tuple()
    return DeltaTriple(
        (fA - (fB + fF) + fD) / h,
        (fC - (fB + fD) + fF) / h,
        (fE - (fD + fF) + fB) / h,
    )


# tie priority: E first, then A, then C
_PRIORITY = ("E", "A", "C")


def suspect_vertex(d: DeltaTriple) -> str:
    mags = {"A": abs(d.dA), "C": abs(d.dC), "E": abs(d.dE)}
    best = max(mags.values())
    for tag in _PRIORITY:
        if mags[tag] == best:
            return tag
    raise ValueError(f"non-comparable indicators {d}")  # NaN input


# One step of the 120° rotation about G: A->C->E->A, B->D->F->B.
_STEP = {"A": "C", "C": "E", "E": "A", "B": "D", "D": "F", "F": "B"}
_ROTATION_FOR = {"E": 0, "C": 1, "A": 2}


def _step_inverse(label: str, times: int) -> str:
    inv = {v: k for k, v in _STEP.items()}
    for _ in range(times % 3):
        label = inv[label]
    return label


def permute_values(v: StencilValues, rotation: int) -> StencilValues:
    """Relabel values as if the data were rotated ``rotation`` steps.

    The new value at vertex X is the old value at the vertex that the
    rotation carries onto X.
    """
    old = v.as_dict()
    return StencilValues.from_dict({X: old[_step_inverse(X, rotation)] for X in LABELS})


def orient_to_E(v: StencilValues, suspect: str) -> Tuple[StencilValues, int]:
    """Move the suspect vertex into the E role.

    Returns the relabelled values and the number of 120° steps applied; use
    :func:`rotate_about_G` with the same count to map evaluation points.
    """
    if suspect not in _ROTATION_FOR:
        raise ValueError(f"suspect must be one of A, C, E, got {suspect!r}")
    r = _ROTATION_FOR[suspect]
    return permute_values(v, r), r


def rotate_about_G(x, y, h: float, rotation: int):
    """Rotate local coordinates by ``rotation`` * 120° (counterclockwise) about G."""
    theta = 2.0 * math.pi / 3.0 * (rotation % 3)
    c, s = math.cos(theta), math.sin(theta)
    gy = SQRT3 / 6 * h
    x = np.asarray(x, dtype=float)
    dy = np.asarray(y, dtype=float) - gy
    return c * x - s * dy, s * x + c * dy + gy


def barycentric_lattice(tri: Tuple[Point, Point, Point], n: int) -> np.ndarray:
    """All points ``(i P + j Q + k R)/n`` with ``i+j+k = n``; shape ((n+1)(n+2)/2, 2)."""
    if n < 1:
        raise ValueError("lattice needs at least one subdivision")
    P = np.asarray(tri, dtype=float)
    rows = []
    for i in range(n + 1):
        j = np.arange(n + 1 - i)
        k = n - i - j
        w = np.stack([np.full_like(j, i), j, k], axis=1) / n
        rows.append(w @ P)
    return np.concatenate(rows)


def in_triangle(pts, tri, tol: float = 1e-12) -> np.ndarray:
    """Boolean mask of points inside (or on) a triangle, tolerance relative to its size."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    (x1, y1), (x2, y2), (x3, y3) = tri
    det = (y2 - y3) * (x1 - x3) + (x3 - x2) * (y1 - y3)
    l1 = ((y2 - y3) * (pts[:, 0] - x3) + (x3 - x2) * (pts[:, 1] - y3)) / det
    l2 = ((y3 - y1) * (pts[:, 0] - x3) + (x1 - x3) * (pts[:, 1] - y3)) / det
    l3 = 1.0 - l1 - l2
    return (l1 >= -tol) & (l2 >= -tol) & (l3 >= -tol)
