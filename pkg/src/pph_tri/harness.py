"""Refinement-ladder experiments for the linear and nonlinear kernels.

Level ``k`` uses a stencil of half side ``h0 / 2**k``.  All levels keep the
vertex D of the level-0 stencil fixed, so the inner triangles nest
(``S_G ⊂ S_Y ⊂ S_R``) with their D-F edges on one line.  Errors of every
level are measured in the infinity norm on a barycentric lattice over the
finest inner triangle.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .funcdsl import TestFunction
from .means import DEFAULT_TRANSLATION, TranslationConfig
from .reconstruct import evaluate, linear_coefficients, reconstruct_adapted
from .stencil import StencilGeometry, barycentric_lattice, build_geometry, sample_function

log = logging.getLogger(__name__)

EXACT_THRESHOLD = 1e-15
LEVEL_NAMES = ("S_R", "S_Y", "S_G")
KERNELS = ("linear", "nonlinear")


def level_name(k: int) -> str:
    return LEVEL_NAMES[k] if k < len(LEVEL_NAMES) else f"S_{k}"


@dataclass(frozen=True)
class LadderSpec:
    function: TestFunction
    h0: float = 0.005
    levels: int = 3
    grid_n: int = 64
    kernels: Tuple[str, ...] = KERNELS
    translation: TranslationConfig = DEFAULT_TRANSLATION
    adapt: bool = True
    threads: int = 0

    def __post_init__(self):
        if not (self.h0 > 0 and math.isfinite(self.h0)):
            raise ValueError("h0 must be positive")
        if self.levels < 2:
            raise ValueError("levels must be at least 2")
        if self.grid_n < 8:
            raise ValueError("grid_n must be at least 8")
        bad = set(self.kernels) - set(KERNELS)
        if bad or not self.kernels:
            raise ValueError(f"kernels must be a nonempty subset of {KERNELS}, got {self.kernels}")


@dataclass
class LevelResult:
    name: str
    h: float
    errors: dict = field(default_factory=dict)
    orders: dict = field(default_factory=dict)


@dataclass
class ConvergenceReport:
    function: str = ""
    h0: float = float("nan")
    grid_n: int = 0
    offset_constant: float = float("nan")
    kernels: Tuple[str, ...] = KERNELS
    levels: List[LevelResult] = field(default_factory=list)

    def errors(self, kernel: str) -> List[float]:
        return [lv.errors[kernel] for lv in self.levels]

    def orders(self, kernel: str) -> List[Optional[float]]:
        return [lv.orders[kernel] for lv in self.levels[1:]]


def estimate_order(e_coarse: float, e_fine: float) -> Optional[float]:
    """``log2(e_coarse / e_fine)``; None ("exact") if either error is below 1e-15."""
    if e_coarse < 0 or e_fine < 0:
        raise ValueError("errors must be nonnegative")
    if e_coarse < EXACT_THRESHOLD or e_fine < EXACT_THRESHOLD:
        return None
    return math.log2(e_coarse / e_fine)


def ladder_geometries(h0: float, levels: int) -> List[StencilGeometry]:
    """Stencils of half side h0/2^k sharing the level-0 vertex D."""
    out = []
    for k in range(levels):
        h = h0 / 2 ** k
        out.append(build_geometry(h, origin=(h0 / 2 - h / 2, 0.0)))
    return out


def worker_count(threads: int = 0) -> int:
    """Resolve a thread count; 0 means PPH_TRI_THREADS, then the CPU count."""
    if threads > 0:
        return threads
    env = os.environ.get("PPH_TRI_THREADS", "").strip()
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"PPH_TRI_THREADS must be an integer, got {env!r}") from None
        if n < 0:
            raise ValueError("PPH_TRI_THREADS must be >= 0")
        if n > 0:
            return n
    return os.cpu_count() or 1


CHUNK = 512


def _chunked_map(fn: Callable, pts: np.ndarray, workers: int) -> np.ndarray:
    # fixed chunk boundaries: results must not depend on the worker count
    chunks = [pts[i:i + CHUNK] for i in range(0, len(pts), CHUNK)]
    if workers <= 1 or len(chunks) == 1:
        parts = [fn(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(fn, chunks))
    return np.concatenate(parts)


def sample_points(spec: LadderSpec, region=None) -> np.ndarray:
    """Lattice over the finest inner triangle, nudged off branch boundaries."""
    geoms = ladder_geometries(spec.h0, spec.levels)
    tri = region if region is not None else geoms[-1].inner_triangle
    pts = barycentric_lattice(tri, spec.grid_n)
    return nudge_off_ties(spec.function, pts, tri, geoms[-1].h)


def nudge_off_ties(func: TestFunction, pts: np.ndarray, tri, h: float) -> np.ndarray:
    ties = np.asarray(func.ties(pts[:, 0], pts[:, 1]), dtype=bool)
    if not ties.any():
        return pts
    centre = np.mean(np.asarray(tri, dtype=float), axis=0)
    pts = pts.copy()
    d = centre - pts[ties]
    norm = np.linalg.norm(d, axis=1, keepdims=True)
    pts[ties] += 1e-12 * h * d / np.where(norm > 0, norm, 1.0)
    log.warning("%d sample point(s) of %s lie on a branch boundary; nudged by 1e-12*h toward %s",
                int(ties.sum()), func.name, tuple(centre))
    return pts


def _kernel_values(kernel: str, geom: StencilGeometry, spec: LadderSpec, values, pts):
    x, y = geom.to_local(pts[:, 0], pts[:, 1])
    if kernel == "linear":
        return np.asarray(evaluate(linear_coefficients(values, geom.h), geom.h, x, y))
    return reconstruct_adapted(values, geom.h, np.column_stack([x, y]), spec.translation, spec.adapt)


def run_convergence(spec: LadderSpec) -> ConvergenceReport:
    """Errors on the finest inner triangle for every level and kernel."""
    geoms = ladder_geometries(spec.h0, spec.levels)
    pts = sample_points(spec)
    workers = worker_count(spec.threads)
    exact = _chunked_map(lambda p: np.asarray(spec.function(p[:, 0], p[:, 1]), dtype=float), pts, workers)

    report = ConvergenceReport(spec.function.name, spec.h0, spec.grid_n,
                               spec.translation.offset_constant, tuple(spec.kernels))
    for k, geom in enumerate(geoms):
        values = sample_function(spec.function, geom)
        lv = LevelResult(level_name(k), geom.h)
        for kernel in spec.kernels:
            rec = _chunked_map(lambda p: _kernel_values(kernel, geom, spec, values, p), pts, workers)
            lv.errors[kernel] = float(np.max(np.abs(rec - exact)))
        report.levels.append(lv)
    for prev, cur in zip(report.levels, report.levels[1:]):
        for kernel in spec.kernels:
            cur.orders[kernel] = estimate_order(prev.errors[kernel], cur.errors[kernel])
    return report


def gibbs_overshoot(samples: Sequence[float], data_range: Tuple[float, float]) -> float:
    """How far samples leave the data range widened by 5% of its width."""
    s = np.asarray(samples, dtype=float)
    if s.size == 0:
        raise ValueError("need at least one sample")
    lo, hi = data_range
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    return float(max(0.0, s.max() - hi, lo - s.min()))


def gibbs_study(func: TestFunction, h: float, grid_n: int = 64,
                cfg: TranslationConfig = DEFAULT_TRANSLATION, adapt: bool = True) -> dict:
    """Overshoot of both kernels over the inner triangle of one stencil."""
    geom = build_geometry(h)
    values = sample_function(func, geom)
    tri = geom.inner_triangle
    pts = nudge_off_ties(func, barycentric_lattice(tri, grid_n), tri, h)
    x, y = geom.to_local(pts[:, 0], pts[:, 1])
    lin = np.asarray(evaluate(linear_coefficients(values, h), h, x, y))
    nl = reconstruct_adapted(values, h, np.column_stack([x, y]), cfg, adapt)
    rng = (min(values.as_tuple()), max(values.as_tuple()))
    return {"linear": gibbs_overshoot(lin, rng), "nonlinear": gibbs_overshoot(nl, rng),
            "data_range": rng}


def dump_samples(spec: LadderSpec, level: int = 0) -> str:
    """CSV of (x, y, p, p_tilde, f) over the inner triangle of one level."""
    geom = ladder_geometries(spec.h0, spec.levels)[level]
    tri = geom.inner_triangle
    pts = nudge_off_ties(spec.function, barycentric_lattice(tri, spec.grid_n), tri, geom.h)
    values = sample_function(spec.function, geom)
    p = _kernel_values("linear", geom, spec, values, pts)
    pt = _kernel_values("nonlinear", geom, spec, values, pts)
    f = np.asarray(spec.function(pts[:, 0], pts[:, 1]), dtype=float)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "p", "p_tilde", "f"])
    for row in zip(pts[:, 0], pts[:, 1], p, pt, f):
        w.writerow([_num(v, 17) for v in row])
    return buf.getvalue()


# -- report emission ------------------------------------------------------------

HEADER = ("Triangle", "E_inf(linear)", "p(linear)", "E_inf(nonlinear)", "p(nonlinear)")


def _num(v: float, digits: int = 6) -> str:
    return f"{v:.{digits}g}"


def _cells(r: ConvergenceReport, lv: LevelResult, first: bool) -> List[str]:
    row = [lv.name]
    for kernel in KERNELS:
        if kernel not in lv.errors:
            row += ["", ""]
            continue
        row.append(_num(lv.errors[kernel]))
        if first:
            row.append("-")
        else:
            o = lv.orders[kernel]
            row.append("exact" if o is None else _num(o))
    return row


def emit_report(r: ConvergenceReport, fmt: str = "csv") -> str:
    """Serialize deterministically as ``csv``, ``json`` or ``pretty``."""
    rows = [_cells(r, lv, i == 0) for i, lv in enumerate(r.levels)]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(HEADER)
        w.writerows(rows)
        return buf.getvalue()
    if fmt == "json":
        doc = {
            "function": r.function,
            "h0": r.h0 if math.isfinite(r.h0) else None,
            "grid_n": r.grid_n,
            "offset_constant": r.offset_constant if math.isfinite(r.offset_constant) else None,
            "columns": list(HEADER),
            "rows": [
                {"triangle": lv.name, "h": _num(lv.h),
                 **{f"E_inf({k})": _num(lv.errors[k]) for k in KERNELS if k in lv.errors},
                 **{f"p({k})": row[2 + 2 * i] for i, k in enumerate(KERNELS) if k in lv.errors}}
                for lv, row in zip(r.levels, rows)
            ],
        }
        return json.dumps(doc, indent=2) + "\n"
    if fmt in ("pretty", "pretty-text", "text"):
        table = [list(HEADER)] + rows
        widths = [max(len(row[i]) for row in table) for i in range(len(HEADER))]
        lines = []
        if r.levels:
            lines.append(f"# function={r.function} h0={_num(r.h0)} grid_n={r.grid_n} "
                         f"K={_num(r.offset_constant)}")
        for j, row in enumerate(table):
            lines.append("  ".join(c.rjust(w) for c, w in zip(row, widths)).rstrip())
            if j == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")
