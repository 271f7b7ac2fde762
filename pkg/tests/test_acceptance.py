"""Acceptance gate: nine end-to-end checks with tolerances and time limits.

Run with ``pytest tests/test_acceptance.py -v`` (a summary line per
criterion is printed at the end of the session) or directly with
``python tests/test_acceptance.py``.
"""
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import coefficient_scale, dense_coefficients  # noqa: E402
from pph_tri.funcdsl import builtin  # noqa: E402
from pph_tri.harness import LadderSpec, gibbs_study, ladder_geometries, run_convergence  # noqa: E402
from pph_tri.means import (TranslationConfig, arithmetic_mean3, default_translation,  # noqa: E402
                           harmonic_mean3, mean_gap, translated_harmonic_mean3,
                           validate_translation)
from pph_tri.reconstruct import (coefficient_gaps, linear_coefficients,  # noqa: E402
                                 mean_form_coefficients, modified_value, reconstruct_adapted)
from pph_tri.stencil import (StencilValues, barycentric_lattice, build_geometry,  # noqa: E402
                             rotate_about_G, sample_function)

SEED = 20261017
RESULTS = []  # (number, passed, elapsed, detail) per criterion, read by conftest


def _random_stencils(n, seed):
    rng = np.random.default_rng(seed)
    vals = rng.uniform(-100, 100, size=(n, 6))
    hs = rng.choice([1.0, 0.01], size=n)
    return [(StencilValues(*row), float(h)) for row, h in zip(vals, hs)]


def criterion_1():
    worst_coef = worst_fe = 0.0
    for v, h in _random_stencils(1000, SEED):
        vals = np.array(v.as_tuple())
        scale = coefficient_scale(vals, h)
        lin = linear_coefficients(v, h).as_array()
        mf = mean_form_coefficients(v, h).as_array()
        worst_coef = max(worst_coef, float(np.max(np.abs(lin - mf) / scale)))
        fe = modified_value(v, h, mean=arithmetic_mean3)
        worst_fe = max(worst_fe, abs(fe - v.fE) / max(1.0, float(np.max(np.abs(vals)))))
    ok = worst_coef <= 1e-12 and worst_fe <= 1e-12
    return ok, f"max rel coef diff {worst_coef:.3g}, max rel fE diff {worst_fe:.3g} (tol 1e-12)"


def criterion_2():
    worst = 0.0
    for v, h in _random_stencils(200, SEED + 1):
        vals = np.array(v.as_tuple())
        dense = dense_coefficients(vals, h)
        lin = linear_coefficients(v, h).as_array()
        worst = max(worst, float(np.max(np.abs(lin - dense) / coefficient_scale(vals, h))))
    return worst <= 1e-9, f"max rel diff vs dense solve {worst:.3g} (tol 1e-9)"


def criterion_3():
    rng = np.random.default_rng(SEED + 2)
    n = 10_000
    pos = rng.uniform(1e-3, 100, size=(n, 3))
    mixed = rng.uniform(-100, 100, size=(n, 3))
    problems = []

    h3 = np.array([harmonic_mean3(*t) for t in pos])
    if not np.all(h3 < 3 * pos.min(axis=1)):
        problems.append("harmonic mean not below 3*min")
    gap = np.array([mean_gap(*t) for t in pos])
    m3 = pos.mean(axis=1)
    if not np.all(np.abs(m3 - h3 - gap) <= 1e-12 * np.maximum(1.0, m3)):
        problems.append("gap identity")

    cfg = TranslationConfig()
    for t in mixed:
        T = default_translation(*t, cfg)
        J = translated_harmonic_mean3(*t, cfg)
        if abs(J) > max(3 * abs(t[0] + T), abs(T)) * (1 + 1e-12):
            problems.append(f"J3 bound at {tuple(t)}")
            break

    triples = [tuple(t) for t in mixed]
    triples += [(0.0, 0.0, 0.0), (-3.0, 1.0, 3.0), (2.0, -2.0, 0.0), (5.0, 5.0, 5.0)]
    violations = validate_translation(default_translation, triples, cfg)
    if violations:
        problems.append(f"{len(violations)} translation violations, first: {violations[0]}")
    return not problems, "; ".join(problems) or f"{n} triples: bounds, identity and properties hold"


REFERENCE_F = {
    "linear": ((9.1721e-9, 1.6914e-9, 2.1329e-10), (2.4390, 2.9874)),
    "nonlinear": ((8.9912e-9, 1.6687e-9, 2.1080e-10), (2.4298, 2.9848)),
}


def criterion_4():
    rep = run_convergence(LadderSpec(builtin("paper_f")))
    problems, parts = [], []
    for kernel, (ref_err, ref_ord) in REFERENCE_F.items():
        errs, ords = rep.errors(kernel), rep.orders(kernel)
        parts.append(f"{kernel} orders {ords[0]:.4f}, {ords[1]:.4f}")
        for o, p in zip(ords, ref_ord):
            if o is None or abs(o - p) > 0.35:
                problems.append(f"{kernel} order {o} not within 0.35 of {p}")
        if not 2.6 <= ords[-1] <= 3.2:
            problems.append(f"{kernel} finest order {ords[-1]:.4f} outside [2.6, 3.2]")
        for e, p in zip(errs, ref_err):
            if not p / 10 <= e <= p * 10:
                problems.append(f"{kernel} error {e:.3g} not within 10x of {p:.3g}")
    return not problems, "; ".join(problems) or "; ".join(parts)


def criterion_5():
    rep = run_convergence(LadderSpec(builtin("paper_g")))
    nl_err, nl_ord = rep.errors("nonlinear"), rep.orders("nonlinear")
    li_err, li_ord = rep.errors("linear"), rep.orders("linear")
    problems = []
    if nl_ord[-1] is None or not 0.7 <= nl_ord[-1] <= 1.3:
        problems.append(f"nonlinear finest order {nl_ord[-1]} outside [0.7, 1.3]")
    if max(nl_err) >= 1e-4:
        problems.append(f"nonlinear error {max(nl_err):.3g} >= 1e-4")
    if min(li_err) <= 1:
        problems.append(f"linear error {min(li_err):.3g} <= 1")
    if li_ord[-1] is None or not -0.5 <= li_ord[-1] <= 0.5:
        problems.append(f"linear finest order {li_ord[-1]} outside [-0.5, 0.5]")
    detail = (f"nonlinear max err {max(nl_err):.3g}, order {nl_ord[-1]:.4f}; "
              f"linear min err {min(li_err):.3g}, order {li_ord[-1]:.3g}")
    return not problems, "; ".join(problems) or detail


def criterion_6():
    res = gibbs_study(builtin("paper_g", h=0.005), 0.005)
    ok = res["linear"] > 1 and res["nonlinear"] < 0.1
    return ok, f"overshoot linear {res['linear']:.4g} (> 1), nonlinear {res['nonlinear']:.3g} (< 0.1)"


def criterion_7():
    f = builtin("paper_f")
    gaps = []
    for h in (0.02, 0.01, 0.005):
        g = build_geometry(h, origin=(0.3, 0.2))
        gaps.append(coefficient_gaps(sample_function(f, g), h))
    gaps = np.array(gaps)
    ratios = gaps.max(axis=0) / gaps.min(axis=0)
    return bool(np.all(ratios < 2)), "ratios " + ", ".join(f"{r:.3f}" for r in ratios) + " (< 2)"


def _rotated(func, geom, rotation):
    """``q -> func(R^-1 q)`` with R the rotation about the stencil's barycenter."""
    def g(x, y):
        lx, ly = geom.to_local(x, y)
        bx, by = rotate_about_G(lx, ly, geom.h, -rotation)
        return func(bx + geom.origin[0], by + geom.origin[1])
    return g


def criterion_8():
    func = builtin("paper_g")
    worst, parts = 0.0, []
    for geom in ladder_geometries(0.005, 3):
        h = geom.h
        lattice = barycentric_lattice(build_geometry(h).inner_triangle, 64)
        exact = np.asarray(func(lattice[:, 0] + geom.origin[0], lattice[:, 1] + geom.origin[1]))

        e_case = reconstruct_adapted(sample_function(func, geom), h, lattice)
        err_e = float(np.max(np.abs(e_case - exact)))

        # rotating by one step sends E to A, so the jump now isolates A
        rx, ry = rotate_about_G(lattice[:, 0], lattice[:, 1], h, 1)
        a_vals = sample_function(_rotated(func, geom, 1), geom)
        if abs(a_vals.fA - a_vals.fB) < 10:
            return False, "rotated jump does not isolate A"
        a_case = reconstruct_adapted(a_vals, h, np.column_stack([rx, ry]))
        err_a = float(np.max(np.abs(a_case - exact)))

        rel = abs(err_a - err_e) / err_e
        worst = max(worst, rel)
        parts.append(f"h={h:g}: {err_e:.4g} vs {err_a:.4g}")
    return worst <= 0.10, "; ".join(parts) + f" (max rel diff {worst:.2g}, tol 0.1)"


def criterion_9():
    cmds = [
        ["convergence", "--function", "paper_f", "--format", "csv"],
        ["convergence", "--function", "paper_g", "--format", "json"],
    ]
    for args in cmds:
        outputs = []
        for threads in ("1", "4", "0", "4"):
            env = dict(os.environ, PPH_TRI_THREADS=threads)
            proc = subprocess.run([sys.executable, "-m", "pph_tri", *args], env=env,
                                  capture_output=True, check=False)
            if proc.returncode != 0:
                return False, f"{' '.join(args)} exited {proc.returncode}: {proc.stderr.decode()[-200:]}"
            outputs.append(proc.stdout)
        if any(o != outputs[0] for o in outputs):
            return False, f"output of {' '.join(args)} depends on PPH_TRI_THREADS"
    return True, "stdout byte-identical for PPH_TRI_THREADS in 1, 4, 0 (and a repeat)"


CRITERIA = [
    (1, criterion_1, 1.0),
    (2, criterion_2, 1.0),
    (3, criterion_3, 1.0),
    (4, criterion_4, 5.0),
    (5, criterion_5, 5.0),
    (6, criterion_6, 1.0),
    (7, criterion_7, 1.0),
    (8, criterion_8, 2.0),
    (9, criterion_9, 10.0),
]


def run_criterion(number, check, limit):
    t0 = time.perf_counter()
    ok, detail = check()
    elapsed = time.perf_counter() - t0
    if elapsed >= limit:
        ok = False
        detail += f"; took {elapsed:.2f} s, limit {limit:g} s"
    RESULTS.append((number, ok, elapsed, detail))
    return ok, elapsed, detail


def format_result(number, ok, elapsed, detail):
    return f"[{'PASS' if ok else 'FAIL'}] criterion {number} ({elapsed:.2f} s): {detail}"


@pytest.mark.parametrize("number,check,limit", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(number, check, limit):
    ok, elapsed, detail = run_criterion(number, check, limit)
    print(format_result(number, ok, elapsed, detail))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for number, check, limit in CRITERIA:
        ok, elapsed, detail = run_criterion(number, check, limit)
        print(format_result(number, ok, elapsed, detail), flush=True)
        failed += not ok
    sys.exit(1 if failed else 0)
