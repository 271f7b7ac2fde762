"""Command-line front end: ``pph-tri <subcommand> [options]``.

Exit status: 0 on success, 1 on runtime failure (bad input file, function
evaluation error, translation violations), 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from typing import Dict, List, Optional

import numpy as np

from . import funcdsl
from .harness import LadderSpec, dump_samples, emit_report, gibbs_study, run_convergence, _num
from .means import TranslationConfig, default_translation, validate_translation
from .reconstruct import evaluate, linear_coefficients, reconstruct_adapted
from .stencil import LABELS, StencilValues

log = logging.getLogger("pph_tri")

# config-file key -> (argparse dest, type)
CONFIG_KEYS = {
    "h0": ("h0", float),
    "h": ("h", float),
    "levels": ("levels", int),
    "grid": ("grid", int),
    "grid_n": ("grid", int),
    "function": ("function", str),
    "function_expr": ("function_expr", str),
    "K": ("K", float),
    "offset_constant": ("K", float),
    "adapt": ("adapt", None),
    "format": ("format", str),
    "out": ("out", str),
    "samples": ("samples", int),
    "seed": ("seed", int),
    "range": ("range", float),
}

DEFAULTS = {
    "h0": 0.005, "h": 0.005, "levels": 3, "grid": 64, "function": "paper_f",
    "function_expr": None, "K": TranslationConfig().offset_constant, "adapt": True,
    "format": "csv", "out": None, "samples": 1000, "seed": 0, "range": 10.0,
}


class InputError(Exception):
    pass


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def read_config(path: str) -> Dict[str, object]:
    """``key = value`` lines; '#' starts a comment."""
    out: Dict[str, object] = {}
    with open(path) as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{n}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in CONFIG_KEYS:
                raise InputError(f"{path}:{n}: unknown key {key!r}")
            dest, typ = CONFIG_KEYS[key]
            try:
                out[dest] = _parse_bool(value) if typ is None else typ(value)
            except ValueError as exc:
                raise InputError(f"{path}:{n}: {exc}") from None
    return out


def read_stencil_file(path: str) -> StencilValues:
    """Six lines ``fA <value>`` .. ``fF <value>`` in any order, '#' comments allowed."""
    seen: Dict[str, float] = {}
    with open(path) as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2 or parts[0] not in {"f" + k for k in LABELS}:
                raise InputError(f"{path}:{n}: expected 'f<A-F> <value>', got {line!r}")
            label = parts[0][1]
            if label in seen:
                raise InputError(f"{path}:{n}: duplicate value for {parts[0]}")
            try:
                seen[label] = float(parts[1])
            except ValueError:
                raise InputError(f"{path}:{n}: bad number {parts[1]!r}") from None
            if not np.isfinite(seen[label]):
                raise InputError(f"{path}:{n}: value must be finite")
    missing = [f"f{k}" for k in LABELS if k not in seen]
    if missing:
        raise InputError(f"{path}: missing {', '.join(missing)}")
    return StencilValues.from_dict(seen)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pph-tri",
                                description="Nonlinear harmonic-mean reconstruction on equilateral stencils.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    def common(sp, ladder=True):
        sp.add_argument("--config", help="key = value file; command-line flags take precedence")
        sp.add_argument("--K", type=float, help=f"translation offset constant (default {DEFAULTS['K']:g})")
        sp.add_argument("--no-adapt", dest="adapt", action="store_const", const=False,
                        help="always treat vertex E as the suspect vertex")
        sp.add_argument("--format", choices=["csv", "json", "pretty"])
        sp.add_argument("--out", help="write output here instead of stdout")
        if ladder:
            src = sp.add_mutually_exclusive_group()
            src.add_argument("--function", help=f"builtin test function: {', '.join(funcdsl.BUILTINS)}")
            src.add_argument("--function-expr", help="expression in x, y (h is bound to the stencil scale)")
            sp.add_argument("--grid", type=int, help="lattice subdivisions per side")

    c = sub.add_parser("convergence", help="refinement-ladder error and order table")
    common(c)
    c.add_argument("--h0", type=float, help="half side of the coarsest stencil (default 0.005)")
    c.add_argument("--levels", type=int, help="number of refinement levels, at least 2 (default 3)")
    c.add_argument("--dump-samples", metavar="PATH",
                   help="also write (x, y, p, p_tilde, f) over the coarsest inner triangle")

    g = sub.add_parser("gibbs", help="overshoot of both kernels on one stencil")
    common(g)
    g.add_argument("--h", type=float, help="half side of the stencil")

    r = sub.add_parser("reconstruct", help="evaluate both kernels from a stencil value file")
    common(r, ladder=False)
    r.add_argument("--values", required=True, help="file with lines 'fA <value>' .. 'fF <value>'")
    r.add_argument("--h", type=float, help="half side the values were sampled with")
    r.add_argument("--point", action="append", default=[], metavar="X,Y",
                   help="local evaluation point (repeatable); default: barycenter")

    v = sub.add_parser("validate-translation", help="check translation properties on random triples")
    common(v, ladder=False)
    v.add_argument("--samples", type=int, help="number of random triples (default 1000)")
    v.add_argument("--seed", type=int, help="random seed (default 0)")
    v.add_argument("--range", type=float, help="triples drawn from [-R, R]^3")
    return p


def _settings(args: argparse.Namespace) -> Dict[str, object]:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(read_config(args.config))
    for key, value in vars(args).items():
        if value is not None:
            cfg[key] = value
    if args.command in ("convergence", "gibbs") and getattr(args, "function", None) is None \
            and getattr(args, "function_expr", None) is not None:
        cfg["function"] = None
    elif getattr(args, "function", None) is not None:
        cfg["function_expr"] = None
    return cfg


def _check(parser, cfg, command):
    for key in ("h0", "h", "K", "range"):
        if key in cfg and cfg[key] is not None and not cfg[key] > 0:
            parser.error(f"{key} must be positive")
    if command == "convergence" and cfg["levels"] < 2:
        parser.error("levels must be at least 2")
    if cfg["grid"] < 8:
        parser.error("grid must be at least 8")
    if cfg.get("samples", 1) < 1:
        parser.error("samples must be at least 1")
    fn = cfg.get("function")
    if command in ("convergence", "gibbs") and cfg.get("function_expr") is None \
            and fn not in funcdsl.BUILTINS:
        parser.error(f"unknown function {fn!r}; choose from {', '.join(funcdsl.BUILTINS)}")


def _function(cfg, scale: float) -> funcdsl.TestFunction:
    if cfg.get("function_expr"):
        return funcdsl.from_expression(cfg["function_expr"], {"h": scale})
    return funcdsl.builtin(cfg["function"], h=scale)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_convergence(cfg) -> int:
    spec = LadderSpec(_function(cfg, cfg["h0"]), h0=cfg["h0"], levels=cfg["levels"],
                      grid_n=cfg["grid"], translation=TranslationConfig(cfg["K"]),
                      adapt=cfg["adapt"])
    log.info("running %d levels of %s from h0=%g", spec.levels, spec.function.name, spec.h0)
    _emit(emit_report(run_convergence(spec), cfg["format"]), cfg["out"])
    if cfg.get("dump_samples"):
        with open(cfg["dump_samples"], "w", newline="") as fh:
            fh.write(dump_samples(spec))
    return 0


def _cmd_gibbs(cfg) -> int:
    func = _function(cfg, cfg["h"])
    res = gibbs_study(func, cfg["h"], cfg["grid"], TranslationConfig(cfg["K"]), cfg["adapt"])
    lo, hi = res["data_range"]
    if cfg["format"] == "json":
        text = json.dumps({"function": func.name, "h": _num(cfg["h"]), "grid_n": cfg["grid"],
                           "data_range": [_num(lo), _num(hi)],
                           "overshoot": {k: _num(res[k]) for k in ("linear", "nonlinear")}},
                          indent=2) + "\n"
    elif cfg["format"] == "pretty":
        text = (f"# function={func.name} h={_num(cfg['h'])} grid_n={cfg['grid']} "
                f"data range [{_num(lo)}, {_num(hi)}]\n"
                f"linear     {_num(res['linear'])}\nnonlinear  {_num(res['nonlinear'])}\n")
    else:
        text = f"kernel,overshoot\nlinear,{_num(res['linear'])}\nnonlinear,{_num(res['nonlinear'])}\n"
    _emit(text, cfg["out"])
    return 0


def _parse_point(text: str, parser) -> tuple:
    try:
        x, y = (float(s) for s in text.split(","))
    except ValueError:
        parser.error(f"--point expects X,Y, got {text!r}")
    return x, y


def _cmd_reconstruct(cfg, parser) -> int:
    values = read_stencil_file(cfg["values"])
    h = cfg["h"]
    pts = [_parse_point(p, parser) for p in cfg["point"]] or [(0.0, 3 ** 0.5 / 6 * h)]
    arr = np.array(pts, dtype=float)
    lin = np.atleast_1d(evaluate(linear_coefficients(values, h), h, arr[:, 0], arr[:, 1]))
    nl = reconstruct_adapted(values, h, arr, TranslationConfig(cfg["K"]), cfg["adapt"])
    if cfg["format"] == "json":
        text = json.dumps([{"x": x, "y": y, "linear": float(a), "nonlinear": float(b)}
                           for (x, y), a, b in zip(pts, lin, nl)], indent=2) + "\n"
    else:
        sep = "," if cfg["format"] == "csv" else "  "
        lines = [sep.join(["x", "y", "linear", "nonlinear"])]
        lines += [sep.join(_num(v, 12) for v in (x, y, a, b)) for (x, y), a, b in zip(pts, lin, nl)]
        text = "\n".join(lines) + "\n"
    _emit(text, cfg["out"])
    return 0


def _cmd_validate(cfg) -> int:
    rng = random.Random(cfg["seed"])
    R = cfg["range"]
    triples = [(0.0, 0.0, 0.0)] + [tuple(rng.uniform(-R, R) for _ in range(3))
                                   for _ in range(cfg["samples"] - 1)]
    found = validate_translation(default_translation, triples, TranslationConfig(cfg["K"]))
    lines = [str(v) for v in found]
    lines.append(f"{len(triples)} triples checked, {len(found)} violation(s)")
    _emit("\n".join(lines) + "\n", cfg["out"])
    return 1 if found else 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = _settings(args)
    except (OSError, InputError) as exc:
        print(f"pph-tri: {exc}", file=sys.stderr)
        return 1
    _check(parser, cfg, args.command)
    try:
        if args.command == "convergence":
            return _cmd_convergence(cfg)
        if args.command == "gibbs":
            return _cmd_gibbs(cfg)
        if args.command == "reconstruct":
            return _cmd_reconstruct(cfg, parser)
        return _cmd_validate(cfg)
    except funcdsl.ParseError as exc:
        print(f"pph-tri: cannot parse function: {exc}", file=sys.stderr)
        return 1
    except (funcdsl.DSLError, InputError, OSError, ValueError) as exc:
        print(f"pph-tri: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
