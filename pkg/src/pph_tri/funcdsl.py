"""Tiny expression language for bivariate test functions.

Grammar (lowest to highest precedence)::

    expr     := additive
    cond     := additive ('<' | '<=' | '>' | '>=') additive     # only as if(...)'s 1st arg
    additive := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := primary ('^' unary)?                             # right associative
    primary  := NUMBER | NAME | NAME '(' args ')' | '(' expr ')'

Names are ``x``, ``y``, ``pi`` and any constants bound at evaluation time
(``h`` for the builtin jump function).  Calls: sin cos exp abs sqrt and
``if(cond, then, else)``.

Evaluation is vectorized over numpy arrays; each point evaluates exactly one
branch of every ``if``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np


class DSLError(Exception):
    pass


class ParseError(DSLError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifier(ParseError):
    pass


class EvalError(DSLError):
    pass


# -- AST --------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str
    args: Tuple["Expr", ...]


@dataclass(frozen=True)
class Compare:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class If:
    cond: Compare
    then: "Expr"
    orelse: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call, If]

FUNCTIONS: Dict[str, Callable] = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "abs": np.abs,
    "sqrt": np.sqrt,
}
BUILTIN_NAMES = {"x", "y", "pi"}
COMPARE_OPS = ("<=", ">=", "<", ">")

# -- tokenizer ----------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op><=|>=|[-+*/^(),<>])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


def tokenize(source: str) -> List[Token]:
    out = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", len(source[:pos].encode()))
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), len(source[:pos].encode())))
        pos = m.end()
    out.append(Token("end", "", len(source.encode())))
    return out


# -- parser -----------------------------------------------------------------

class _Parser:
    def __init__(self, source: str, constants: Optional[Iterable[str]]):
        self.toks = tokenize(source)
        self.i = 0
        self.allowed = None if constants is None else BUILTIN_NAMES | set(constants)

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if self.tok.text != text:
            found = repr(self.tok.text) if self.tok.kind != "end" else "end of input"
            raise ParseError(f"expected {text!r}, found {found}", self.tok.offset)
        return self.advance()

    def parse(self) -> Expr:
        e = self.additive()
        if self.tok.kind != "end":
            if self.tok.text in COMPARE_OPS:
                raise ParseError("comparison outside if(...)", self.tok.offset)
            raise ParseError(f"unexpected {self.tok.text!r}", self.tok.offset)
        return e

    def additive(self) -> Expr:
        e = self.term()
        while self.tok.text in ("+", "-"):
            op = self.advance().text
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.advance().text
            e = BinOp(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.tok.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.tok.text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def condition(self) -> Compare:
        left = self.additive()
        if self.tok.text not in COMPARE_OPS:
            raise ParseError("expected comparison operator", self.tok.offset)
        op = self.advance().text
        return Compare(op, left, self.additive())

    def primary(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text))
        if t.text == "(":
            self.advance()
            e = self.additive()
            self.expect(")")
            return e
        if t.kind == "name":
            self.advance()
            if self.tok.text == "(":
                return self.call(t)
            if self.allowed is not None and t.text not in self.allowed:
                raise UnknownIdentifier(f"unknown identifier {t.text!r}", t.offset)
            return Var(t.text)
        found = repr(t.text) if t.kind != "end" else "end of input"
        raise ParseError(f"expected expression, found {found}", t.offset)

    def call(self, name: Token) -> Expr:
        self.expect("(")
        if name.text == "if":
            cond = self.condition()
            self.expect(",")
            then = self.additive()
            self.expect(",")
            orelse = self.additive()
            self.expect(")")
            return If(cond, then, orelse)
        if name.text not in FUNCTIONS:
            raise UnknownIdentifier(f"unknown function {name.text!r}", name.offset)
        arg = self.additive()
        self.expect(")")
        return Call(name.text, (arg,))


def parse(source: str, constants: Optional[Iterable[str]] = None) -> Expr:
    """Parse ``source`` into an AST.

    If ``constants`` is given, identifiers other than x, y, pi and those
    names are rejected at parse time; otherwise unbound names surface at
    evaluation.
    """
    return _Parser(source, constants).parse()


# -- printer ----------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_source(e) -> str:
    """Render an AST back to parseable text (parenthesized where needed)."""
    return _show(e, 0)


def _show(e, ctx: int) -> str:
    # ctx: 0 any, 1 additive, 2 term, 3 unary, 4 power base
    if isinstance(e, Num):
        s = repr(e.value)
        return f"({s})" if e.value < 0 or s in ("inf", "nan") else s
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        s = "-" + _show(e.operand, 3)
        return f"({s})" if ctx >= 4 else s
    if isinstance(e, BinOp):
        if e.op == "^":
            s = _show(e.left, 4) + "^" + _show(e.right, 3)
            return f"({s})" if ctx >= 4 else s
        p = _PREC[e.op]
        # left-associative: the right operand needs one level tighter
        s = _show(e.left, p) + f" {e.op} " + _show(e.right, p + 1)
        return f"({s})" if ctx > p else s
    if isinstance(e, Call):
        return f"{e.fn}(" + ", ".join(_show(a, 0) for a in e.args) + ")"
    if isinstance(e, If):
        c = e.cond
        return (f"if({_show(c.left, 0)} {c.op} {_show(c.right, 0)}, "
                f"{_show(e.then, 0)}, {_show(e.orelse, 0)})")
    raise TypeError(f"not an expression node: {e!r}")


# -- evaluation ---------------------------------------------------------------

_CMP = {"<": np.less, "<=": np.less_equal, ">": np.greater, ">=": np.greater_equal}
_BIN = {"+": np.add, "-": np.subtract, "*": np.multiply, "/": np.divide, "^": np.power}


class _Evaluator:
    def __init__(self, x, y, bindings: Mapping[str, float], track_ties: bool):
        self.env = {"pi": math.pi, **{k: float(v) for k, v in bindings.items()}}
        self.x, self.y = x, y
        self.ties = np.zeros(x.shape, dtype=bool) if track_ties else None

    def run(self, e, idx):
        if isinstance(e, Num):
            return np.full(idx.shape, e.value)
        if isinstance(e, Var):
            if e.name == "x":
                return self.x[idx]
            if e.name == "y":
                return self.y[idx]
            if e.name not in self.env:
                raise EvalError(f"unbound identifier {e.name!r}")
            return np.full(idx.shape, self.env[e.name])
        if isinstance(e, Neg):
            return -self.run(e.operand, idx)
        if isinstance(e, BinOp):
            return _BIN[e.op](self.run(e.left, idx), self.run(e.right, idx))
        if isinstance(e, Call):
            return FUNCTIONS[e.fn](self.run(e.args[0], idx))
        if isinstance(e, If):
            lhs = self.run(e.cond.left, idx)
            rhs = self.run(e.cond.right, idx)
            if self.ties is not None:
                self.ties[idx[lhs == rhs]] = True
            mask = _CMP[e.cond.op](lhs, rhs)
            out = np.empty(idx.shape)
            if mask.any():
                out[mask] = self.run(e.then, idx[mask])
            if (~mask).any():
                out[~mask] = self.run(e.orelse, idx[~mask])
            return out
        raise TypeError(f"not an expression node: {e!r}")


def _prepare(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    return x.ravel(), y.ravel(), x.shape


def evaluate(e, x, y, bindings: Optional[Mapping[str, float]] = None):
    """Evaluate at scalar or array coordinates.

    Raises :class:`EvalError` for unbound names and for any non-finite
    result.
    """
    xs, ys, shape = _prepare(x, y)
    ev = _Evaluator(xs, ys, bindings or {}, track_ties=False)
    with np.errstate(all="ignore"):
        out = ev.run(e, np.arange(xs.size))
    bad = ~np.isfinite(out)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise EvalError(f"non-finite value {out[i]!r} at ({xs[i]!r}, {ys[i]!r}) in {to_source(e)}")
    out = out.reshape(shape)
    return float(out) if out.ndim == 0 else out


def comparison_ties(e, x, y, bindings: Optional[Mapping[str, float]] = None) -> np.ndarray:
    """Mask of points where some ``if`` condition compares two equal values
    (the point sits exactly on a branch boundary)."""
    xs, ys, shape = _prepare(x, y)
    ev = _Evaluator(xs, ys, bindings or {}, track_ties=True)
    with np.errstate(all="ignore"):
        ev.run(e, np.arange(xs.size))
    return ev.ties.reshape(shape)


def free_names(e) -> set:
    if isinstance(e, Var):
        return set() if e.name in BUILTIN_NAMES else {e.name}
    if isinstance(e, Num):
        return set()
    if isinstance(e, Neg):
        return free_names(e.operand)
    if isinstance(e, (BinOp, Compare)):
        return free_names(e.left) | free_names(e.right)
    if isinstance(e, Call):
        return set().union(*(free_names(a) for a in e.args))
    if isinstance(e, If):
        return free_names(e.cond) | free_names(e.then) | free_names(e.orelse)
    raise TypeError(f"not an expression node: {e!r}")


# -- test functions -------------------------------------------------------------

@dataclass(frozen=True)
class TestFunction:
    """A bivariate function with an optional DSL form.

    ``bindings`` are the named constants the expression was bound with.
    """
    name: str
    func: Callable
    expr: Optional[Expr] = None
    bindings: Tuple[Tuple[str, float], ...] = ()

    __test__ = False  # not a pytest class

    def __call__(self, x, y):
        return self.func(x, y)

    def ties(self, x, y) -> np.ndarray:
        if self.expr is None:
            return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape, dtype=bool)
        return comparison_ties(self.expr, x, y, dict(self.bindings))


def from_expression(source: str, bindings: Optional[Mapping[str, float]] = None,
                    name: Optional[str] = None) -> TestFunction:
    bindings = dict(bindings or {})
    e = parse(source, constants=bindings.keys())
    def f(x, y):
        return evaluate(e, x, y, bindings)
    return TestFunction(name or source, f, e, tuple(sorted(bindings.items())))


PAPER_F_SOURCE = "sin(x+y)+20"
PAPER_G_SOURCE = "if(y < -sqrt(3)*(x - 0.625*h), sin(x+y)+20, cos(x+y)+200)"
# jump line exactly as printed (unscaled); misses a stencil with small h
PAPER_G_UNSCALED_SOURCE = "if(y < -sqrt(3)*(x - 0.625), sin(x+y)+20, cos(x+y)+200)"


def _paper_f(x, y):
    return np.sin(np.asarray(x, dtype=float) + y) + 20


def _paper_g(h):
    def g(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        smooth = y < -np.sqrt(3.0) * (x - 0.625 * h)
        out = np.where(smooth, np.sin(x + y) + 20, np.cos(x + y) + 200)
        return float(out) if out.ndim == 0 else out
    return g


def builtin(name: str, h: float = 0.005) -> TestFunction:
    """Look up a builtin test function; ``h`` sets the jump-line scale of
    ``paper_g``."""
    if name == "paper_f":
        return TestFunction(name, _paper_f, parse(PAPER_F_SOURCE))
    if name == "paper_g":
        return TestFunction(name, _paper_g(h), parse(PAPER_G_SOURCE, ["h"]), (("h", float(h)),))
    if name == "paper_g_unscaled":
        return from_expression(PAPER_G_UNSCALED_SOURCE, name=name)
    raise KeyError(f"unknown builtin function {name!r}; choose from {sorted(BUILTINS)}")


BUILTINS = ("paper_f", "paper_g", "paper_g_unscaled")
