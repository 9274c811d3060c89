"""Expression trees for the functions of a nonsmooth program.

Grammar of the concrete syntax::

    expr   := term (('+' | '-') term)*
    term   := unary ('*' unary)*
    unary  := '-' unary | atom
    atom   := NUMBER ['/' NUMBER] | VAR | FUNC '(' expr (',' expr)* ')' | '(' expr ')'

Variables are ``x1 .. xn`` (stored 0-based).  ``sin``, ``cos`` and ``pow``
take affine arguments only; ``abs``, ``max`` and ``min`` take anything.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class Expr:
    """Base class; supports ``+ - *``, unary minus and ``abs()``."""

    def __add__(self, other):
        return Add(self, _wrap(other))

    def __radd__(self, other):
        return Add(_wrap(other), self)

    def __sub__(self, other):
        return Add(self, Neg(_wrap(other)))

    def __rsub__(self, other):
        return Add(_wrap(other), Neg(self))

    def __neg__(self):
        return Neg(self)

    def __abs__(self):
        return Abs(self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Smul(Fraction(other), self)
        return Mul(self, _wrap(other))

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Smul(Fraction(other), self)
        return Mul(_wrap(other), self)

    def __str__(self):
        return to_source(self)


def _wrap(x) -> Expr:
    if isinstance(x, Expr):
        return x
    return Const(Fraction(x))


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: Fraction


@dataclass(frozen=True, eq=True)
class Var(Expr):
    index: int


@dataclass(frozen=True, eq=True)
class Affine(Expr):
    coeffs: tuple[Fraction, ...]
    offset: Fraction = Fraction(0)

    def __post_init__(self):
        c = [Fraction(a) for a in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))
        object.__setattr__(self, "offset", Fraction(self.offset))

    def value(self, x: Sequence[Fraction]) -> Fraction:
        return self.offset + sum((a * xi for a, xi in zip(self.coeffs, x)), Fraction(0))

    def gradient(self, n: int) -> tuple[Fraction, ...]:
        return self.coeffs + (Fraction(0),) * (n - len(self.coeffs))


@dataclass(frozen=True, eq=True)
class Sin(Expr):
    arg: Affine


@dataclass(frozen=True, eq=True)
class Cos(Expr):
    arg: Affine


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    arg: Affine
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("pow exponent must be a positive integer")


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, eq=True)
class Abs(Expr):
    arg: Expr


@dataclass(frozen=True, eq=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Smul(Expr):
    scalar: Fraction
    arg: Expr


@dataclass(frozen=True, eq=True)
class Max(Expr):
    args: tuple[Expr, ...]

    def __post_init__(self):
        if not self.args:
            raise ValueError("max of an empty list")
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True, eq=True)
class Min(Expr):
    args: tuple[Expr, ...]

    def __post_init__(self):
        if not self.args:
            raise ValueError("min of an empty list")
        object.__setattr__(self, "args", tuple(self.args))


# -- helpers -----------------------------------------------------------------

def variables(n: int) -> list[Var]:
    return [Var(i) for i in range(n)]


def maximum(*args) -> Max:
    return Max(tuple(_wrap(a) for a in args))


def minimum(*args) -> Min:
    return Min(tuple(_wrap(a) for a in args))


def sin(e) -> Sin:
    return Sin(as_affine(_wrap(e)))


def cos(e) -> Cos:
    return Cos(as_affine(_wrap(e)))


def power(e, k: int) -> Pow:
    return Pow(as_affine(_wrap(e)), k)


def as_affine(e: Expr) -> Affine:
    """Rewrite an affine expression as an :class:`Affine` node.

    Raises ``ValueError`` if ``e`` is not affine.
    """
    coeffs: dict[int, Fraction] = {}
    offset = Fraction(0)

    def walk(node, scale):
        nonlocal offset
        if isinstance(node, Const):
            offset += scale * node.value
        elif isinstance(node, Var):
            coeffs[node.index] = coeffs.get(node.index, Fraction(0)) + scale
        elif isinstance(node, Affine):
            for i, a in enumerate(node.coeffs):
                coeffs[i] = coeffs.get(i, Fraction(0)) + scale * a
            offset += scale * node.offset
        elif isinstance(node, Add):
            walk(node.left, scale)
            walk(node.right, scale)
        elif isinstance(node, Neg):
            walk(node.arg, -scale)
        elif isinstance(node, Smul):
            walk(node.arg, scale * node.scalar)
        elif isinstance(node, Mul) and constant_value(node.left) is not None:
            walk(node.right, scale * constant_value(node.left))
        elif isinstance(node, Mul) and constant_value(node.right) is not None:
            walk(node.left, scale * constant_value(node.right))
        else:
            raise ValueError(f"not an affine expression: {to_source(node)}")

    walk(e, Fraction(1))
    n = max(coeffs) + 1 if coeffs else 0
    return Affine(tuple(coeffs.get(i, Fraction(0)) for i in range(n)), offset)


def constant_value(e: Expr):
    """Value of a variable-free expression built from ``Const``/``Neg``/``Add``/
    ``Smul``/``Mul``; ``None`` otherwise."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Neg):
        v = constant_value(e.arg)
        return None if v is None else -v
    if isinstance(e, Smul):
        v = constant_value(e.arg)
        return None if v is None else e.scalar * v
    if isinstance(e, (Add, Mul)):
        a, b = constant_value(e.left), constant_value(e.right)
        if a is None or b is None:
            return None
        return a + b if isinstance(e, Add) else a * b
    return None


def max_var_index(e: Expr) -> int:
    """Largest variable index used in ``e`` (-1 if none)."""
    if isinstance(e, Var):
        return e.index
    if isinstance(e, Affine):
        return len(e.coeffs) - 1
    if isinstance(e, (Sin, Cos, Pow, Neg, Abs, Smul)):
        return max_var_index(e.arg)
    if isinstance(e, (Add, Mul)):
        return max(max_var_index(e.left), max_var_index(e.right))
    if isinstance(e, (Max, Min)):
        return max(max_var_index(a) for a in e.args)
    return -1


# -- parser ------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|(x\d+)|([a-z]+)|(\S))")
_FUNCS = {"abs", "max", "min", "sin", "cos", "pow"}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                break
            col = m.start(m.lastindex)
            num, var, name, other = m.groups()
            if num is not None:
                self.toks.append(("num", num, col))
            elif var is not None:
                self.toks.append(("var", var, col))
            elif name is not None:
                if name not in _FUNCS:
                    self.error(f"unknown function or name '{name}'", col)
                self.toks.append(("func", name, col))
            elif other is not None:
                if other not in "+-*/(),":
                    self.error(f"unexpected character '{other}'", col)
                self.toks.append(("op", other, col))
            pos = m.end()
        self.i = 0

    def error(self, msg, col):
        line = self.text.count("\n", 0, col) + 1
        start = self.text.rfind("\n", 0, col) + 1
        raise ParseError(msg, line, col - start + 1)

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else ("eof", "", len(self.text))

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, op):
        tok = self.take()
        if tok[0] != "op" or tok[1] != op:
            self.error(f"expected '{op}'", tok[2])
        return tok

    def parse(self) -> Expr:
        if not self.toks:
            self.error("empty expression", 0)
        e = self.expr()
        tok = self.peek()
        if tok[0] != "eof":
            self.error(f"unexpected '{tok[1]}'", tok[2])
        return e

    def expr(self):
        e = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Add(e, _negate(rhs))
        return e

    def term(self):
        e = self.unary()
        while self.peek()[:2] == ("op", "*"):
            self.take()
            e = _product(e, self.unary())
        if self.peek()[:2] == ("op", "/"):
            self.error("division is only allowed inside rational literals p/q", self.peek()[2])
        return e

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return _negate(self.unary())
        return self.atom()

    def atom(self):
        kind, val, col = self.take()
        if kind == "num":
            value = Fraction(int(val))
            if self.peek()[:2] == ("op", "/"):
                self.take()
                k2, v2, c2 = self.take()
                if k2 != "num":
                    self.error("expected an integer denominator", c2)
                if int(v2) == 0:
                    self.error("zero denominator", c2)
                value = Fraction(int(val), int(v2))
            return Const(value)
        if kind == "var":
            idx = int(val[1:])
            if idx < 1:
                self.error("variables are numbered from x1", col)
            return Var(idx - 1)
        if kind == "func":
            self.expect("(")
            args = [self.expr()]
            while self.peek()[:2] == ("op", ","):
                self.take()
                args.append(self.expr())
            self.expect(")")
            return self.call(val, args, col)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "eof":
            self.error("unexpected end of expression", col)
        self.error(f"unexpected '{val}'", col)

    def call(self, name, args, col):
        if name in ("max", "min"):
            return Max(tuple(args)) if name == "max" else Min(tuple(args))
        if name == "abs":
            if len(args) != 1:
                self.error("abs takes one argument", col)
            return Abs(args[0])
        if name in ("sin", "cos"):
            if len(args) != 1:
                self.error(f"{name} takes one argument", col)
            try:
                arg = as_affine(args[0])
            except ValueError:
                self.error(f"{name} argument must be affine", col)
            return Sin(arg) if name == "sin" else Cos(arg)
        # pow
        if len(args) != 2:
            self.error("pow takes an affine argument and an exponent", col)
        k = constant_value(args[1])
        if k is None or k.denominator != 1 or k < 1:
            self.error("pow exponent must be a positive integer", col)
        try:
            arg = as_affine(args[0])
        except ValueError:
            self.error("pow argument must be affine", col)
        return Pow(arg, int(k))


def _negate(e: Expr) -> Expr:
    if isinstance(e, Const):
        return Const(-e.value)
    return Neg(e)


def _product(a: Expr, b: Expr) -> Expr:
    ca, cb = constant_value(a), constant_value(b)
    if ca is not None and cb is not None:
        return Const(ca * cb)
    if ca is not None:
        return Smul(ca, b)
    if cb is not None:
        return Smul(cb, a)
    return Mul(a, b)


def parse(text: str) -> Expr:
    """Parse the concrete expression syntax into an :class:`Expr`."""
    return _Parser(text).parse()


# -- printer -----------------------------------------------------------------

def _affine_source(a: Affine) -> str:
    parts = [f"{c}*x{i + 1}" for i, c in enumerate(a.coeffs) if c != 0]
    if a.offset != 0 or not parts:
        parts.append(str(a.offset))
    return "(" + " + ".join(f"({p})" if p.startswith("-") else p for p in parts) + ")"


def to_source(e: Expr) -> str:
    """Render ``e`` in the concrete syntax accepted by :func:`parse`."""
    if isinstance(e, Const):
        return f"({e.value})" if e.value < 0 else str(e.value)
    if isinstance(e, Var):
        return f"x{e.index + 1}"
    if isinstance(e, Affine):
        return _affine_source(e)
    if isinstance(e, Sin):
        return f"sin{_affine_source(e.arg)}"
    if isinstance(e, Cos):
        return f"cos{_affine_source(e.arg)}"
    if isinstance(e, Pow):
        return f"pow({_affine_source(e.arg)}, {e.k})"
    if isinstance(e, Neg):
        return f"-({to_source(e.arg)})"
    if isinstance(e, Abs):
        return f"abs({to_source(e.arg)})"
    if isinstance(e, Add):
        return f"({to_source(e.left)} + {to_source(e.right)})"
    if isinstance(e, Mul):
        return f"({to_source(e.left)})*({to_source(e.right)})"
    if isinstance(e, Smul):
        s = f"({e.scalar})" if e.scalar < 0 else str(e.scalar)
        return f"{s}*({to_source(e.arg)})"
    if isinstance(e, Max):
        return "max(" + ", ".join(to_source(a) for a in e.args) + ")"
    if isinstance(e, Min):
        return "min(" + ", ".join(to_source(a) for a in e.args) + ")"
    raise TypeError(f"unknown node {type(e).__name__}")


# -- floating-point evaluation -------------------------------------------------

def eval_float(e: Expr, X) -> np.ndarray:
    """Evaluate ``e`` in double precision at the rows of ``X`` (shape ``(..., n)``)."""
    X = np.asarray(X, dtype=float)
    shape = X.shape[:-1]

    def affine(a: Affine):
        out = np.full(shape, float(a.offset))
        for i, c in enumerate(a.coeffs):
            if c:
                out = out + float(c) * X[..., i]
        return out

    def go(node):
        if isinstance(node, Const):
            return np.full(shape, float(node.value))
        if isinstance(node, Var):
            return X[..., node.index]
        if isinstance(node, Affine):
            return affine(node)
        if isinstance(node, Sin):
            return np.sin(affine(node.arg))
        if isinstance(node, Cos):
            return np.cos(affine(node.arg))
        if isinstance(node, Pow):
            return affine(node.arg) ** node.k
        if isinstance(node, Neg):
            return -go(node.arg)
        if isinstance(node, Abs):
            return np.abs(go(node.arg))
        if isinstance(node, Add):
            return go(node.left) + go(node.right)
        if isinstance(node, Mul):
            return go(node.left) * go(node.right)
        if isinstance(node, Smul):
            return float(node.scalar) * go(node.arg)
        if isinstance(node, Max):
            return np.maximum.reduce([go(a) for a in node.args])
        if isinstance(node, Min):
            return np.minimum.reduce([go(a) for a in node.args])
        raise TypeError(f"unknown node {type(node).__name__}")

    return go(e)
