"""A small expression language for weights on C^n.

Grammar (``^`` binds tightest, unary minus sits just above it)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | atom ('^' int)?
    atom   := number | imag-number | 'z' index | func '(' expr ')' | '(' expr ')'

Numbers are unsigned; a trailing ``i`` or ``j`` makes them imaginary
(``2.5i``).  Functions: re, im, abs, abs2, exp, log, conj.

Expressions evaluate on numpy arrays of points with shape ``(..., n)``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ExprSyntaxError",
    "Node",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Pow",
    "Call",
    "FUNCTIONS",
    "parse",
    "to_source",
    "evaluate",
    "max_var_index",
    "walk",
    "uses",
]

FUNCTIONS = {
    "re": np.real,
    "im": np.imag,
    "abs": np.abs,
    "abs2": lambda v: v.real ** 2 + v.imag ** 2,
    "exp": np.exp,
    "log": np.log,
    "conj": np.conj,
}


class ExprSyntaxError(ValueError):
    def __init__(self, msg: str, pos: int, source: str = ""):
        self.pos = pos
        self.source = source
        where = f"\n  {source}\n  {' ' * pos}^" if source else ""
        super().__init__(f"{msg} at position {pos}{where}")


class Node:
    __slots__ = ()


@dataclass(frozen=True)
class Num(Node):
    value: complex

    def __post_init__(self):
        v = complex(self.value)
        if not ((v.imag == 0 and v.real >= 0) or (v.real == 0 and v.imag >= 0)):
            raise ValueError("literals are unsigned and purely real or purely imaginary")


@dataclass(frozen=True)
class Var(Node):
    index: int  # 1-based


@dataclass(frozen=True)
class Neg(Node):
    arg: Node


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: int


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node


_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?[ij]?)"
    r"|(?P<var>z(?P<idx>\d+))"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


def _tokenize(source: str):
    pos = 0
    toks = []
    while pos < len(source):
        if source[pos:].strip() == "":
            break
        m = _TOKEN.match(source, pos)
        if not m or m.end() == pos:
            start = pos + len(source[pos:]) - len(source[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {source[start]!r}", start, source)
        start = m.start(m.lastgroup)
        kind = m.lastgroup
        if kind == "idx":
            kind = "var"
        toks.append((kind, m.group(kind), start))
        pos = m.end()
    toks.append(("end", "", len(source)))
    return toks


class _Parser:
    def __init__(self, source: str, n: int | None):
        self.source = source
        self.n = n
        self.toks = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ExprSyntaxError(msg, tok[2], self.source)

    def expect(self, text):
        tok = self.take()
        if tok[1] != text:
            self.fail(f"expected {text!r}", tok)

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        if self.peek() == ("op", "-", self.peek()[2]):
            self.take()
            return Neg(self.factor())
        node = self.atom()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            sign = 1
            if self.peek()[1] == "-":
                self.take()
                sign = -1
            tok = self.take()
            if tok[0] != "num" or not tok[1].isdigit():
                self.fail("exponent must be an integer", tok)
            node = Pow(node, sign * int(tok[1]))
        return node

    def atom(self) -> Node:
        tok = self.take()
        kind, text, pos = tok
        if kind == "num":
            if text[-1] in "ij":
                return Num(complex(0.0, float(text[:-1])))
            return Num(complex(float(text)))
        if kind == "var":
            idx = int(text[1:])
            if idx < 1:
                self.fail("variables are numbered from z1", tok)
            if self.n is not None and idx > self.n:
                self.fail(f"variable z{idx} exceeds dimension n={self.n}", tok)
            return Var(idx)
        if kind == "name":
            if text not in FUNCTIONS:
                self.fail(f"unknown function {text!r}", tok)
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return Call(text, arg)
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        self.fail("expected a number, variable, function or '('", tok)


def parse(source: str, n: int | None = None) -> Node:
    """Parse ``source``; variables beyond ``n`` are a syntax error."""
    p = _Parser(source, n)
    node = p.expr()
    if p.peek()[0] != "end":
        p.fail("unexpected trailing input")
    return node


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt_num(v: complex) -> str:
    if v.imag != 0:
        return repr(float(v.imag)) + "i"
    return repr(float(v.real))


def to_source(node: Node) -> str:
    """Print with the minimum of parentheses that preserves the tree."""
    return _emit(node, 0)


def _emit(node: Node, ctx: int) -> str:
    # ctx: 0 top, 1 additive, 2 multiplicative, 3 unary, 4 power base
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, Var):
        return f"z{node.index}"
    if isinstance(node, Call):
        return f"{node.func}({_emit(node.arg, 0)})"
    if isinstance(node, Neg):
        s = "-" + _emit(node.arg, 3)
        return f"({s})" if ctx >= 4 else s
    if isinstance(node, Pow):
        s = f"{_emit(node.base, 4)}^{node.exponent}"
        return f"({s})" if ctx >= 4 else s
    if isinstance(node, BinOp):
        prec = _PREC[node.op]
        s = f"{_emit(node.left, prec)} {node.op} {_emit(node.right, prec + 1)}"
        return f"({s})" if ctx > prec else s
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(node: Node, z: np.ndarray):
    """Evaluate on points ``z`` of shape ``(..., n)``; returns a complex array."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return _eval(node, np.asarray(z, dtype=complex))


def _eval(node, z):
    if isinstance(node, Num):
        return np.full(z.shape[:-1], node.value, dtype=complex)
    if isinstance(node, Var):
        if node.index > z.shape[-1]:
            raise ValueError(f"z{node.index} undefined for points in C^{z.shape[-1]}")
        return z[..., node.index - 1]
    if isinstance(node, Neg):
        return -_eval(node.arg, z)
    if isinstance(node, Call):
        return np.asarray(FUNCTIONS[node.func](_eval(node.arg, z)), dtype=complex)
    if isinstance(node, Pow):
        base = _eval(node.base, z)
        if node.exponent < 0:
            return 1.0 / base ** (-node.exponent)
        return base ** node.exponent
    left, right = _eval(node.left, z), _eval(node.right, z)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    return left / right


def walk(node):
    yield node
    for attr in ("arg", "left", "right", "base"):
        child = getattr(node, attr, None)
        if isinstance(child, Node):
            yield from walk(child)


def max_var_index(node: Node) -> int:
    return max((n.index for n in walk(node) if isinstance(n, Var)), default=0)


def uses(node: Node, what: str) -> bool:
    """True if the tree contains the function or operator ``what``."""
    for n in walk(node):
        if isinstance(n, Call) and n.func == what:
            return True
        if isinstance(n, BinOp) and n.op == what:
            return True
        if what == "^-" and isinstance(n, Pow) and n.exponent < 0:
            return True
    return False
